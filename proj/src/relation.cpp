#include "gtlog/relation.hpp"

#include <algorithm>

#include "gtlog/error.hpp"

namespace gtlog {

std::optional<std::size_t> RelationSchema::attribute_column(std::string_view name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i] == name) return positional + i;
    }
    if (functional && name == "logica_value") return value_column();
    return std::nullopt;
}

std::string positional_column_name(std::size_t index) { return "$" + std::to_string(index); }

std::vector<std::string> RelationSchema::column_names() const {
    std::vector<std::string> out;
    out.reserve(arity());
    for (std::size_t i = 0; i < positional; ++i) out.push_back(positional_column_name(i));
    out.insert(out.end(), attributes.begin(), attributes.end());
    if (functional) out.emplace_back("logica_value");
    return out;
}

struct Relation::IndexCache {
    std::mutex mutex;
    std::map<std::vector<std::size_t>, std::unique_ptr<Index>> indexes;
};

Relation::Relation(std::string name, RelationSchema schema)
    : name_(std::move(name)), schema_(std::move(schema)), cache_(std::make_unique<IndexCache>()) {}

Relation::Relation(std::string name, RelationSchema schema, std::vector<Tuple> rows)
    : name_(std::move(name)), schema_(std::move(schema)), rows_(std::move(rows)),
      cache_(std::make_unique<IndexCache>()) {
    const std::size_t n = schema_.arity();
    for (const auto& row : rows_) {
        if (row.size() != n) {
            throw Error(ErrorCode::ArityMismatch, "relation " + name_ + " expects " + std::to_string(n) +
                                                      " columns, got a row with " + std::to_string(row.size()));
        }
    }
    std::sort(rows_.begin(), rows_.end());
    rows_.erase(std::unique(rows_.begin(), rows_.end()), rows_.end());
}

Relation::Relation(const Relation& other)
    : name_(other.name_), schema_(other.schema_), rows_(other.rows_), cache_(std::make_unique<IndexCache>()) {}

Relation& Relation::operator=(const Relation& other) {
    if (this != &other) {
        name_ = other.name_;
        schema_ = other.schema_;
        rows_ = other.rows_;
        cache_ = std::make_unique<IndexCache>();
    }
    return *this;
}

Relation::Relation(Relation&&) noexcept = default;
Relation& Relation::operator=(Relation&&) noexcept = default;
Relation::~Relation() = default;

bool Relation::contains(const Tuple& row) const { return std::binary_search(rows_.begin(), rows_.end(), row); }

const Relation::Index& Relation::index(const std::vector<std::size_t>& key_columns) const {
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->indexes[key_columns];
    if (!slot) {
        auto idx = std::make_unique<Index>();
        idx->reserve(rows_.size());
        Tuple key(key_columns.size());
        for (std::uint32_t r = 0; r < rows_.size(); ++r) {
            for (std::size_t k = 0; k < key_columns.size(); ++k) key[k] = rows_[r][key_columns[k]];
            (*idx)[key].push_back(r);
        }
        slot = std::move(idx);
    }
    return *slot;
}

std::uint64_t Relation::digest() const {
    std::uint64_t h = 1469598103934665603ull;
    auto fold = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    fold(schema_.positional);
    for (const auto& a : schema_.attributes) fold(std::hash<std::string>{}(a));
    fold(schema_.functional ? 1 : 0);
    fold(rows_.size());
    for (const auto& row : rows_) fold(TupleHash{}(row));
    return h;
}

Relation Relation::renamed(std::string name) const {
    Relation out(*this);
    out.name_ = std::move(name);
    return out;
}

Value lookup_functional(const Relation& relation, std::span<const Value> key) {
    const auto& schema = relation.schema();
    if (!schema.functional) {
        throw Error(ErrorCode::ArityMismatch, relation.name() + " has no functional value");
    }
    if (key.size() != schema.key_width()) {
        throw Error(ErrorCode::ArityMismatch, relation.name() + " key expects " + std::to_string(schema.key_width()) +
                                                  " values, got " + std::to_string(key.size()));
    }
    // Rows are sorted, so all rows sharing a key prefix are contiguous.
    auto it = std::lower_bound(relation.rows().begin(), relation.rows().end(), key,
                               [](const Tuple& row, std::span<const Value> k) {
                                   return std::lexicographical_compare(row.begin(), row.begin() + k.size(),
                                                                       k.begin(), k.end());
                               });
    auto matches = [&](const Tuple& row) { return std::equal(key.begin(), key.end(), row.begin()); };
    if (it == relation.rows().end() || !matches(*it)) {
        std::string shown;
        for (const auto& v : key) shown += (shown.empty() ? "" : ", ") + literal(v);
        throw Error(ErrorCode::KeyAbsent, relation.name() + "(" + shown + ") has no value");
    }
    if (auto next = it + 1; next != relation.rows().end() && matches(*next)) {
        throw Error(ErrorCode::FunctionalValueConflict,
                    relation.name() + " maps one key to " + literal(it->back()) + " and " + literal(next->back()));
    }
    return it->back();
}

const Relation* Snapshot::find(const std::string& name) const {
    auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : it->second.get();
}

RelationPtr Snapshot::find_ptr(const std::string& name) const {
    auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : it->second;
}

Snapshot Snapshot::with(RelationPtr relation) const {
    Snapshot out = *this;
    std::string name = relation->name();
    out.relations_[name] = std::move(relation);
    return out;
}

Snapshot Snapshot::with_iteration(std::size_t iteration) const {
    Snapshot out = *this;
    out.iteration_ = iteration;
    return out;
}

Snapshot Snapshot::without(const std::string& name) const {
    Snapshot out = *this;
    out.relations_.erase(name);
    return out;
}

}  // namespace gtlog
