#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtlog/value.hpp"

namespace gtlog {

/// Column layout of a relation: positional columns first, then named
/// attributes in declaration order, then the functional-value column.
struct RelationSchema {
    std::size_t positional = 0;
    std::vector<std::string> attributes;
    bool functional = false;

    std::size_t arity() const { return positional + attributes.size() + (functional ? 1 : 0); }
    std::optional<std::size_t> attribute_column(std::string_view name) const;
    std::size_t value_column() const { return positional + attributes.size(); }
    /// "$0", "$1", ..., attribute names, "logica_value".
    std::vector<std::string> column_names() const;
    /// Number of leading columns that identify a functional value.
    std::size_t key_width() const { return functional ? arity() - 1 : arity(); }

    bool operator==(const RelationSchema&) const = default;
};

std::string positional_column_name(std::size_t index);

/// Immutable set of tuples kept in canonical (sorted, deduplicated) order.
class Relation {
public:
    using Index = std::unordered_map<Tuple, std::vector<std::uint32_t>, TupleHash>;

    Relation(std::string name, RelationSchema schema);
    /// Sorts and deduplicates `rows`; every row must match the schema arity.
    Relation(std::string name, RelationSchema schema, std::vector<Tuple> rows);

    Relation(const Relation& other);
    Relation& operator=(const Relation& other);
    Relation(Relation&&) noexcept;
    Relation& operator=(Relation&&) noexcept;
    ~Relation();

    const std::string& name() const noexcept { return name_; }
    const RelationSchema& schema() const noexcept { return schema_; }
    std::size_t arity() const noexcept { return schema_.arity(); }
    const std::vector<Tuple>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    bool contains(const Tuple& row) const;

    /// Rows grouped by the given key columns; built once and cached.
    const Index& index(const std::vector<std::size_t>& key_columns) const;

    /// 64-bit content hash of schema and rows.
    std::uint64_t digest() const;

    Relation renamed(std::string name) const;

    friend bool operator==(const Relation& a, const Relation& b) {
        return a.schema_ == b.schema_ && a.rows_ == b.rows_;
    }

private:
    struct IndexCache;

    std::string name_;
    RelationSchema schema_;
    std::vector<Tuple> rows_;
    std::unique_ptr<IndexCache> cache_;
};

using RelationPtr = std::shared_ptr<const Relation>;

/// The unique value stored for `key` in a functional relation.
/// Throws KeyAbsent if there is none.
Value lookup_functional(const Relation& relation, std::span<const Value> key);

/// Immutable map predicate name -> relation for one iteration.
class Snapshot {
public:
    Snapshot() = default;
    explicit Snapshot(std::size_t iteration) : iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }
    const Relation* find(const std::string& name) const;
    RelationPtr find_ptr(const std::string& name) const;
    bool contains(const std::string& name) const { return relations_.count(name) != 0; }
    const std::map<std::string, RelationPtr>& relations() const noexcept { return relations_; }

    Snapshot with(RelationPtr relation) const;
    Snapshot with_iteration(std::size_t iteration) const;
    Snapshot without(const std::string& name) const;

private:
    std::size_t iteration_ = 0;
    std::map<std::string, RelationPtr> relations_;
};

}  // namespace gtlog
