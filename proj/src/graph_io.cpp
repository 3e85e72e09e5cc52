#include "gtlog/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gtlog/error.hpp"

namespace gtlog {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::optional<Value> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    std::int64_t i = 0;
    if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) return Value(i);
    if (s.find_first_of(".eE") == std::string_view::npos) return std::nullopt;
    if (!(std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '-' || s.front() == '.')) {
        return std::nullopt;
    }
    double d = 0;
    if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc() && p == last) return Value(d);
    return std::nullopt;
}

Value field_value(std::string field, bool quoted, bool keep_string) {
    if (quoted || keep_string) return Value(std::move(field));
    if (field.empty()) return Value::nil();
    if (field == "true") return Value(true);
    if (field == "false") return Value(false);
    if (auto n = parse_number(field)) return *n;
    return Value(std::move(field));
}

bool needs_quotes(const std::string& s) {
    if (s.empty() || s == "true" || s == "false" || parse_number(s)) return true;
    return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_field(const Value& v) {
    switch (v.type()) {
        case Value::Type::Nil: return "";
        case Value::Type::Bool:
        case Value::Type::Int: return display(v);
        case Value::Type::Float: return literal(v);
        case Value::Type::Str:
        case Value::Type::List: {
            std::string s = v.is_str() ? v.as_str() : literal(v);
            if (v.is_str() && !needs_quotes(s)) return s;
            std::string out = "\"";
            for (char c : s) {
                if (c == '"') out += '"';
                out += c;
            }
            return out + "\"";
        }
    }
    return "";
}

nlohmann::ordered_json to_json(const Value& v) {
    switch (v.type()) {
        case Value::Type::Nil: return nullptr;
        case Value::Type::Bool: return v.as_bool();
        case Value::Type::Int: return v.as_int();
        case Value::Type::Float: return v.as_float();
        case Value::Type::Str: return v.as_str();
        case Value::Type::List: {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& item : v.as_list()) arr.push_back(to_json(item));
            return arr;
        }
    }
    return nullptr;
}

Value from_json(const nlohmann::json& j) {
    if (j.is_null()) return Value::nil();
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number_integer()) return Value(j.get<std::int64_t>());
    if (j.is_number_float()) return Value(j.get<double>());
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_array()) {
        Value::List items;
        for (const auto& item : j) items.push_back(from_json(item));
        return Value(std::move(items));
    }
    throw Error(ErrorCode::Parse, "unsupported JSON value " + j.dump());
}

}  // namespace

FileFormat format_for(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    if (ext == ".tsv" || ext == ".tab") return FileFormat::Tsv;
    if (ext == ".json") return FileFormat::Json;
    return FileFormat::Csv;
}

std::vector<Tuple> parse_delimited(std::string_view text, char delimiter, const LoadOptions& options) {
    std::vector<Tuple> rows;
    std::size_t line = 1, row_line = 1, width = 0;
    bool first_row = true;
    std::size_t i = 0;
    const bool quoting = delimiter == ',';
    while (i < text.size()) {
        Tuple row;
        row_line = line;
        bool end_of_row = false;
        while (!end_of_row) {
            std::string field;
            bool quoted = false;
            if (quoting && i < text.size() && text[i] == '"') {
                quoted = true;
                ++i;
                while (true) {
                    if (i >= text.size()) {
                        throw Error(ErrorCode::Parse, "line " + std::to_string(row_line) + ": unterminated quoted field");
                    }
                    char c = text[i++];
                    if (c == '"') {
                        if (i < text.size() && text[i] == '"') {
                            field += '"';
                            ++i;
                            continue;
                        }
                        break;
                    }
                    if (c == '\n') ++line;
                    field += c;
                }
                if (i < text.size() && text[i] != delimiter && text[i] != '\n' && text[i] != '\r') {
                    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": text after closing quote");
                }
            } else {
                while (i < text.size() && text[i] != delimiter && text[i] != '\n' && text[i] != '\r') {
                    if (quoting && text[i] == '"') {
                        throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": stray quote in field");
                    }
                    field += text[i++];
                }
            }
            row.push_back(field_value(std::move(field), quoted, options.as_string.count(row.size())));
            if (i < text.size() && text[i] == delimiter) {
                ++i;
                continue;
            }
            if (i < text.size() && text[i] == '\r') ++i;
            if (i < text.size() && text[i] == '\n') ++i;
            ++line;
            end_of_row = true;
        }
        // Blank lines are skipped unless they stand for a Nil row.
        if (row.size() == 1 && row[0].is_nil() && !options.blank_is_nil) continue;
        if (first_row) {
            first_row = false;
            width = row.size();
            if (options.header) continue;
        } else if (row.size() != width) {
            throw Error(ErrorCode::Parse, "line " + std::to_string(row_line) + ": expected " + std::to_string(width) +
                                              " fields, found " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<Tuple> load_rows(const std::filesystem::path& path, const LoadOptions& options, FileFormat format) {
    std::string text = read_file(path);
    return parse_delimited(text, format == FileFormat::Tsv ? '\t' : ',', options);
}

std::size_t width_of(const std::vector<Tuple>& rows) { return rows.empty() ? 0 : rows.front().size(); }

}  // namespace

Relation load_edges(const std::filesystem::path& path, const std::string& name, const LoadOptions& options) {
    return load_relation(path, name, std::nullopt, options);
}

Relation load_triples(const std::filesystem::path& path, const std::string& name) {
    auto rows = load_rows(path, {}, FileFormat::Tsv);
    if (!rows.empty() && width_of(rows) != 3) {
        throw Error(ErrorCode::Parse, "triples need 3 columns, found " + std::to_string(width_of(rows)));
    }
    return Relation(name, RelationSchema{3, {}, false}, std::move(rows));
}

Relation load_labels(const std::filesystem::path& path, const std::string& name) {
    LoadOptions options;
    options.as_string = {1};
    auto rows = load_rows(path, options, FileFormat::Tsv);
    if (!rows.empty() && width_of(rows) != 2) {
        throw Error(ErrorCode::Parse, "labels need 2 columns, found " + std::to_string(width_of(rows)));
    }
    Relation rel(name, RelationSchema{1, {}, true}, std::move(rows));
    for (std::size_t i = 1; i < rel.size(); ++i) {
        if (rel.rows()[i][0] == rel.rows()[i - 1][0]) {
            throw Error(ErrorCode::FunctionalValueConflict, name + "(" + literal(rel.rows()[i][0]) + ") has labels " +
                                                                literal(rel.rows()[i - 1][1]) + " and " +
                                                                literal(rel.rows()[i][1]));
        }
    }
    return rel;
}

Relation load_relation(const std::filesystem::path& path, const std::string& name,
                       const std::optional<RelationSchema>& schema, const LoadOptions& options) {
    FileFormat format = options.format.value_or(format_for(path));
    if (format == FileFormat::Json) {
        Relation rel = parse_json_relation(read_file(path), name);
        if (schema && rel.arity() != schema->arity()) {
            throw Error(ErrorCode::ArityMismatch, path.string() + " has " + std::to_string(rel.arity()) +
                                                      " columns, " + name + " needs " +
                                                      std::to_string(schema->arity()));
        }
        return schema ? Relation(name, *schema, rel.rows()) : rel;
    }
    LoadOptions effective = options;
    if (schema && schema->arity() == 1) effective.blank_is_nil = true;
    auto rows = load_rows(path, effective, format);
    if (schema) {
        if (!rows.empty() && width_of(rows) != schema->arity()) {
            throw Error(ErrorCode::ArityMismatch, path.string() + " has " + std::to_string(width_of(rows)) +
                                                      " columns, " + name + " needs " +
                                                      std::to_string(schema->arity()));
        }
        return Relation(name, *schema, std::move(rows));
    }
    std::size_t width = width_of(rows);
    return Relation(name, RelationSchema{width, {}, false}, std::move(rows));
}

std::string format_csv(const Relation& relation) {
    std::string out;
    for (const auto& row : relation.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_field(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string format_tsv(const Relation& relation) {
    std::string out;
    for (const auto& row : relation.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string s = row[i].is_nil() ? "" : row[i].is_float() ? literal(row[i]) : display(row[i]);
            if (s.find_first_of("\t\r\n") != std::string::npos) {
                throw Error(ErrorCode::Io, "TSV field of " + relation.name() + " contains a tab or newline");
            }
            if (i) out += '\t';
            out += s;
        }
        out += '\n';
    }
    return out;
}

std::string format_json(const Relation& relation) {
    nlohmann::ordered_json doc;
    doc["columns"] = relation.schema().column_names();
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : relation.rows()) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& v : row) r.push_back(to_json(v));
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

Relation parse_json_relation(std::string_view text, const std::string& name) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("columns") || !doc.contains("rows")) {
        throw Error(ErrorCode::Parse, "JSON relation needs \"columns\" and \"rows\"");
    }
    RelationSchema schema;
    for (const auto& c : doc["columns"]) {
        std::string col = c.get<std::string>();
        if (schema.functional) throw Error(ErrorCode::Parse, "logica_value must be the last column");
        if (col == "logica_value") {
            schema.functional = true;
        } else if (!col.empty() && col[0] == '$') {
            if (!schema.attributes.empty()) throw Error(ErrorCode::Parse, "positional columns must come first");
            ++schema.positional;
        } else {
            schema.attributes.push_back(col);
        }
    }
    std::vector<Tuple> rows;
    for (const auto& r : doc["rows"]) {
        if (!r.is_array()) throw Error(ErrorCode::Parse, "each JSON row must be an array");
        Tuple t;
        for (const auto& v : r) t.push_back(from_json(v));
        if (t.size() != schema.arity()) {
            throw Error(ErrorCode::Parse, "JSON row has " + std::to_string(t.size()) + " values, expected " +
                                              std::to_string(schema.arity()));
        }
        rows.push_back(std::move(t));
    }
    return Relation(name, schema, std::move(rows));
}

void export_relation(const Relation& relation, const std::filesystem::path& path, FileFormat format) {
    switch (format) {
        case FileFormat::Csv: write_file(path, format_csv(relation)); break;
        case FileFormat::Tsv: write_file(path, format_tsv(relation)); break;
        case FileFormat::Json: write_file(path, format_json(relation)); break;
    }
}

}  // namespace gtlog
