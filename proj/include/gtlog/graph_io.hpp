#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "gtlog/relation.hpp"

namespace gtlog {

enum class FileFormat { Csv, Tsv, Json };

/// Picks a format from the extension; anything unknown reads as CSV.
FileFormat format_for(const std::filesystem::path& path);

struct LoadOptions {
    std::optional<FileFormat> format;
    bool header = false;
    /// Zero-based columns kept as strings even when they look numeric.
    std::set<std::size_t> as_string;
    /// Reads a blank line as a one-column Nil row instead of skipping it.
    bool blank_is_nil = false;
};

/// Parses delimited text. Unquoted fields become Int, Float, Bool (`true`,
/// `false`) or Nil (empty) when they read as such, Str otherwise; quoted CSV
/// fields are always Str. Every row must have the same number of fields.
std::vector<Tuple> parse_delimited(std::string_view text, char delimiter, const LoadOptions& options = {});

/// Loads an all-positional relation; arity comes from the file.
Relation load_edges(const std::filesystem::path& path, const std::string& name = "E", const LoadOptions& options = {});

/// Subject / predicate / object TSV.
Relation load_triples(const std::filesystem::path& path, const std::string& name = "T");

/// id -> label TSV, as a functional relation with one key column.
Relation load_labels(const std::filesystem::path& path, const std::string& name = "L");

/// Loads a relation and shapes it to `schema`; the file must have
/// exactly schema.arity() columns. JSON files carry their own schema.
Relation load_relation(const std::filesystem::path& path, const std::string& name,
                       const std::optional<RelationSchema>& schema = std::nullopt, const LoadOptions& options = {});

std::string format_csv(const Relation& relation);
std::string format_tsv(const Relation& relation);
/// {"columns": [...], "rows": [[...], ...]}
std::string format_json(const Relation& relation);
Relation parse_json_relation(std::string_view text, const std::string& name);

void export_relation(const Relation& relation, const std::filesystem::path& path, FileFormat format);

}  // namespace gtlog
