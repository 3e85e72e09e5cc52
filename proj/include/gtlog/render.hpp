#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtlog/relation.hpp"

namespace gtlog {

struct RenderEdge {
    std::string source;
    std::string target;
    std::string arrows = "to";
    std::string color = "#888";
    bool dashes = false;
    double width = 1;
    bool physics = true;
    bool smooth = false;

    bool operator==(const RenderEdge&) const = default;
};

struct RenderColumns {
    /// Unset means "color" / "width" when the relation has such a column.
    std::optional<std::string> color_column;
    std::optional<std::string> width_column;
};

/// First two columns are the endpoints; attributes are read from named
/// columns. Throws MissingColumn for an explicitly mapped absent column.
std::vector<RenderEdge> to_render_edges(const Relation& relation, const RenderColumns& columns = {});

/// Attribute lists per node id, written as `key=value` pairs.
using NodeStyles = std::map<std::string, std::map<std::string, std::string>>;

std::string to_dot(std::vector<RenderEdge> edges, const NodeStyles& node_styles = {});
std::string to_json_graph(std::vector<RenderEdge> edges);

}  // namespace gtlog
