#include "gtlog/render.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "gtlog/error.hpp"

namespace gtlog {

namespace {

std::optional<std::size_t> column(const Relation& rel, const std::string& name) {
    auto names = rel.schema().column_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

std::optional<std::size_t> resolve(const Relation& rel, const std::optional<std::string>& mapped,
                                   const std::string& fallback) {
    if (!mapped) return column(rel, fallback);
    auto c = column(rel, *mapped);
    if (!c) throw Error(ErrorCode::MissingColumn, rel.name() + " has no column '" + *mapped + "'");
    return c;
}

bool as_bool(const Value& v, const std::string& what) {
    if (v.is_bool()) return v.as_bool();
    if (v.is_int()) return v.as_int() != 0;
    throw Error(ErrorCode::RuntimeType, what + " must be a boolean, got " + literal(v));
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string dot_dir(const std::string& arrows) {
    bool to = arrows.find("to") != std::string::npos;
    bool from = arrows.find("from") != std::string::npos;
    if (to && from) return "both";
    if (to) return "forward";
    if (from) return "back";
    return "none";
}

std::string number(double d) { return format_float(d); }

void sort_and_check(std::vector<RenderEdge>& edges) {
    std::sort(edges.begin(), edges.end(), [](const RenderEdge& a, const RenderEdge& b) {
        return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });
    std::vector<RenderEdge> unique;
    for (auto& e : edges) {
        if (!unique.empty() && unique.back().source == e.source && unique.back().target == e.target) {
            if (unique.back() == e) continue;
            throw Error(ErrorCode::FunctionalValueConflict,
                        "edge " + e.source + " -> " + e.target + " appears twice with different attributes");
        }
        unique.push_back(std::move(e));
    }
    edges = std::move(unique);
}

}  // namespace

std::vector<RenderEdge> to_render_edges(const Relation& relation, const RenderColumns& columns) {
    if (relation.schema().positional < 2) {
        throw Error(ErrorCode::MissingColumn, relation.name() + " needs two endpoint columns");
    }
    auto color = resolve(relation, columns.color_column, "color");
    auto width = resolve(relation, columns.width_column, "width");
    auto arrows = column(relation, "arrows");
    auto dashes = column(relation, "dashes");
    auto physics = column(relation, "physics");
    auto smooth = column(relation, "smooth");
    std::vector<RenderEdge> out;
    out.reserve(relation.size());
    for (const auto& row : relation.rows()) {
        RenderEdge e;
        e.source = display(row[0]);
        e.target = display(row[1]);
        if (arrows) e.arrows = display(row[*arrows]);
        if (color) e.color = display(row[*color]);
        if (dashes) e.dashes = as_bool(row[*dashes], "dashes");
        if (width) {
            const Value& w = row[*width];
            if (!w.is_numeric()) throw Error(ErrorCode::RuntimeType, "width must be a number, got " + literal(w));
            e.width = w.as_number();
        }
        if (physics) e.physics = as_bool(row[*physics], "physics");
        if (smooth) e.smooth = as_bool(row[*smooth], "smooth");
        out.push_back(std::move(e));
    }
    return out;
}

std::string to_dot(std::vector<RenderEdge> edges, const NodeStyles& node_styles) {
    sort_and_check(edges);
    std::set<std::string> nodes;
    for (const auto& e : edges) {
        nodes.insert(e.source);
        nodes.insert(e.target);
    }
    for (const auto& [id, style] : node_styles) nodes.insert(id);
    std::string out = "digraph G {\n";
    for (const auto& n : nodes) {
        out += "  " + quote(n);
        if (auto it = node_styles.find(n); it != node_styles.end() && !it->second.empty()) {
            out += " [";
            bool first = true;
            for (const auto& [k, v] : it->second) {
                out += (first ? "" : ", ") + k + "=" + quote(v);
                first = false;
            }
            out += "]";
        }
        out += ";\n";
    }
    for (const auto& e : edges) {
        out += "  " + quote(e.source) + " -> " + quote(e.target) + " [color=" + quote(e.color) +
               ", penwidth=" + number(e.width) + ", dir=" + dot_dir(e.arrows);
        if (e.dashes) out += ", style=dashed";
        out += "]; // physics=" + std::string(e.physics ? "true" : "false") +
               " smooth=" + (e.smooth ? "true" : "false") + "\n";
    }
    out += "}\n";
    return out;
}

std::string to_json_graph(std::vector<RenderEdge> edges) {
    sort_and_check(edges);
    std::set<std::string> nodes;
    for (const auto& e : edges) {
        nodes.insert(e.source);
        nodes.insert(e.target);
    }
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : nodes) doc["nodes"].push_back({{"id", n}, {"label", n}});
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : edges) {
        nlohmann::ordered_json j;
        j["from"] = e.source;
        j["to"] = e.target;
        j["arrows"] = e.arrows;
        j["color"] = e.color;
        j["dashes"] = e.dashes;
        double whole = 0;
        if (std::modf(e.width, &whole) == 0.0 && std::abs(e.width) < 9e15) {
            j["width"] = static_cast<std::int64_t>(e.width);
        } else {
            j["width"] = e.width;
        }
        j["physics"] = e.physics;
        j["smooth"] = e.smooth;
        doc["edges"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

}  // namespace gtlog
