#include "gtlog/stdlib.hpp"

#include <algorithm>

#include "gtlog/builtins.hpp"
#include "gtlog/parser.hpp"

namespace gtlog::stdlib {

namespace {

EvalResult run(std::string_view program, const std::map<std::string, Relation>& data, const EvalConfig& config) {
    return evaluate(parse_program(program_text(program)), data, config);
}

EvalConfig unbounded() {
    EvalConfig c;
    c.depth_override = -1;
    return c;
}

std::set<Value> column_set(const Relation& rel, std::size_t col = 0) {
    std::set<Value> out;
    for (const auto& row : rel.rows()) out.insert(row[col]);
    return out;
}

std::set<Edge> edge_set(const Relation& rel) {
    std::set<Edge> out;
    for (const auto& row : rel.rows()) out.emplace(row[0], row[1]);
    return out;
}

Relation binary(const Relation& e, const char* what) {
    if (e.arity() != 2) {
        throw Error(ErrorCode::ArityMismatch,
                    std::string(what) + " expects a binary relation, got " + std::to_string(e.arity()) + " columns");
    }
    return Relation("E", RelationSchema{2, {}, false}, e.rows());
}

}  // namespace

std::string_view program_text(std::string_view name) {
    for (const auto& [n, text] : embedded_programs()) {
        if (n == name) return text;
    }
    throw Error(ErrorCode::UnknownPredicate, "no bundled program named " + std::string(name));
}

Relation edge_relation(const std::vector<Edge>& edges, const std::string& name) {
    std::vector<Tuple> rows;
    rows.reserve(edges.size());
    for (const auto& [a, b] : edges) rows.push_back({a, b});
    return Relation(name, RelationSchema{2, {}, false}, std::move(rows));
}

Relation unary_relation(const std::vector<Value>& values, const std::string& name) {
    std::vector<Tuple> rows;
    for (const auto& v : values) rows.push_back({v});
    return Relation(name, RelationSchema{1, {}, false}, std::move(rows));
}

Relation two_hop_extend(const Relation& e) {
    auto result = run("two_hop", {{"E", binary(e, "two_hop_extend")}}, {});
    return query(result, "E2");
}

MessagePassingResult message_passing(const Relation& e, const std::vector<Value>& start_nodes, std::int64_t max_iter) {
    EvalConfig config;
    config.depth_override = max_iter;
    config.record_history = true;
    auto result = run("message_passing",
                      {{"E", binary(e, "message_passing")}, {"M0", unary_relation(start_nodes, "M0")}}, config);
    MessagePassingResult out;
    const CliqueRun& clique = *result.clique_of("M");
    for (const auto& snap : clique.history) {
        const Relation* m = snap.find("M");
        out.trace.push_back(m ? column_set(*m) : std::set<Value>{});
    }
    out.final_messages = column_set(query(result, "M"));
    out.termination = clique.termination;
    out.iterations = clique.iterations;
    return out;
}

Relation shortest_distances(const Relation& e, const Value& start) {
    Relation s("Start", RelationSchema{0, {}, true}, {{start}});
    auto result = run("distances", {{"E", binary(e, "shortest_distances")}, {"Start", s}}, unbounded());
    return query(result, "D");
}

GameSolution solve_win_move(const Relation& move) {
    Relation m = binary(move, "solve_win_move").renamed("Move");
    auto result = run("win_move", {{"Move", m}}, unbounded());
    GameSolution out;
    out.won = column_set(query(result, "Won"));
    out.lost = column_set(query(result, "Lost"));
    out.drawn = column_set(query(result, "Drawn"));
    out.winning_moves = edge_set(query(result, "W"));
    return out;
}

std::vector<std::string> check_game_solution(const GameSolution& s, const Relation& move) {
    std::vector<std::string> problems;
    std::map<Value, std::vector<Value>> succ;
    std::set<Value> positions;
    for (const auto& row : move.rows()) {
        succ[row[0]].push_back(row[1]);
        positions.insert(row[0]);
        positions.insert(row[1]);
    }
    std::set<Value> all;
    for (const auto* part : {&s.won, &s.lost, &s.drawn}) {
        for (const auto& v : *part) {
            if (!all.insert(v).second) problems.push_back(display(v) + " is in two classes");
        }
    }
    if (all != positions) problems.push_back("classes do not cover exactly the positions");
    auto moves = [&](const Value& v) -> const std::vector<Value>& {
        static const std::vector<Value> none;
        auto it = succ.find(v);
        return it == succ.end() ? none : it->second;
    };
    for (const auto& v : s.lost) {
        for (const auto& w : moves(v)) {
            if (!s.won.count(w)) problems.push_back("lost " + display(v) + " can move to non-won " + display(w));
        }
    }
    for (const auto& v : s.won) {
        const auto& m = moves(v);
        if (std::none_of(m.begin(), m.end(), [&](const Value& w) { return s.lost.count(w) != 0; })) {
            problems.push_back("won " + display(v) + " has no move to a lost position");
        }
    }
    for (const auto& v : s.drawn) {
        const auto& m = moves(v);
        if (m.empty()) problems.push_back("drawn " + display(v) + " has no moves");
        if (std::none_of(m.begin(), m.end(), [&](const Value& w) { return s.drawn.count(w) != 0; })) {
            problems.push_back("drawn " + display(v) + " has no move to a drawn position");
        }
        if (std::any_of(m.begin(), m.end(), [&](const Value& w) { return s.lost.count(w) != 0; })) {
            problems.push_back("drawn " + display(v) + " can move to a lost position");
        }
    }
    return problems;
}

ArrivalMap earliest_arrival(const Relation& e, const Value& start) {
    if (e.arity() != 4) {
        throw Error(ErrorCode::ArityMismatch, "earliest_arrival expects (x, y, t0, t1) rows");
    }
    for (const auto& row : e.rows()) {
        if (compare_ordered(row[2], row[3]) > 0) {
            throw Error(ErrorCode::InvalidInterval, "edge " + display(row[0]) + " -> " + display(row[1]) +
                                                        " has t0 " + display(row[2]) + " after t1 " +
                                                        display(row[3]));
        }
    }
    Relation edges("E", RelationSchema{4, {}, false}, e.rows());
    Relation s("Start", RelationSchema{0, {}, true}, {{start}});
    auto result = run("arrival", {{"E", edges}, {"Start", s}}, unbounded());
    ArrivalMap out;
    for (const auto& row : query(result, "Arrival").rows()) out[row[0]] = to_int64(row[1]).as_int();
    return out;
}

Relation transitive_closure(const Relation& e) {
    auto result = run("transitive_closure", {{"E", binary(e, "transitive_closure")}}, unbounded());
    return query(result, "TC");
}

Relation transitive_reduction(const Relation& e) {
    auto result = run("transitive_reduction", {{"E", binary(e, "transitive_reduction")}}, unbounded());
    for (const auto& row : query(result, "TC").rows()) {
        if (row[0] == row[1]) throw Error(ErrorCode::NotADag, "graph has a cycle through " + display(row[0]));
    }
    return query(result, "TR");
}

Condensation condense(const Relation& e, const Relation& node) {
    if (node.arity() != 1) throw Error(ErrorCode::ArityMismatch, "condense expects a unary Node relation");
    Relation n("Node", RelationSchema{1, {}, false}, node.rows());
    auto result = run("condensation", {{"E", binary(e, "condense")}, {"Node", n}}, unbounded());
    Condensation out;
    for (const auto& row : query(result, "CC").rows()) out.representative[row[0]] = row[1];
    out.edges = edge_set(query(result, "ECC"));
    return out;
}

TaxonomyResult extract_taxonomy(const Relation& t, const Relation& l, const std::vector<Value>& items_of_interest,
                                std::int64_t depth) {
    if (t.arity() != 3) throw Error(ErrorCode::ArityMismatch, "extract_taxonomy expects a ternary triple relation");
    if (l.arity() != 2) throw Error(ErrorCode::ArityMismatch, "extract_taxonomy expects an id -> label relation");
    EvalConfig config;
    config.depth_override = depth;
    config.record_history = true;
    std::map<std::string, Relation> data{
        {"T", Relation("T", RelationSchema{3, {}, false}, t.rows())},
        {"L", Relation("L", RelationSchema{1, {}, true}, l.rows())},
        {"ItemOfInterest", unary_relation(items_of_interest, "ItemOfInterest")},
    };
    auto result = run("taxonomy", data, config);
    const CliqueRun& clique = *result.clique_of("E");
    TaxonomyResult out;
    out.edges = query(result, "E");
    out.termination = clique.termination;
    out.iterations = clique.iterations;
    for (std::size_t k = 1; k < clique.history.size(); ++k) {
        const Relation* n = clique.history[k].find("NumRoots");
        if (n && !n->empty()) {
            out.num_roots.push_back(n->rows().front().back().as_int());
        } else {
            out.num_roots.push_back(std::nullopt);
        }
    }
    return out;
}

}  // namespace gtlog::stdlib
