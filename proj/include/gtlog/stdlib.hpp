#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gtlog/engine.hpp"
#include "gtlog/relation.hpp"

namespace gtlog::stdlib {

/// (name, text) for every bundled program, sorted by name.
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_programs();

/// Text of a bundled program; throws UnknownPredicate for unknown names.
std::string_view program_text(std::string_view name);

using Edge = std::pair<Value, Value>;

/// Binary relation named `name` from a list of edges.
Relation edge_relation(const std::vector<Edge>& edges, const std::string& name = "E");
Relation unary_relation(const std::vector<Value>& values, const std::string& name);

Relation two_hop_extend(const Relation& e);

struct MessagePassingResult {
    std::set<Value> final_messages;
    /// M after each iteration, starting with the empty iteration 0.
    std::vector<std::set<Value>> trace;
    Termination termination = Termination::Fixpoint;
    std::size_t iterations = 0;
};

MessagePassingResult message_passing(const Relation& e, const std::vector<Value>& start_nodes,
                                     std::int64_t max_iter = 32);

/// Functional relation D: node -> hop count from `start`.
Relation shortest_distances(const Relation& e, const Value& start);

struct GameSolution {
    std::set<Value> won;
    std::set<Value> lost;
    std::set<Value> drawn;
    std::set<Edge> winning_moves;
};

GameSolution solve_win_move(const Relation& move);

/// Problems with a GameSolution; empty when every invariant holds.
std::vector<std::string> check_game_solution(const GameSolution& solution, const Relation& move);

using ArrivalMap = std::map<Value, std::int64_t>;

/// `e` holds (x, y, t0, t1) rows. Throws InvalidInterval when t0 > t1.
ArrivalMap earliest_arrival(const Relation& e, const Value& start);

Relation transitive_closure(const Relation& e);
/// Throws NotADag on cyclic input.
Relation transitive_reduction(const Relation& e);

struct Condensation {
    std::map<Value, Value> representative;
    std::set<Edge> edges;
};

Condensation condense(const Relation& e, const Relation& node);

struct TaxonomyResult {
    /// E(parent, child, parent label, child label).
    Relation edges{"E", RelationSchema{4, {}, false}};
    Termination termination = Termination::Fixpoint;
    std::size_t iterations = 0;
    /// NumRoots() after each iteration; nullopt while it has no row.
    std::vector<std::optional<std::int64_t>> num_roots;
};

TaxonomyResult extract_taxonomy(const Relation& t, const Relation& l, const std::vector<Value>& items_of_interest,
                                std::int64_t depth = -1);

}  // namespace gtlog::stdlib
