#include "oracle/graph_oracles.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace oracle {

namespace {

using Adjacency = std::map<std::int64_t, std::vector<std::int64_t>>;

Adjacency successors(const EdgeSet& e) {
    Adjacency out;
    for (const auto& [a, b] : e) out[a].push_back(b);
    return out;
}

std::set<std::int64_t> reachable_from(const Adjacency& adj, std::int64_t start) {
    std::set<std::int64_t> seen;
    std::vector<std::int64_t> stack;
    if (auto it = adj.find(start); it != adj.end()) stack = it->second;
    while (!stack.empty()) {
        std::int64_t v = stack.back();
        stack.pop_back();
        if (!seen.insert(v).second) continue;
        if (auto it = adj.find(v); it != adj.end()) stack.insert(stack.end(), it->second.begin(), it->second.end());
    }
    return seen;
}

}  // namespace

std::set<std::int64_t> nodes_of(const EdgeSet& e) {
    std::set<std::int64_t> out;
    for (const auto& [a, b] : e) {
        out.insert(a);
        out.insert(b);
    }
    return out;
}

GameOutcome solve_game(const EdgeSet& moves) {
    auto nodes = nodes_of(moves);
    Adjacency succ = successors(moves);
    Adjacency pred;
    std::map<std::int64_t, std::size_t> remaining;
    for (const auto& [a, b] : moves) {
        pred[b].push_back(a);
        ++remaining[a];
    }
    GameOutcome g;
    std::deque<std::int64_t> queue;
    for (auto n : nodes) {
        if (!remaining.count(n)) {
            g.lost.insert(n);
            queue.push_back(n);
        }
    }
    while (!queue.empty()) {
        std::int64_t v = queue.front();
        queue.pop_front();
        for (auto p : pred[v]) {
            if (g.won.count(p) || g.lost.count(p)) continue;
            if (g.lost.count(v)) {
                g.won.insert(p);
                queue.push_back(p);
            } else if (--remaining[p] == 0) {
                g.lost.insert(p);
                queue.push_back(p);
            }
        }
    }
    for (auto n : nodes) {
        if (!g.won.count(n) && !g.lost.count(n)) g.drawn.insert(n);
    }
    for (const auto& [a, b] : moves) {
        if (g.lost.count(b)) g.winning_moves.emplace(a, b);
    }
    return g;
}

std::map<std::int64_t, std::int64_t> earliest_arrival_exhaustive(const std::vector<TemporalEdge>& edges,
                                                                 std::int64_t start) {
    std::map<std::int64_t, std::int64_t> best{{start, 0}};
    std::set<std::int64_t> on_path{start};
    std::function<void(std::int64_t, std::int64_t)> walk = [&](std::int64_t at, std::int64_t time) {
        for (const auto& e : edges) {
            if (e.from != at || on_path.count(e.to) || time > e.t1) continue;
            std::int64_t t = std::max(time, e.t0);
            auto it = best.find(e.to);
            if (it == best.end() || t < it->second) best[e.to] = t;
            on_path.insert(e.to);
            walk(e.to, t);
            on_path.erase(e.to);
        }
    };
    walk(start, 0);
    return best;
}

EdgeSet closure(const EdgeSet& e) {
    Adjacency adj = successors(e);
    EdgeSet out;
    for (auto n : nodes_of(e)) {
        for (auto m : reachable_from(adj, n)) out.emplace(n, m);
    }
    return out;
}

bool is_minimal_reduction(const EdgeSet& tr, const EdgeSet& e) {
    if (!std::includes(e.begin(), e.end(), tr.begin(), tr.end())) return false;
    EdgeSet target = closure(e);
    if (closure(tr) != target) return false;
    for (const auto& edge : tr) {
        EdgeSet fewer = tr;
        fewer.erase(edge);
        if (closure(fewer) == target) return false;
    }
    return true;
}

std::map<std::int64_t, std::int64_t> component_representatives(const EdgeSet& e,
                                                               const std::set<std::int64_t>& nodes) {
    Adjacency fwd = successors(e);
    Adjacency rev;
    for (const auto& [a, b] : e) rev[b].push_back(a);
    std::set<std::int64_t> all = nodes;
    for (auto n : nodes_of(e)) all.insert(n);

    std::vector<std::int64_t> order;
    std::set<std::int64_t> seen;
    std::function<void(std::int64_t)> finish = [&](std::int64_t v) {
        if (!seen.insert(v).second) return;
        for (auto w : fwd[v]) finish(w);
        order.push_back(v);
    };
    for (auto n : all) finish(n);

    std::map<std::int64_t, std::int64_t> rep;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (rep.count(*it)) continue;
        std::vector<std::int64_t> members;
        std::vector<std::int64_t> stack{*it};
        while (!stack.empty()) {
            std::int64_t v = stack.back();
            stack.pop_back();
            if (rep.count(v)) continue;
            rep[v] = v;
            members.push_back(v);
            for (auto w : rev[v]) stack.push_back(w);
        }
        std::int64_t least = *std::min_element(members.begin(), members.end());
        for (auto m : members) rep[m] = least;
    }
    return rep;
}

bool is_acyclic(const EdgeSet& e) {
    for (const auto& [a, b] : closure(e)) {
        if (a == b) return false;
    }
    return true;
}

std::map<std::int64_t, std::int64_t> bfs_distances(const EdgeSet& e, std::int64_t start) {
    Adjacency adj = successors(e);
    std::map<std::int64_t, std::int64_t> dist{{start, 0}};
    std::deque<std::int64_t> queue{start};
    while (!queue.empty()) {
        std::int64_t v = queue.front();
        queue.pop_front();
        for (auto w : adj[v]) {
            if (dist.count(w)) continue;
            dist[w] = dist[v] + 1;
            queue.push_back(w);
        }
    }
    return dist;
}

MessageRun simulate_messages(const EdgeSet& e, const std::set<std::int64_t>& start, std::size_t max_steps) {
    Adjacency adj = successors(e);
    MessageRun run;
    run.states.push_back({});
    // Before step 1 the relation does not exist, which differs from every real state.
    std::optional<std::set<std::int64_t>> current;
    std::set<std::set<std::int64_t>> seen;
    for (std::size_t step = 1;; ++step) {
        std::set<std::int64_t> next;
        if (!current) {
            next = start;
        } else {
            for (auto v : *current) {
                auto it = adj.find(v);
                if (it == adj.end() || it->second.empty()) {
                    next.insert(v);
                } else {
                    next.insert(it->second.begin(), it->second.end());
                }
            }
        }
        run.states.push_back(next);
        if (current && next == *current) {
            run.termination = "Fixpoint";
        } else if (seen.count(next)) {
            run.termination = "Oscillation";
        } else if (step >= max_steps) {
            run.termination = "DepthCap";
        }
        if (!run.termination.empty()) return run;
        seen.insert(next);
        current = next;
    }
}

TaxonomyRun simulate_taxonomy(const std::set<std::pair<std::string, std::string>>& super_taxon,
                              const std::set<std::string>& interest) {
    TaxonomyRun run;
    std::optional<std::set<std::pair<std::string, std::string>>> current;
    while (true) {
        std::set<std::string> frontier = interest;
        if (current) {
            for (const auto& [parent, child] : *current) frontier.insert(parent);
        }
        std::set<std::pair<std::string, std::string>> next;
        for (const auto& [item, parent] : super_taxon) {
            if (frontier.count(item)) next.emplace(parent, item);
        }
        std::set<std::string> children;
        for (const auto& [parent, child] : next) children.insert(child);
        std::int64_t roots = 0;
        for (const auto& [parent, child] : next) {
            if (!children.count(parent)) ++roots;
        }
        run.num_roots.push_back(roots > 0 ? std::optional<std::int64_t>(roots) : std::nullopt);
        run.edges = next;
        if (current && next == *current) {
            run.termination = "Fixpoint";
            return run;
        }
        if (roots == 1) {
            run.termination = "StopPredicate";
            return run;
        }
        current = next;
    }
}

}  // namespace oracle
