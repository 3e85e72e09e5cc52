#include <sys/resource.h>
#include <sys/wait.h>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "gtlog/engine.hpp"
#include "gtlog/parser.hpp"
#include "gtlog/stdlib.hpp"
#include "oracle/equivalence.hpp"
#include "oracle/graph_oracles.hpp"
#include "oracle/random_graphs.hpp"

using namespace gtlog;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

/// A criterion reports an empty string on success, otherwise what went wrong.
using Check = std::function<std::string()>;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path source_dir() { return GTLOG_SOURCE_DIR; }

std::string corpus(const std::string& name) { return read_file(source_dir() / "tests" / "corpus" / (name + ".gtl")); }

std::set<Value> column(const Relation& r, std::size_t c = 0) {
    std::set<Value> out;
    for (const auto& row : r.rows()) out.insert(row[c]);
    return out;
}

std::set<Value> ints(const std::set<std::int64_t>& xs) {
    std::set<Value> out;
    for (auto x : xs) out.insert(Value(x));
    return out;
}

std::string show(const std::set<Value>& xs) {
    std::string s = "{";
    for (const auto& x : xs) s += (s.size() > 1 ? ", " : "") + literal(x);
    return s + "}";
}

Relation nodes(std::size_t n) {
    std::vector<Tuple> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({static_cast<std::int64_t>(i)});
    return Relation("Node", RelationSchema{1, {}, false}, std::move(rows));
}

Relation start_at(std::int64_t s) { return Relation("Start", RelationSchema{0, {}, true}, {{Value(s)}}); }

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Timed {
    EvalResult result;
    double seconds = 0;
};

/// Evaluates corpus texts joined in order, exactly as written.
Timed run_verbatim(const std::vector<std::string>& texts, const std::map<std::string, Relation>& data) {
    std::string joined;
    for (const auto& t : texts) joined += t + "\n";
    auto t0 = Clock::now();
    EvalResult r = evaluate(parse_program(joined), data);
    return {std::move(r), seconds_since(t0)};
}

// Corpus fidelity: every corpus program runs unmodified and agrees with the
// stdlib wrapper relation for relation, in under a second per fixture.
std::string corpus_fidelity() {
    const std::string tc = std::string(stdlib::program_text("transitive_closure"));
    std::string problems;
    auto note = [&](const std::string& what) {
        if (problems.size() < 600) problems += (problems.empty() ? "" : "; ") + what;
    };
    double slowest = 0;
    std::string slowest_name;
    auto timed = [&](const std::string& name, const Timed& t) {
        if (t.seconds > slowest) {
            slowest = t.seconds;
            slowest_name = name;
        }
    };
    oracle::Rng rng(1001);
    for (int trial = 0; trial < 20; ++trial) {
        // The last fixture of each kind has 50 nodes.
        std::size_t n = trial == 19 ? 50 : 2 + trial % 11;
        double p = trial == 19 ? 0.05 : 0.3;
        auto g = oracle::to_relation(oracle::random_digraph(rng, n, p));
        auto dag = oracle::to_relation(oracle::random_dag(rng, n, p));
        auto tag = " (fixture " + std::to_string(trial) + ")";

        auto two_hop = run_verbatim({corpus("two_hop")}, {{"E", g}});
        timed("two_hop", two_hop);
        if (query(two_hop.result, "E2") != stdlib::two_hop_extend(g)) note("two_hop E2 differs" + tag);

        // The corpus text carries its own start fact M0(0).
        auto mp = run_verbatim({corpus("message_passing")}, {{"E", g}});
        timed("message_passing", mp);
        auto wrapped = stdlib::message_passing(g, {Value(0)});
        if (column(query(mp.result, "M")) != wrapped.final_messages) note("message_passing M differs" + tag);
        if (mp.result.clique_of("M")->termination != wrapped.termination) note("message_passing termination" + tag);

        auto dist = run_verbatim({corpus("distances")}, {{"E", g}, {"Start", start_at(0)}});
        timed("distances", dist);
        if (query(dist.result, "D") != stdlib::shortest_distances(g, 0)) note("distances D differs" + tag);

        Relation move = g.renamed("Move");
        auto game = run_verbatim({corpus("win_move")}, {{"Move", move}});
        timed("win_move", game);
        stdlib::GameSolution s = stdlib::solve_win_move(move);
        std::set<stdlib::Edge> w;
        for (const auto& row : query(game.result, "W").rows()) w.emplace(row[0], row[1]);
        if (w != s.winning_moves) note("win_move W differs" + tag);
        if (column(query(game.result, "Won")) != s.won) note("win_move Won differs" + tag);
        if (column(query(game.result, "Lost")) != s.lost) {
            note("win_move Lost differs" + tag + ": program " + show(column(query(game.result, "Lost"))) +
                 " wrapper " + show(s.lost) + " (the rules only mark lost the targets of winning moves)");
        }
        if (column(query(game.result, "Drawn")) != s.drawn) note("win_move Drawn differs" + tag);

        auto temporal = oracle::to_relation(oracle::random_temporal(rng, n, n * 2, 10));
        auto arrival = run_verbatim({corpus("arrival")}, {{"E", temporal}, {"Start", start_at(0)}});
        timed("arrival", arrival);
        stdlib::ArrivalMap direct;
        for (const auto& row : query(arrival.result, "Arrival").rows()) direct[row[0]] = row[1].as_int();
        if (direct != stdlib::earliest_arrival(temporal, 0)) note("arrival differs" + tag);

        auto tr = run_verbatim({corpus("transitive_reduction")}, {{"E", dag}});
        timed("transitive_reduction", tr);
        if (query(tr.result, "TR") != stdlib::transitive_reduction(dag)) note("TR differs" + tag);
        if (query(tr.result, "TC") != stdlib::transitive_closure(dag)) note("TC differs" + tag);

        // Render attributes read TR, so they run after the reduction program.
        auto render = run_verbatim({corpus("transitive_reduction"), corpus("render_attributes")}, {{"E", dag}});
        timed("render_attributes", render);
        auto bundled = evaluate(parse_program(stdlib::program_text("render_reduction")), {{"E", dag}});
        if (query(render.result, "R") != query(bundled, "R")) note("render_attributes R differs" + tag);

        // Condensation reads TC from the reduction program.
        Relation node = nodes(n);
        auto cond = run_verbatim({tc, corpus("condensation")}, {{"E", g}, {"Node", node}});
        timed("condensation", cond);
        stdlib::Condensation c = stdlib::condense(g, node);
        std::map<Value, Value> rep;
        for (const auto& row : query(cond.result, "CC").rows()) rep[row[0]] = row[1];
        std::set<stdlib::Edge> ecc;
        for (const auto& row : query(cond.result, "ECC").rows()) ecc.emplace(row[0], row[1]);
        if (rep != c.representative || ecc != c.edges) note("condensation differs" + tag);

        auto cond_render =
            run_verbatim({tc, corpus("condensation"), corpus("condensation_render")}, {{"E", g}, {"Node", node}});
        timed("condensation_render", cond_render);
        auto bundled_render =
            evaluate(parse_program(stdlib::program_text("condensation_render")), {{"E", g}, {"Node", node}});
        if (query(cond_render.result, "Render") != query(bundled_render, "Render")) {
            note("condensation_render differs" + tag);
        }
    }

    // Taxonomy: SuperTaxon and TaxonLabel are the data bindings the program expects.
    const std::string bindings = "SuperTaxon(item, parent) :- T(item, \"P171\", parent);\nTaxonLabel(x) = L(x);";
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = trial == 19 ? 50 : 2 + trial % 11;
        std::vector<Tuple> t, l;
        std::uniform_int_distribution<std::size_t> parent_of(0, n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t parent = parent_of(rng) % i;
            t.push_back({"Q" + std::to_string(i), "P171", "Q" + std::to_string(parent)});
        }
        for (std::size_t i = 0; i < n; ++i) l.push_back({"Q" + std::to_string(i), "label " + std::to_string(i)});
        Relation triples("T", RelationSchema{3, {}, false}, t);
        Relation labels("L", RelationSchema{1, {}, true}, l);
        std::vector<Value> interest{Value("Q" + std::to_string(n - 1))};
        if (n > 3) interest.push_back(Value("Q" + std::to_string(n - 2)));
        std::vector<Tuple> interest_rows;
        for (const auto& v : interest) interest_rows.push_back({v});
        Relation items("ItemOfInterest", RelationSchema{1, {}, false}, interest_rows);
        auto tax = run_verbatim({corpus("taxonomy"), bindings}, {{"T", triples}, {"L", labels}, {"ItemOfInterest", items}});
        timed("taxonomy", tax);
        auto wrapped = stdlib::extract_taxonomy(triples, labels, interest);
        if (query(tax.result, "E") != wrapped.edges) note("taxonomy E differs (fixture " + std::to_string(trial) + ")");
    }

    if (slowest >= 1.0) note(slowest_name + " took " + std::to_string(slowest) + " s");
    return problems;
}

std::string win_move_oracle() {
    oracle::Rng rng(2002);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + trial % 10;
        auto e = oracle::random_digraph(rng, n, 0.3);
        Relation move = oracle::to_relation(e, "Move");
        auto s = stdlib::solve_win_move(move);
        auto expected = oracle::solve_game(e);
        if (s.won != ints(expected.won) || s.lost != ints(expected.lost) || s.drawn != ints(expected.drawn)) {
            return "instance " + std::to_string(trial) + ": won " + show(s.won) + " lost " + show(s.lost) +
                   " drawn " + show(s.drawn) + ", oracle won " + show(ints(expected.won)) + " lost " +
                   show(ints(expected.lost)) + " drawn " + show(ints(expected.drawn));
        }
        auto problems = stdlib::check_game_solution(s, move);
        if (!problems.empty()) return "instance " + std::to_string(trial) + ": " + problems.front();
    }
    return "";
}

std::string transitive_reduction_oracle() {
    oracle::Rng rng(3003);
    for (int trial = 0; trial < 100; ++trial) {
        auto e = oracle::random_dag(rng, 1 + trial % 12, 0.35);
        auto tr = oracle::to_edge_set(stdlib::transitive_reduction(oracle::to_relation(e)));
        if (oracle::closure(tr) != oracle::to_edge_set(stdlib::transitive_closure(oracle::to_relation(e)))) {
            return "instance " + std::to_string(trial) + ": closure of TR differs from TC";
        }
        if (!oracle::is_minimal_reduction(tr, e)) return "instance " + std::to_string(trial) + ": TR not minimal";
    }
    return "";
}

std::string arrival_oracle() {
    oracle::Rng rng(4004);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + trial % 8;
        auto e = oracle::random_temporal(rng, n, 1 + trial % 16, 10);
        stdlib::ArrivalMap want;
        for (auto [node, t] : oracle::earliest_arrival_exhaustive(e, 0)) want[Value(node)] = t;
        if (stdlib::earliest_arrival(oracle::to_relation(e), 0) != want) {
            return "instance " + std::to_string(trial) + " differs from path enumeration";
        }
    }
    return "";
}

std::string condensation_oracle() {
    oracle::Rng rng(5005);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + trial % 12;
        auto e = oracle::random_digraph(rng, n, 0.2);
        std::set<std::int64_t> all;
        for (std::size_t i = 0; i < n; ++i) all.insert(static_cast<std::int64_t>(i));
        auto c = stdlib::condense(oracle::to_relation(e), nodes(n));
        auto expected = oracle::component_representatives(e, all);
        std::map<Value, Value> want;
        for (auto [node, rep] : expected) want[Value(node)] = Value(rep);
        if (c.representative != want) return "instance " + std::to_string(trial) + ": representatives differ";
        oracle::EdgeSet ecc;
        for (const auto& [a, b] : c.edges) ecc.emplace(a.as_int(), b.as_int());
        if (!oracle::is_acyclic(ecc)) return "instance " + std::to_string(trial) + ": ECC has a cycle";
    }
    return "";
}

std::string message_passing_fixtures() {
    std::vector<stdlib::Edge> path;
    for (int i = 0; i < 9; ++i) path.emplace_back(Value(i), Value(i + 1));
    auto run = stdlib::message_passing(stdlib::edge_relation(path), {Value(0)});
    if (run.final_messages != std::set<Value>{Value(9)} || run.termination != Termination::Fixpoint) {
        return "path: final " + show(run.final_messages) + " via " + std::string(to_string(run.termination));
    }
    auto cycle = stdlib::message_passing(stdlib::edge_relation({{Value(0), Value(1)}, {Value(1), Value(0)}}),
                                         {Value(0)});
    if (cycle.termination != Termination::Oscillation || cycle.iterations > 5) {
        return "2-cycle: " + std::string(to_string(cycle.termination)) + " after " +
               std::to_string(cycle.iterations) + " iterations";
    }
    return "";
}

std::string declarative_equivalence() {
    std::mt19937_64 rng(20240601);
    const char* names[] = {"two_hop",   "message_passing",       "distances",         "win_move",
                           "arrival",   "transitive_reduction",  "render_attributes", "condensation",
                           "condensation_render", "taxonomy"};
    std::size_t compared = 0;
    for (const char* name : names) {
        auto report = oracle::check_equivalence(corpus(name), rng, 50);
        if (!report.mismatch.empty()) return std::string(name) + " " + report.mismatch;
        compared += report.compared;
    }
    return compared > 0 ? "" : "nothing compared";
}

struct Child {
    int status = -1;
    std::string out;
};

Child run_cli(const std::string& args) {
    std::string cmd = "cd '" + source_dir().string() + "' && '" + GTLOG_CLI + "' " + args;
    Child c;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return c;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) c.out.append(buf, n);
    int status = ::pclose(pipe);
    c.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return c;
}

std::string scaled_benchmark() {
    auto t0 = Clock::now();
    Child c = run_cli("bench --triples 1000000 --branching 3 --interest 4 --seed 1");
    double wall = seconds_since(t0);
    rusage usage{};
    ::getrusage(RUSAGE_CHILDREN, &usage);
    double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
    std::string line = c.out.substr(0, c.out.find('\n'));
    std::string detail = line + " wall_s=" + std::to_string(wall) + " peak_rss_mb=" + std::to_string(peak_mb);
    if (c.status != 0) return "bench exited " + std::to_string(c.status);
    bool stopped = line.find("termination=StopPredicate") != std::string::npos ||
                   line.find("termination=Fixpoint") != std::string::npos;
    if (!stopped) return "unexpected termination: " + detail;
    if (wall >= 30.0) return "too slow: " + detail;
    if (peak_mb >= 2048.0) return "too much memory: " + detail;
    std::cout << "  " << detail << '\n';
    return "";
}

std::string render_goldens() {
    const std::pair<const char*, std::string> cases[] = {
        {"tr_render.dot", "render programs/render_reduction.gtl --rel E=tests/fixtures/tr_graph.csv --pred R --format dot"},
        {"condensation_render.json",
         "render programs/condensation_render.gtl --rel E=tests/fixtures/condensation_edges.csv "
         "--rel Node=tests/fixtures/condensation_nodes.csv --pred Render --format json"},
    };
    for (const auto& [golden, args] : cases) {
        std::string expected = read_file(source_dir() / "tests" / "golden" / golden);
        if (expected.empty()) return std::string(golden) + " is missing";
        for (int run = 0; run < 3; ++run) {
            Child c = run_cli(args);
            if (c.status != 0) return std::string(golden) + ": render exited " + std::to_string(c.status);
            if (c.out != expected) return std::string(golden) + ": run " + std::to_string(run) + " differs";
        }
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::set<int> known;
    app.add_option("--known-failure", known, "Criterion expected to fail; listed in the decisions ledger");
    CLI11_PARSE(app, argc, argv);

    const std::pair<const char*, Check> criteria[] = {
        {"corpus fidelity", corpus_fidelity},
        {"win-move oracle equivalence", win_move_oracle},
        {"transitive reduction minimality", transitive_reduction_oracle},
        {"earliest arrival oracle", arrival_oracle},
        {"condensation oracle", condensation_oracle},
        {"message passing fixtures", message_passing_fixtures},
        {"declarative equivalence", declarative_equivalence},
        {"scaled benchmark", scaled_benchmark},
        {"render goldens", render_goldens},
    };
    int failed = 0;
    int index = 0;
    bool surprise = false;
    for (const auto& [name, check] : criteria) {
        ++index;
        std::string problem;
        try {
            problem = check();
        } catch (const std::exception& e) {
            problem = std::string("exception: ") + e.what();
        }
        surprise = surprise || problem.empty() == (known.count(index) != 0);
        if (problem.empty()) {
            std::cout << "PASS " << index << " " << name << '\n';
        } else {
            ++failed;
            std::cout << "FAIL " << index << " " << name << ": " << problem << '\n';
        }
        std::cout.flush();
    }
    std::cout << (9 - failed) << "/9 criteria passed\n";
    return surprise ? 1 : 0;
}
