#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gtlog/engine.hpp"
#include "gtlog/parser.hpp"
#include "oracle/graph_oracles.hpp"
#include "oracle/random_graphs.hpp"
#include "support/test_support.hpp"

using namespace gtlog;
using testing_support::corpus;
using testing_support::corpus_names;
using testing_support::rel;
using testing_support::rows_of;

namespace {

EvalResult run(const std::string& text, std::map<std::string, Relation> data, EvalConfig config = {}) {
    return evaluate(parse_program(text), data, config);
}

std::set<Value> column(const Relation& r, std::size_t c = 0) {
    std::set<Value> out;
    for (const auto& row : r.rows()) out.insert(row[c]);
    return out;
}

std::set<Value> ints(std::initializer_list<int> xs) {
    std::set<Value> out;
    for (int x : xs) out.insert(Value(x));
    return out;
}

Relation path(int n) {
    std::vector<Tuple> rows;
    for (int i = 0; i + 1 < n; ++i) rows.push_back({Value(i), Value(i + 1)});
    return Relation("E", RelationSchema{2, {}, false}, rows);
}

Relation start(const Value& v) { return Relation("Start", RelationSchema{0, {}, true}, {{v}}); }

/// Predicates read by a plan, through every Scan node.
void scanned(const PlanNode& n, std::set<std::string>& out) {
    std::visit(
        [&](const auto& node) {
            using N = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<N, ScanNode>) {
                out.insert(node.predicate);
            } else if constexpr (std::is_same_v<N, JoinNode> || std::is_same_v<N, AntiJoinNode>) {
                scanned(*node.left, out);
                scanned(*node.right, out);
            } else if constexpr (std::is_same_v<N, UnionAllNode>) {
                for (const auto& b : node.branches) scanned(*b, out);
            } else if constexpr (std::is_same_v<N, UnitNode> || std::is_same_v<N, SeedNode>) {
            } else {
                scanned(*node.input, out);
            }
        },
        n.node);
}

}  // namespace

TEST(Engine, TwoHop) {
    auto r = run(corpus("two_hop"), {{"E", rel("E", 2, {{1, 2}, {2, 3}})}});
    EXPECT_EQ(rows_of(query(r, "E2")), (std::set<Tuple>{{1, 2}, {2, 3}, {1, 3}}));
}

TEST(Engine, Distances) {
    auto r = run(corpus("distances"), {{"E", rel("E", 2, {{"a", "b"}, {"b", "c"}, {"a", "c"}})}, {"Start", start("a")}});
    EXPECT_EQ(rows_of(query(r, "D")), (std::set<Tuple>{{"a", 0}, {"b", 1}, {"c", 1}}));
    EXPECT_EQ(r.clique_of("D")->termination, Termination::Fixpoint);
}

TEST(Engine, WinMoveSingleMove) {
    auto r = run(corpus("win_move"), {{"Move", rel("Move", 2, {{"a", "b"}})}});
    EXPECT_EQ(column(query(r, "Won")), std::set<Value>{Value("a")});
    EXPECT_EQ(column(query(r, "Lost")), std::set<Value>{Value("b")});
    EXPECT_TRUE(query(r, "Drawn").empty());
}

TEST(Engine, MessagePassingPath) {
    EvalConfig c;
    c.record_history = true;
    std::string program = corpus("message_passing");
    auto r = run(program, {{"E", path(3)}}, c);
    const CliqueRun& clique = *r.clique_of("M");
    EXPECT_EQ(clique.termination, Termination::Fixpoint);
    EXPECT_EQ(clique.mode, SemanticsMode::SnapshotIterate);
    ASSERT_EQ(clique.history.size(), 5u);
    EXPECT_FALSE(clique.history[0].contains("M"));
    std::vector<std::set<Value>> expected{ints({0}), ints({1}), ints({2}), ints({2})};
    for (std::size_t k = 1; k < clique.history.size(); ++k) {
        EXPECT_EQ(column(*clique.history[k].find("M")), expected[k - 1]) << "iteration " << k;
    }
    EXPECT_EQ(column(query(r, "M")), ints({2}));
}

TEST(Engine, MessagePassingCycleOscillates) {
    auto r = run(corpus("message_passing"), {{"E", rel("E", 2, {{0, 1}, {1, 0}})}});
    const CliqueRun& clique = *r.clique_of("M");
    EXPECT_EQ(clique.termination, Termination::Oscillation);
    EXPECT_LE(clique.iterations, 5u);
}

TEST(Engine, MessagePassingMatchesStepOracle) {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        auto e = oracle::random_digraph(rng, 6, 0.25);
        EvalConfig c;
        c.record_history = true;
        c.depth_override = 12;
        auto r = run(corpus("message_passing"), {{"E", oracle::to_relation(e)}}, c);
        auto sim = oracle::simulate_messages(e, {0}, 12);
        const CliqueRun& clique = *r.clique_of("M");
        EXPECT_EQ(std::string(to_string(clique.termination)), sim.termination);
        ASSERT_EQ(clique.history.size(), sim.states.size());
        for (std::size_t k = 1; k < sim.states.size(); ++k) {
            std::set<Value> expected;
            for (auto v : sim.states[k]) expected.insert(Value(v));
            EXPECT_EQ(column(*clique.history[k].find("M")), expected);
        }
    }
}

TEST(Engine, NilCheckFiresOnlyAtIterationZero) {
    EvalConfig c;
    c.record_history = true;
    auto r = run(corpus("message_passing"), {{"E", rel("E", 2, {{0, 1}})}}, c);
    const auto& h = r.clique_of("M")->history;
    ASSERT_GE(h.size(), 3u);
    EXPECT_EQ(column(*h[1].find("M")), ints({0}));
    EXPECT_EQ(column(*h[2].find("M")), ints({1}));
}

TEST(Engine, TransitiveClosureOfPathConvergesFast) {
    auto r = run("TC(x,y) distinct :- E(x,y);\nTC(x,y) distinct :- TC(x,z), TC(z,y);", {{"E", path(10)}});
    const CliqueRun& c = *r.clique_of("TC");
    EXPECT_EQ(c.termination, Termination::Fixpoint);
    EXPECT_LE(c.iterations, static_cast<std::size_t>(std::ceil(std::log2(10.0))) + 2);
    EXPECT_EQ(query(r, "TC").size(), 45u);
}

TEST(Engine, MonotoneFixpointsMatchOracles) {
    oracle::Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 2 + trial % 7;
        auto e = oracle::random_digraph(rng, n, 0.3);
        auto tc = run("TC(x,y) distinct :- E(x,y);\nTC(x,y) distinct :- TC(x,z), TC(z,y);", {{"E", oracle::to_relation(e)}},
                      EvalConfig{.default_depth = -1});
        EXPECT_EQ(oracle::to_edge_set(query(tc, "TC")), oracle::closure(e));

        auto d = run(corpus("distances"), {{"E", oracle::to_relation(e)}, {"Start", start(0)}},
                     EvalConfig{.default_depth = -1});
        std::map<std::int64_t, std::int64_t> got;
        for (const auto& row : query(d, "D").rows()) got[row[0].as_int()] = row[1].as_int();
        EXPECT_EQ(got, oracle::bfs_distances(e, 0));
    }
}

TEST(Engine, SemiNaiveMatchesNaive) {
    oracle::Rng rng(9);
    const std::vector<std::string> programs{"transitive_reduction", "win_move", "two_hop"};
    for (int trial = 0; trial < 30; ++trial) {
        auto e = oracle::random_digraph(rng, 7, 0.3);
        for (const auto& name : programs) {
            SCOPED_TRACE(name);
            std::map<std::string, Relation> data{{"E", oracle::to_relation(e)}, {"Move", oracle::to_relation(e, "Move")}};
            Program p = parse_program(corpus(name));
            AnalyzeOptions opts{{}, true};
            CompiledProgram compiled = compile_program(p, opts);
            std::map<std::string, Relation> used;
            for (const auto& [k, v] : data) {
                if (compiled.analysis.signatures.count(k)) used.emplace(k, v);
            }
            EvalConfig fast;
            fast.default_depth = -1;
            EvalConfig slow = fast;
            slow.semi_naive = false;
            auto a = evaluate(compiled, used, fast);
            auto b = evaluate(compiled, used, slow);
            for (const auto& [pred, relp] : b.snapshot.relations()) EXPECT_EQ(*relp, query(a, pred)) << pred;
            ASSERT_EQ(a.cliques.size(), b.cliques.size());
            for (std::size_t i = 0; i < a.cliques.size(); ++i) {
                EXPECT_EQ(a.cliques[i].iterations, b.cliques[i].iterations);
                EXPECT_EQ(a.cliques[i].termination, b.cliques[i].termination);
            }
            if (name == "transitive_reduction") EXPECT_TRUE(a.cliques[0].semi_naive);
        }
    }
}

TEST(Engine, Deterministic) {
    oracle::Rng rng(3);
    auto e = oracle::to_relation(oracle::random_digraph(rng, 8, 0.3));
    for (const auto& name : {"message_passing", "transitive_reduction", "condensation"}) {
        std::map<std::string, Relation> data{{"E", e}};
        if (std::string(name) == "condensation") {
            data.emplace("Node", rel("Node", 1, {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}}));
            data.emplace("TC", query(run("TC(x,y) distinct :- E(x,y);\nTC(x,y) distinct :- TC(x,z), TC(z,y);",
                                         {{"E", e}}), "TC"));
        }
        auto a = run(corpus(name), data);
        auto b = run(corpus(name), data);
        ASSERT_EQ(a.snapshot.relations().size(), b.snapshot.relations().size());
        for (const auto& [pred, relp] : a.snapshot.relations()) EXPECT_EQ(*relp, query(b, pred));
        ASSERT_EQ(a.cliques.size(), b.cliques.size());
        for (std::size_t i = 0; i < a.cliques.size(); ++i) {
            EXPECT_EQ(a.cliques[i].iterations, b.cliques[i].iterations);
            EXPECT_EQ(a.cliques[i].termination, b.cliques[i].termination);
        }
    }
}

TEST(Engine, MinValuesNeverIncrease) {
    oracle::Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto temporal = oracle::random_temporal(rng, 7, 14, 10);
        EvalConfig c;
        c.record_history = true;
        c.default_depth = -1;
        auto r = run(corpus("arrival"), {{"E", oracle::to_relation(temporal)}, {"Start", start(0)}}, c);
        const auto& h = r.clique_of("Arrival")->history;
        std::map<Value, Value> last;
        for (std::size_t k = 1; k < h.size(); ++k) {
            for (const auto& row : h[k].find("Arrival")->rows()) {
                auto it = last.find(row[0]);
                if (it != last.end()) EXPECT_TRUE(compare_ordered(row[1], it->second) <= 0);
                last[row[0]] = row[1];
            }
        }
    }
}

TEST(Engine, StopPredicateEmptyBeforeFinalSnapshot) {
    // Two leaves of interest; NumRoots counts root edges, so it reaches 1 only once s is added.
    auto t = rel("SuperTaxon", 2, {{"a", "p"}, {"b", "q"}, {"p", "r"}, {"q", "r"}, {"r", "s"}});
    auto l = rel("TaxonLabel", 1, {{"a", "A"}, {"b", "B"}, {"p", "P"}, {"q", "Q"}, {"r", "R"}, {"s", "S"}}, true);
    auto i = rel("ItemOfInterest", 1, {{"a"}, {"b"}});
    EvalConfig c;
    c.record_history = true;
    auto r = run(corpus("taxonomy"), {{"SuperTaxon", t}, {"TaxonLabel", l}, {"ItemOfInterest", i}}, c);
    const CliqueRun& run_e = *r.clique_of("E");
    EXPECT_EQ(run_e.termination, Termination::StopPredicate);
    ASSERT_FALSE(run_e.history.empty());
    const Relation* final_stop = run_e.history.back().find("FoundCommonAncestor");
    ASSERT_TRUE(final_stop);
    EXPECT_FALSE(final_stop->empty());
    for (std::size_t k = 0; k + 1 < run_e.history.size(); ++k) {
        const Relation* s = run_e.history[k].find("FoundCommonAncestor");
        EXPECT_TRUE(!s || s->empty()) << "iteration " << k;
    }
    EXPECT_FALSE(query(r, "FoundCommonAncestor").empty());
    std::set<Tuple> pairs;
    for (const auto& row : query(r, "E").rows()) pairs.insert({row[0], row[1]});
    EXPECT_EQ(pairs, (std::set<Tuple>{{"p", "a"}, {"q", "b"}, {"r", "p"}, {"r", "q"}, {"s", "r"}}));
    EXPECT_EQ(run_e.iterations, 3u);
}

TEST(Engine, TaxonomyMatchesHandSimulation) {
    oracle::Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        // Random forest over 10 nodes: each node picks a parent with a larger id or none.
        std::set<std::pair<std::string, std::string>> super;
        std::vector<Tuple> st, labels;
        for (int v = 0; v < 10; ++v) {
            labels.push_back({Value("n" + std::to_string(v)), Value("N" + std::to_string(v))});
            std::uniform_int_distribution<int> pick(v + 1, 11);
            int p = pick(rng);
            if (p >= 10) continue;
            super.emplace("n" + std::to_string(v), "n" + std::to_string(p));
            st.push_back({Value("n" + std::to_string(v)), Value("n" + std::to_string(p))});
        }
        std::set<std::string> interest{"n0", "n" + std::to_string(1 + trial % 5)};
        std::vector<Tuple> items;
        for (const auto& s : interest) items.push_back({Value(s)});
        EvalConfig c;
        c.record_history = true;
        auto r = run(corpus("taxonomy"),
                     {{"SuperTaxon", Relation("SuperTaxon", RelationSchema{2, {}, false}, st)},
                      {"TaxonLabel", Relation("TaxonLabel", RelationSchema{1, {}, true}, labels)},
                      {"ItemOfInterest", Relation("ItemOfInterest", RelationSchema{1, {}, false}, items)}},
                     c);
        auto sim = oracle::simulate_taxonomy(super, interest);
        const CliqueRun& e_run = *r.clique_of("E");
        EXPECT_EQ(std::string(to_string(e_run.termination)), sim.termination);
        EXPECT_EQ(e_run.iterations, sim.num_roots.size());
        std::set<std::pair<std::string, std::string>> got;
        for (const auto& row : query(r, "E").rows()) got.emplace(row[0].as_str(), row[1].as_str());
        EXPECT_EQ(got, sim.edges);
    }
}

TEST(Engine, DefaultDepthCapsUndirectedCliques) {
    auto r = run(corpus("distances"), {{"E", path(40)}, {"Start", start(0)}});
    const CliqueRun& c = *r.clique_of("D");
    EXPECT_EQ(c.termination, Termination::DepthCap);
    EXPECT_EQ(c.iterations, 32u);
    EXPECT_EQ(query(r, "D").size(), 32u);
}

TEST(Engine, DepthOverrideWinsOverDirective) {
    std::string program = "@Recursive(D, 3);\n" + corpus("distances");
    auto capped = run(program, {{"E", path(10)}, {"Start", start(0)}});
    EXPECT_EQ(capped.clique_of("D")->iterations, 3u);
    EvalConfig c;
    c.depth_override = 8;
    auto over = run(program, {{"E", path(20)}, {"Start", start(0)}}, c);
    EXPECT_EQ(over.clique_of("D")->iterations, 8u);
    EXPECT_EQ(over.clique_of("D")->termination, Termination::DepthCap);
}

TEST(Engine, DepthZeroRunsNoSteps) {
    EvalConfig c;
    c.depth_override = 0;
    auto r = run(corpus("distances"), {{"E", path(5)}, {"Start", start(0)}}, c);
    EXPECT_EQ(r.clique_of("D")->iterations, 0u);
    EXPECT_EQ(r.clique_of("D")->termination, Termination::DepthCap);
    EXPECT_TRUE(query(r, "D").empty());
}

TEST(Engine, MaxIterationsIsABackstop) {
    EvalConfig c;
    c.default_depth = -1;
    c.max_iterations = 5;
    auto r = run(corpus("distances"), {{"E", path(40)}, {"Start", start(0)}}, c);
    EXPECT_EQ(r.clique_of("D")->iterations, 5u);
    EXPECT_EQ(r.clique_of("D")->termination, Termination::DepthCap);
}

TEST(Engine, TraceLines) {
    std::ostringstream trace;
    EvalConfig c;
    c.trace = &trace;
    run(corpus("distances"), {{"E", path(3)}, {"Start", start(0)}}, c);
    EXPECT_EQ(trace.str(), "iter=1 pred=D rows=1\niter=2 pred=D rows=2\niter=3 pred=D rows=3\niter=4 pred=D rows=3\n");
}

TEST(Engine, OscillationNeverReportedForMonotoneCliques) {
    oracle::Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        auto e = oracle::to_relation(oracle::random_digraph(rng, 6, 0.4));
        auto r = run(corpus("win_move"), {{"Move", e.renamed("Move")}});
        EXPECT_NE(r.clique_of("W")->termination, Termination::Oscillation);
    }
}

TEST(Engine, StrataReadOnlyFinishedPredicates) {
    for (const auto& name : corpus_names()) {
        SCOPED_TRACE(name);
        CompiledProgram c = compile_program(parse_program(corpus(name)), AnalyzeOptions{{}, true});
        const auto& plan = c.analysis.plan;
        for (const auto& [pred, p] : c.plans) {
            std::set<std::string> reads;
            scanned(*p, reads);
            std::size_t own = *plan.stratum_of(pred);
            for (const auto& r : reads) {
                std::size_t at = *plan.stratum_of(r);
                EXPECT_LE(at, own) << pred << " reads " << r;
                if (at == own && r != pred) EXPECT_TRUE(plan.clique_of_stratum(own)) << pred << " reads " << r;
            }
        }
    }
}

TEST(Engine, QueryUnknownPredicate) {
    auto r = run(corpus("two_hop"), {{"E", rel("E", 2, {{1, 2}})}});
    try {
        query(r, "Nope");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownPredicate);
    }
}

TEST(Engine, ArrivalHasKeyAndValueColumns) {
    auto r = run(corpus("arrival"), {{"E", rel("E", 4, {{"a", "b", 1, 5}})}, {"Start", start("a")}});
    const Relation& a = query(r, "Arrival");
    EXPECT_EQ(a.schema(), (RelationSchema{1, {}, true}));
    EXPECT_EQ(a.schema().column_names(), (std::vector<std::string>{"$0", "logica_value"}));
    EXPECT_EQ(rows_of(a), (std::set<Tuple>{{"a", 0}, {"b", 1}}));
}

TEST(Engine, LookupFunctional) {
    Relation d = rel("D", 1, {{"a", 0}, {"b", 1}}, true);
    Value key[] = {Value("a")};
    EXPECT_EQ(lookup_functional(d, key), Value(0));
    Value missing[] = {Value("z")};
    try {
        lookup_functional(d, missing);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::KeyAbsent);
    }
}

TEST(Engine, FunctionalValueConflict) {
    try {
        run("F(x) = y :- E(x, y);\nG(x) :- E(x, y), F(x) = y;", {{"E", rel("E", 2, {{1, 2}, {1, 3}})}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FunctionalValueConflict);
        EXPECT_NE(std::string(e.what()).find("F(1)"), std::string::npos) << e.what();
    }
}

TEST(Engine, RuntimeTypeErrorHasRuleSpan) {
    try {
        run("P(x) :- N(x);\nQ(y) :- N(x), y = x + \"a\";", {{"N", rel("N", 1, {{1}})}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_FALSE(is_program_error(e.code()));
        ASSERT_TRUE(e.where());
        EXPECT_EQ(e.where()->line, 2u);
    }
}

TEST(Engine, EmptyCliqueStillHasRelation) {
    auto r = run("P(x) :- N(x), P(x);", {{"N", rel("N", 1, {{1}})}});
    EXPECT_TRUE(query(r, "P").empty());
}

TEST(Engine, UnreferencedLoadedRelationsSurvive) {
    auto r = run(corpus("two_hop"), {{"E", rel("E", 2, {{1, 2}})}, {"Extra", rel("Extra", 1, {{7}})}});
    EXPECT_EQ(query(r, "Extra").size(), 1u);
}

TEST(Engine, WallTimeLimit) {
    EvalConfig c;
    c.max_wall_time = std::chrono::milliseconds(0);
    EXPECT_THROW(run(corpus("distances"), {{"E", path(40)}, {"Start", start(0)}}, c), Error);
}
