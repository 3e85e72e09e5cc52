#include "oracle/equivalence.hpp"

#include "gtlog/parser.hpp"
#include "gtlog/plan.hpp"

namespace oracle {

namespace {

std::vector<Tuple> random_rows(std::mt19937_64& rng, const gtlog::RelationSchema& schema) {
    std::uniform_int_distribution<int> cell(0, 4);
    std::uniform_int_distribution<int> count(0, 8);
    std::map<Tuple, Value> keyed;
    std::set<Tuple> plain;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        Tuple row;
        for (std::size_t c = 0; c < schema.key_width(); ++c) row.push_back(Value(cell(rng)));
        if (schema.functional) {
            keyed.emplace(row, Value(cell(rng)));
        } else {
            plain.insert(row);
        }
    }
    std::vector<Tuple> out(plain.begin(), plain.end());
    for (auto& [key, v] : keyed) {
        Tuple row = key;
        row.push_back(v);
        out.push_back(row);
    }
    return out;
}

}  // namespace

RandomSnapshot random_snapshot(std::mt19937_64& rng, const gtlog::Analysis& analysis) {
    std::bernoulli_distribution absent(0.15);
    RandomSnapshot out;
    for (const auto& [name, sig] : analysis.signatures) {
        if (absent(rng)) continue;
        gtlog::RelationSchema schema = sig.schema();
        auto rows = random_rows(rng, schema);
        out.snapshot = out.snapshot.with(std::make_shared<const gtlog::Relation>(name, schema, rows));
        out.naive[name] = NaiveTable{schema, {rows.begin(), rows.end()}};
    }
    return out;
}

std::string show(const std::set<Tuple>& rows) {
    std::string s;
    for (const auto& r : rows) {
        s += "(";
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? ", " : "") + gtlog::literal(r[i]);
        s += ") ";
    }
    return s;
}

EquivalenceReport check_equivalence(const std::string& program_text, std::mt19937_64& rng, int trials) {
    gtlog::Program program = gtlog::parse_program(program_text);
    gtlog::Analysis a = gtlog::analyze(program, gtlog::AnalyzeOptions{{}, true});
    auto functions = find_functions(program);
    EquivalenceReport report;
    for (int trial = 0; trial < trials; ++trial) {
        RandomSnapshot snap = random_snapshot(rng, a);
        gtlog::EvalContext ctx{&snap.snapshot, nullptr, &snap.snapshot};
        for (const auto& rule : a.rules) {
            auto expected = interpret_rule(program.rules[rule.source_rule], rule.head,
                                           a.signatures.at(rule.head).schema(), snap.naive, functions);
            gtlog::Table t = gtlog::evaluate_plan(*gtlog::compile_rule(rule, a), ctx);
            std::set<Tuple> actual(t.rows.begin(), t.rows.end());
            ++report.compared;
            if (actual != expected) {
                report.mismatch = "rule " + std::to_string(rule.source_rule) + " head " + rule.head + ": actual " +
                                  show(actual) + " expected " + show(expected);
                return report;
            }
        }
    }
    return report;
}

}  // namespace oracle
