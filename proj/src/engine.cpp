#include "gtlog/engine.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_set>

namespace gtlog {

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Fixpoint: return "Fixpoint";
        case Termination::StopPredicate: return "StopPredicate";
        case Termination::DepthCap: return "DepthCap";
        case Termination::Oscillation: return "Oscillation";
    }
    return "?";
}

const CliqueRun* EvalResult::clique_of(const std::string& predicate) const {
    for (const auto& c : cliques) {
        if (std::find(c.predicates.begin(), c.predicates.end(), predicate) != c.predicates.end()) return &c;
    }
    return nullptr;
}

namespace {

bool negates_clique(const NormalConj& conj, const RecursiveClique& clique, bool inside) {
    for (const auto& f : conj) {
        if (const auto* lit = std::get_if<NormalLiteral>(&f.node)) {
            if (inside && clique.contains(lit->predicate)) return true;
        } else if (const auto* neg = std::get_if<NormalNegation>(&f.node)) {
            for (const auto& v : neg->variants) {
                if (negates_clique(v, clique, true)) return true;
            }
        }
    }
    return false;
}

bool semi_naive_ok(const RecursiveClique& clique, const Analysis& analysis) {
    if (clique.mode != SemanticsMode::Monotone) return false;
    for (const auto& p : clique.predicates) {
        auto agg = analysis.column_aggregates.find(p);
        if (agg != analysis.column_aggregates.end() &&
            std::any_of(agg->second.begin(), agg->second.end(), [](const auto& a) { return a.has_value(); })) {
            return false;
        }
        auto rules = analysis.rules_by_predicate.find(p);
        if (rules == analysis.rules_by_predicate.end()) continue;
        for (std::size_t r : rules->second) {
            for (const auto& v : analysis.rules[r].variants) {
                if (negates_clique(v, clique, false)) return false;
            }
        }
    }
    return true;
}

void check_functional(const Relation& rel, const Analysis& analysis) {
    const auto& schema = rel.schema();
    if (!schema.functional) return;
    auto agg = analysis.column_aggregates.find(rel.name());
    if (agg != analysis.column_aggregates.end() && agg->second[schema.value_column()]) return;
    const std::size_t key = schema.key_width();
    const auto& rows = rel.rows();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (std::equal(rows[i].begin(), rows[i].begin() + static_cast<std::ptrdiff_t>(key), rows[i - 1].begin())) {
            std::string shown;
            for (std::size_t c = 0; c < key; ++c) shown += (c ? ", " : "") + literal(rows[i][c]);
            throw Error(ErrorCode::FunctionalValueConflict, rel.name() + "(" + shown + ") has values " +
                                                                literal(rows[i - 1].back()) + " and " +
                                                                literal(rows[i].back()));
        }
    }
}

std::uint64_t clique_digest(const Snapshot& snap, const std::vector<std::string>& predicates) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& p : predicates) {
        const Relation* r = snap.find(p);
        std::uint64_t d = r ? r->digest() : 0x5bd1e995ull;
        h ^= d + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

bool same_clique_state(const Snapshot& a, const Snapshot& b, const std::vector<std::string>& predicates) {
    for (const auto& p : predicates) {
        const Relation* x = a.find(p);
        const Relation* y = b.find(p);
        if (!x || !y) {
            if (x != y) return false;
            continue;
        }
        if (!(*x == *y)) return false;
    }
    return true;
}

class Runner {
public:
    Runner(const CompiledProgram& compiled, const EvalConfig& config) : c_(compiled), config_(config) {
        start_ = std::chrono::steady_clock::now();
    }

    EvalResult run(const std::map<std::string, Relation>& extensional) {
        const Analysis& an = c_.analysis;
        for (const auto& [name, rel] : extensional) {
            auto sig = an.signatures.find(name);
            RelationSchema schema = sig != an.signatures.end() ? sig->second.schema() : rel.schema();
            if (!(schema == rel.schema())) {
                Relation copy(name, schema, rel.rows());
                base_ = base_.with(std::make_shared<const Relation>(std::move(copy)));
            } else {
                base_ = base_.with(std::make_shared<const Relation>(rel.renamed(name)));
            }
        }
        EvalResult result;
        Snapshot snap;
        // Loaded relations nobody mentions still show up in the result.
        for (const auto& [name, rel] : base_.relations()) {
            if (!an.signatures.count(name)) snap = snap.with(rel);
        }
        for (std::size_t s = 0; s < an.plan.strata.size(); ++s) {
            if (auto ci = an.plan.clique_of_stratum(s)) {
                result.cliques.push_back(run_clique(*ci, snap));
            } else {
                snap = snap.with(compute(an.plan.strata[s].front(), snap));
            }
        }
        result.snapshot = snap;
        return result;
    }

private:
    RelationPtr compute(const std::string& predicate, const Snapshot& snap) {
        const auto& sig = c_.analysis.signatures.at(predicate);
        if (!sig.is_intensional) {
            RelationPtr rel = base_.find_ptr(predicate);
            if (!rel) rel = std::make_shared<const Relation>(predicate, sig.schema());
            check_functional(*rel, c_.analysis);
            return rel;
        }
        EvalContext ctx{&snap, nullptr, &base_};
        auto rel = std::make_shared<const Relation>(
            evaluate_relation(*c_.plans.at(predicate), ctx, predicate, sig.schema()));
        check_functional(*rel, c_.analysis);
        return rel;
    }

    void check_time() const {
        if (!config_.max_wall_time) return;
        if (std::chrono::steady_clock::now() - start_ > *config_.max_wall_time) {
            throw Error(ErrorCode::Timeout, "evaluation exceeded its wall-time limit");
        }
    }

    std::int64_t depth_for(const RecursiveClique& clique) const {
        if (config_.depth_override) return *config_.depth_override;
        if (clique.directive) return clique.directive->depth;
        return config_.default_depth;
    }

    /// Evaluates the stop closure on `snap`; true if the stop relation is nonempty.
    bool stop_reached(const RecursiveClique& clique, Snapshot& snap) {
        const std::string& stop = *clique.directive->stop_predicate;
        for (const auto& p : clique.stop_closure) snap = snap.with(compute(p, snap));
        const Relation* r = snap.find(stop);
        return r && !r->empty();
    }

    CliqueRun run_clique(std::size_t index, Snapshot& snap) {
        const Analysis& an = c_.analysis;
        const RecursiveClique& clique = an.plan.recursive_cliques[index];
        const auto& preds = clique.predicates;
        CliqueRun run;
        run.predicates = preds;
        run.mode = clique.mode;
        run.semi_naive = config_.semi_naive && c_.semi_naive_eligible[index];

        std::int64_t depth = depth_for(clique);
        std::optional<std::size_t> cap;
        if (depth >= 0) cap = static_cast<std::size_t>(depth);
        if (config_.max_iterations && (!cap || *config_.max_iterations < *cap)) cap = config_.max_iterations;
        bool has_stop = clique.directive && clique.directive->stop_predicate;

        Snapshot current = snap;
        for (const auto& p : preds) current = current.without(p);
        current = current.with_iteration(0);
        std::unordered_set<std::uint64_t> seen{clique_digest(current, preds)};
        if (config_.record_history) run.history.push_back(current);
        Snapshot delta;

        std::size_t k = 0;
        std::optional<Termination> reason;
        if (cap && *cap == 0) reason = Termination::DepthCap;
        while (!reason) {
            check_time();
            Snapshot next = current.with_iteration(k + 1);
            Snapshot next_delta;
            for (const auto& p : preds) {
                RelationPtr rel;
                if (run.semi_naive && k > 0) {
                    rel = semi_naive_step(p, current, delta, next_delta);
                } else {
                    rel = compute(p, current);
                    if (run.semi_naive) next_delta = next_delta.with(rel);
                }
                next = next.with(rel);
            }
            ++k;
            if (config_.trace) {
                for (const auto& p : preds) {
                    *config_.trace << "iter=" << k << " pred=" << p << " rows=" << next.find(p)->size() << '\n';
                }
            }
            // The stop closure is always computed so every recorded snapshot carries it.
            bool stop_hit = has_stop && stop_reached(clique, next);
            if (same_clique_state(current, next, preds)) {
                reason = Termination::Fixpoint;
            } else if (stop_hit) {
                reason = Termination::StopPredicate;
            } else if (clique.mode == SemanticsMode::SnapshotIterate && seen.count(clique_digest(next, preds))) {
                reason = Termination::Oscillation;
            } else if (cap && k >= *cap) {
                reason = Termination::DepthCap;
            }
            seen.insert(clique_digest(next, preds));
            if (config_.record_history) run.history.push_back(next);
            current = std::move(next);
            delta = std::move(next_delta);
        }
        for (const auto& p : preds) {
            if (!current.contains(p)) {
                current = current.with(std::make_shared<const Relation>(p, an.signatures.at(p).schema()));
            }
        }
        run.iterations = k;
        run.termination = *reason;
        snap = current.with_iteration(0);
        return run;
    }

    RelationPtr semi_naive_step(const std::string& p, const Snapshot& current, const Snapshot& delta,
                                Snapshot& next_delta) {
        RelationPtr old = current.find_ptr(p);
        auto plan = c_.delta_plans.find(p);
        if (plan == c_.delta_plans.end()) {
            next_delta = next_delta.with(std::make_shared<const Relation>(p, old->schema()));
            return old;
        }
        EvalContext ctx{&current, &delta, &base_};
        Table t = evaluate_plan(*plan->second, ctx);
        std::vector<Tuple> fresh;
        for (auto& row : t.rows) {
            if (!old->contains(row)) fresh.push_back(std::move(row));
        }
        Relation added(p, old->schema(), std::move(fresh));
        std::vector<Tuple> all = old->rows();
        all.insert(all.end(), added.rows().begin(), added.rows().end());
        auto rel = std::make_shared<const Relation>(p, old->schema(), std::move(all));
        check_functional(*rel, c_.analysis);
        next_delta = next_delta.with(std::make_shared<const Relation>(std::move(added)));
        return rel;
    }

    const CompiledProgram& c_;
    const EvalConfig& config_;
    Snapshot base_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

CompiledProgram compile_program(const Program& program, const AnalyzeOptions& options) {
    CompiledProgram out;
    out.analysis = analyze(program, options);
    const Analysis& an = out.analysis;
    for (const auto& [name, sig] : an.signatures) {
        if (sig.is_intensional) out.plans[name] = compile_predicate(name, an);
    }
    for (const auto& clique : an.plan.recursive_cliques) {
        bool ok = semi_naive_ok(clique, an);
        out.semi_naive_eligible.push_back(ok);
        if (!ok) continue;
        for (const auto& p : clique.predicates) {
            if (PlanPtr d = compile_delta(p, an, clique)) out.delta_plans[p] = d;
        }
    }
    return out;
}

EvalResult evaluate(const CompiledProgram& compiled, const std::map<std::string, Relation>& extensional,
                    const EvalConfig& config) {
    return Runner(compiled, config).run(extensional);
}

EvalResult evaluate(const Program& program, const std::map<std::string, Relation>& extensional,
                    const EvalConfig& config) {
    AnalyzeOptions options;
    for (const auto& [name, rel] : extensional) options.extensional[name] = rel.schema();
    return evaluate(compile_program(program, options), extensional, config);
}

const Relation& query(const EvalResult& result, const std::string& predicate) {
    const Relation* r = result.snapshot.find(predicate);
    if (!r) throw Error(ErrorCode::UnknownPredicate, "no relation named " + predicate);
    return *r;
}

}  // namespace gtlog
