#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtlog/analyzer.hpp"
#include "gtlog/plan.hpp"
#include "gtlog/relation.hpp"

namespace gtlog {

enum class Termination { Fixpoint, StopPredicate, DepthCap, Oscillation };

std::string_view to_string(Termination t);

struct EvalConfig {
    /// Iteration cap for cliques without a directive; -1 is unbounded.
    std::int64_t default_depth = 32;
    /// Replaces every clique's cap, directive or not.
    std::optional<std::int64_t> depth_override;
    /// Backstop for unbounded cliques; reaching it reports DepthCap.
    std::optional<std::size_t> max_iterations;
    std::optional<std::chrono::milliseconds> max_wall_time;
    /// Receives `iter=<k> pred=<name> rows=<n>` lines.
    std::ostream* trace = nullptr;
    bool semi_naive = true;
    /// Keep every intermediate snapshot of each clique.
    bool record_history = false;
};

struct CliqueRun {
    std::vector<std::string> predicates;
    SemanticsMode mode = SemanticsMode::Monotone;
    std::size_t iterations = 0;
    Termination termination = Termination::Fixpoint;
    bool semi_naive = false;
    /// Snapshots 0..iterations; only filled with EvalConfig::record_history.
    std::vector<Snapshot> history;
};

struct EvalResult {
    Snapshot snapshot;
    std::vector<CliqueRun> cliques;

    /// The run of the clique containing `predicate`, if it is recursive.
    const CliqueRun* clique_of(const std::string& predicate) const;
};

struct CompiledProgram {
    Analysis analysis;
    std::map<std::string, PlanPtr> plans;
    /// Delta plans of semi-naive-eligible cliques.
    std::map<std::string, PlanPtr> delta_plans;
    std::vector<bool> semi_naive_eligible;
};

CompiledProgram compile_program(const Program& program, const AnalyzeOptions& options = {});

/// Extensional relations are matched to predicates by map key.
EvalResult evaluate(const CompiledProgram& compiled, const std::map<std::string, Relation>& extensional,
                    const EvalConfig& config = {});

/// Analyzes with the given relations as extensional data, compiles and runs.
EvalResult evaluate(const Program& program, const std::map<std::string, Relation>& extensional,
                    const EvalConfig& config = {});

/// Throws UnknownPredicate if the result has no such relation.
const Relation& query(const EvalResult& result, const std::string& predicate);

}  // namespace gtlog
