#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gtlog/ast.hpp"
#include "gtlog/relation.hpp"

namespace gtlog {

struct PredicateSignature {
    std::string name;
    std::size_t positional_arity = 0;
    /// Declaration order; this is also the column order.
    std::vector<std::string> named_attributes;
    bool has_functional_value = false;
    /// Backed by loaded data or facts supplied by the caller.
    bool is_extensional = false;
    /// Defined by at least one rule.
    bool is_intensional = false;

    RelationSchema schema() const { return RelationSchema{positional_arity, named_attributes, has_functional_value}; }
};

PredicateSignature signature_of(const std::string& name, const RelationSchema& schema);

enum class SemanticsMode { Monotone, SnapshotIterate };

std::string_view to_string(SemanticsMode mode);

// ---------------------------------------------------------------------------
// Normalized rules: single head, user functions inlined, functional calls
// lifted into literals with fresh `_f<n>` variables, body in disjunctive
// normal form. This is what the plan compiler consumes.

struct NormalFormula;
using NormalConj = std::vector<NormalFormula>;

struct NormalLiteral {
    std::string predicate;
    /// (column index, Variable or Constant term); unlisted columns are free.
    std::vector<std::pair<std::size_t, Term>> columns;
};

struct NormalCompare {
    Term left;
    CompareOp op;
    Term right;
};

struct NormalIn {
    Term element;
    Term list;
};

struct NormalNegation {
    std::vector<NormalConj> variants;
};

struct NormalNilCheck {
    std::string predicate;
};

struct NormalFormula {
    std::variant<NormalLiteral, NormalCompare, NormalIn, NormalNegation, NormalNilCheck> node;
};

struct NormalRule {
    std::string head;
    /// One term per relation column.
    std::vector<Term> head_columns;
    /// Aggregator per relation column (nullopt = grouping key).
    std::vector<std::optional<AggregateKind>> column_aggregates;
    std::vector<NormalConj> variants;
    std::size_t source_rule = 0;
    std::optional<SourceLocation> span;

    bool aggregates() const;
};

struct FunctionDefinition {
    std::vector<std::string> parameters;
    Term body;
};

struct RecursiveClique {
    /// Sorted by name.
    std::vector<std::string> predicates;
    std::optional<Directive> directive;
    SemanticsMode mode = SemanticsMode::Monotone;
    /// Predicates downstream of the clique that the stop predicate needs,
    /// in evaluation order, ending with the stop predicate itself.
    std::vector<std::string> stop_closure;

    bool contains(const std::string& name) const;
};

struct StratifiedPlan {
    /// Topological order; ties broken by smallest predicate name.
    std::vector<std::vector<std::string>> strata;
    std::vector<RecursiveClique> recursive_cliques;
    std::set<std::pair<std::string, std::string>> negation_edges;
    /// All dependency edges (from body predicate to head predicate).
    std::set<std::pair<std::string, std::string>> edges;

    /// Index into recursive_cliques for a stratum, if it is recursive.
    std::optional<std::size_t> clique_of_stratum(std::size_t stratum) const;
    std::optional<std::size_t> stratum_of(const std::string& predicate) const;
};

struct AnalyzeOptions {
    /// Relations supplied by the caller (loaded data).
    std::map<std::string, RelationSchema> extensional;
    /// Treat undefined predicates as extensional, shaped by their usage.
    bool infer_extensional = false;
};

struct Analysis {
    std::map<std::string, PredicateSignature> signatures;
    StratifiedPlan plan;
    std::map<std::string, FunctionDefinition> functions;
    std::vector<NormalRule> rules;
    std::map<std::string, std::vector<std::size_t>> rules_by_predicate;
    /// Aggregator per column for every intensional predicate.
    std::map<std::string, std::vector<std::optional<AggregateKind>>> column_aggregates;
    /// Predicates used in expression position somewhere.
    std::set<std::string> used_as_function;
};

/// Validates a parsed program and stratifies it. Throws Error with one of
/// UnknownPredicate, UnsafeVariable, ArityMismatch, AggregationConflict,
/// NilCheckOutsideClique or RecursiveFunction.
Analysis analyze(const Program& program, const AnalyzeOptions& options = {});

/// Monotone iff every reference to a clique predicate inside the clique's
/// rules has positive polarity, no NilCheck occurs, and head aggregation is
/// absent or Min/Max.
SemanticsMode check_clique_semantics(const std::vector<std::string>& clique, const std::vector<NormalRule>& rules);

/// (predicate, polarity) for every predicate occurrence in a rule body,
/// including functional calls; polarity is (-1)^k for k enclosing negations.
std::vector<std::pair<std::string, int>> occurrence_polarities(const Rule& rule);

/// Human-readable strata / cliques / modes report.
std::string describe(const Analysis& analysis);

}  // namespace gtlog
