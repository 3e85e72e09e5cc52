#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gtlog/analyzer.hpp"
#include "gtlog/builtins.hpp"
#include "gtlog/relation.hpp"

namespace gtlog {

/// Expression compiled against the column layout of its input.
struct Expr {
    enum class Kind { Slot, Const, Call, List, Compare, Member };
    Kind kind = Kind::Const;
    std::size_t slot = 0;
    Value value;
    const Builtin* fn = nullptr;
    CompareOp op = CompareOp::Eq;
    std::vector<Expr> args;
};

Value evaluate(const Expr& expr, std::span<const Value> row);

/// Materialized binding table. Column names are variable names.
struct Table {
    std::vector<std::string> columns;
    std::vector<Tuple> rows;
};

enum class ScanSource { Current, Delta, Base };

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

/// Exactly one row with no columns.
struct UnitNode {};

/// The correlated bindings handed to the right side of an AntiJoin.
struct SeedNode {};

struct ScanNode {
    std::string predicate;
    ScanSource source = ScanSource::Current;
    /// One entry per relation column: a Variable, a Constant, or nothing.
    std::vector<std::optional<Term>> pattern;
    std::vector<std::string> column_names;
};

struct JoinNode {
    PlanPtr left;
    PlanPtr right;
    std::vector<std::string> on;
};

/// Rows of `left` with no match in `right` on the correlated variables.
struct AntiJoinNode {
    PlanPtr left;
    PlanPtr right;
    std::vector<std::string> correlated;
};

struct SelectNode {
    PlanPtr input;
    Expr condition;
    std::string text;
};

struct ComputeNode {
    PlanPtr input;
    std::string column;
    Expr expr;
    std::string text;
};

/// One output row per element of a list.
struct UnnestNode {
    PlanPtr input;
    std::string column;
    Expr list;
    std::string text;
};

/// Passes its input only while `predicate` has no entry in the snapshot.
struct NilGuardNode {
    PlanPtr input;
    std::string predicate;
};

/// Keeps multiplicity; Distinct or GroupAggregate restore set semantics.
struct ProjectNode {
    PlanPtr input;
    std::vector<std::size_t> slots;
    std::optional<std::size_t> rule;
    std::optional<SourceLocation> span;
};

struct UnionAllNode {
    std::vector<PlanPtr> branches;
};

struct DistinctNode {
    PlanPtr input;
};

struct GroupAggregateNode {
    PlanPtr input;
    std::vector<std::size_t> keys;
    std::vector<std::pair<std::size_t, AggregateKind>> aggregations;
};

struct PlanNode {
    std::variant<UnitNode, SeedNode, ScanNode, JoinNode, AntiJoinNode, SelectNode, ComputeNode, UnnestNode,
                 NilGuardNode, ProjectNode, UnionAllNode, DistinctNode, GroupAggregateNode>
        node;
    std::vector<std::string> columns;
};

/// Plan for one rule; output columns are the head relation's column names.
PlanPtr compile_rule(const NormalRule& rule, const Analysis& analysis);

/// Union of all rule plans for `predicate` (plus its loaded facts, if any),
/// followed by Distinct or GroupAggregate.
PlanPtr compile_predicate(const std::string& predicate, const Analysis& analysis);

/// Delta rules for semi-naive evaluation of a clique: for every body
/// occurrence of a clique predicate, the rule with that occurrence reading
/// the previous iteration's new tuples. Null if no rule is recursive.
PlanPtr compile_delta(const std::string& predicate, const Analysis& analysis, const RecursiveClique& clique);

std::string explain(const PlanPtr& plan);

struct EvalContext {
    const Snapshot* current = nullptr;
    const Snapshot* delta = nullptr;
    const Snapshot* base = nullptr;
};

Table evaluate_plan(const PlanNode& plan, const EvalContext& context);

/// Evaluates a predicate plan into a relation with the given schema.
Relation evaluate_relation(const PlanNode& plan, const EvalContext& context, const std::string& name,
                           const RelationSchema& schema);

}  // namespace gtlog
