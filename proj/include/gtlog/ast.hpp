#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gtlog/builtins.hpp"
#include "gtlog/error.hpp"
#include "gtlog/value.hpp"

namespace gtlog {

/// Name of the functional-value column of every relation.
inline constexpr std::string_view kValueColumn = "logica_value";

struct Term;

struct Variable {
    std::string name;
    bool operator==(const Variable&) const = default;
};

struct Constant {
    Value value;
    bool operator==(const Constant&) const = default;
};

/// Predicate used in expression position, e.g. `D(x)` or `Start()`.
struct FunctionalCall {
    std::string predicate;
    std::vector<Term> args;
    bool operator==(const FunctionalCall&) const = default;
};

/// Operators use their symbol ("+", "++", ...); unary minus is "neg".
struct BuiltinCall {
    std::string op;
    std::vector<Term> args;
    bool operator==(const BuiltinCall&) const = default;
};

struct ListLiteral {
    std::vector<Term> items;
    bool operator==(const ListLiteral&) const = default;
};

struct Term {
    std::variant<Variable, Constant, FunctionalCall, BuiltinCall, ListLiteral> node;
    bool operator==(const Term&) const = default;
};

Term var(std::string name);
Term constant(Value v);
Term call(std::string predicate, std::vector<Term> args);
Term builtin(std::string op, std::vector<Term> args);

struct NamedArg {
    std::string name;
    Term value;
    bool operator==(const NamedArg&) const = default;
};

struct Literal {
    std::string predicate;
    std::vector<Term> positional_args;
    std::vector<NamedArg> named_args;
    bool negated = false;
    bool operator==(const Literal&) const = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op);

struct BodyFormula;
using Conjunction = std::vector<BodyFormula>;

struct Compare {
    Term left;
    CompareOp op;
    Term right;
    bool operator==(const Compare&) const = default;
};

struct In {
    Term element;
    Term list;
    bool operator==(const In&) const = default;
};

struct NegatedConj {
    Conjunction conjuncts;
    bool operator==(const NegatedConj&) const = default;
};

/// Each branch is a conjunction; `a | (b, c)` has branches [[a], [b, c]].
struct Disjunction {
    std::vector<Conjunction> branches;
    bool operator==(const Disjunction&) const = default;
};

/// Surface form `P = nil`.
struct NilCheck {
    std::string predicate;
    bool operator==(const NilCheck&) const = default;
};

struct BodyFormula {
    std::variant<Literal, Compare, In, NegatedConj, Disjunction, NilCheck> node;
    bool operator==(const BodyFormula&) const = default;
};

/// Negation of a conjunction. A single positive literal becomes a negated
/// literal; anything else becomes NegatedConj. Implication `a => c` is
/// `negate(a ++ [negate(c)])`, so both spellings produce the same AST.
BodyFormula negate(Conjunction conjuncts);

struct HeadArg {
    /// Positional index or attribute name.
    std::variant<std::size_t, std::string> name;
    Term expr;
    std::optional<AggregateKind> agg;
    bool optional_marker = false;
    bool operator==(const HeadArg&) const = default;

    bool positional() const { return std::holds_alternative<std::size_t>(name); }
    const std::string& attribute() const { return std::get<std::string>(name); }
};

struct HeadLiteral {
    std::string predicate;
    std::vector<HeadArg> args;
    bool operator==(const HeadLiteral&) const = default;
};

struct Rule {
    HeadLiteral head;
    /// The functional-value slot, e.g. `D(y) Min= expr` or `F(x) = expr`.
    std::optional<HeadArg> head_value;
    bool distinct = false;
    Conjunction body;
    /// Further heads of `Won(x), Lost(y) :- W(x, y);`.
    std::vector<HeadLiteral> extra_heads;
    bool operator==(const Rule&) const = default;

    bool is_fact() const { return body.empty(); }
};

struct Directive {
    enum class Kind { Recursive };
    Kind kind = Kind::Recursive;
    std::string target_predicate;
    /// -1 means unbounded.
    std::int64_t depth = -1;
    std::optional<std::string> stop_predicate;
    bool operator==(const Directive&) const = default;
};

struct Program {
    std::vector<Rule> rules;
    std::vector<Directive> directives;
    std::vector<SourceLocation> rule_spans;
    std::vector<SourceLocation> directive_spans;

    std::optional<SourceLocation> span_of_rule(std::size_t index) const;

    /// Structural equality; spans are ignored.
    friend bool operator==(const Program& a, const Program& b) {
        return a.rules == b.rules && a.directives == b.directives;
    }
};

}  // namespace gtlog
