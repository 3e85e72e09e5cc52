#include "gtlog/ast.hpp"

namespace gtlog {

Term var(std::string name) { return Term{Variable{std::move(name)}}; }

Term constant(Value v) { return Term{Constant{std::move(v)}}; }

Term call(std::string predicate, std::vector<Term> args) {
    return Term{FunctionalCall{std::move(predicate), std::move(args)}};
}

Term builtin(std::string op, std::vector<Term> args) { return Term{BuiltinCall{std::move(op), std::move(args)}}; }

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

BodyFormula negate(Conjunction conjuncts) {
    if (conjuncts.size() == 1) {
        if (auto* lit = std::get_if<Literal>(&conjuncts.front().node); lit && !lit->negated) {
            Literal out = *lit;
            out.negated = true;
            return BodyFormula{std::move(out)};
        }
    }
    return BodyFormula{NegatedConj{std::move(conjuncts)}};
}

std::optional<SourceLocation> Program::span_of_rule(std::size_t index) const {
    if (index < rule_spans.size()) return rule_spans[index];
    return std::nullopt;
}

}  // namespace gtlog
