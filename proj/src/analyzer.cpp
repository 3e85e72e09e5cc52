#include "gtlog/analyzer.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

namespace gtlog {

namespace {

constexpr int kMaxInlineDepth = 64;

/// A rule with a single head, produced by splitting multi-head rules.
struct HeadedRule {
    const Rule* rule;
    const HeadLiteral* head;
    std::size_t index;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message, std::optional<SourceLocation> where) {
    throw Error(code, message, where);
}

void term_variables(const Term& t, std::set<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Variable>) {
                out.insert(n.name);
            } else if constexpr (std::is_same_v<T, FunctionalCall> || std::is_same_v<T, BuiltinCall>) {
                for (const auto& a : n.args) term_variables(a, out);
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                for (const auto& a : n.items) term_variables(a, out);
            }
        },
        t.node);
}

std::set<std::string> variables_of(const Term& t) {
    std::set<std::string> out;
    term_variables(t, out);
    return out;
}

bool is_function_definition(const Rule& r) {
    if (!r.body.empty() || !r.extra_heads.empty() || r.distinct) return false;
    if (!r.head_value || r.head_value->agg) return false;
    if (r.head.args.empty()) return false;
    std::set<std::string> seen;
    for (const auto& a : r.head.args) {
        if (!a.positional()) return false;
        const auto* v = std::get_if<Variable>(&a.expr.node);
        if (!v || !seen.insert(v->name).second) return false;
    }
    return true;
}

// -- usage collection ---------------------------------------------------------

struct Usage {
    std::size_t positional = 0;
    std::vector<std::string> attributes;
    bool functional = false;
    std::optional<SourceLocation> first_seen;
};

class UsageCollector {
public:
    explicit UsageCollector(const std::map<std::string, FunctionDefinition>& functions) : functions_(functions) {}

    void rule(const Rule& r, std::optional<SourceLocation> where) {
        where_ = where;
        for (const auto* h : heads(r)) {
            for (const auto& a : h->args) term(a.expr);
        }
        if (r.head_value) term(r.head_value->expr);
        conjunction(r.body);
    }

    void function(const FunctionDefinition& f) { term(f.body); }

    std::map<std::string, Usage> usages;
    std::set<std::string> called;

private:
    static std::vector<const HeadLiteral*> heads(const Rule& r) {
        std::vector<const HeadLiteral*> out{&r.head};
        for (const auto& h : r.extra_heads) out.push_back(&h);
        return out;
    }

    Usage& use(const std::string& name) {
        Usage& u = usages[name];
        if (!u.first_seen) u.first_seen = where_;
        return u;
    }

    void term(const Term& t) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, FunctionalCall>) {
                    if (!functions_.count(n.predicate)) {
                        Usage& u = use(n.predicate);
                        u.positional = std::max(u.positional, n.args.size());
                        u.functional = true;
                        called.insert(n.predicate);
                    }
                    for (const auto& a : n.args) term(a);
                } else if constexpr (std::is_same_v<T, BuiltinCall>) {
                    for (const auto& a : n.args) term(a);
                } else if constexpr (std::is_same_v<T, ListLiteral>) {
                    for (const auto& a : n.items) term(a);
                }
            },
            t.node);
    }

    void conjunction(const Conjunction& c) {
        for (const auto& f : c) formula(f);
    }

    void formula(const BodyFormula& f) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Literal>) {
                    Usage& u = use(n.predicate);
                    u.positional = std::max(u.positional, n.positional_args.size());
                    for (const auto& na : n.named_args) {
                        if (na.name == kValueColumn) {
                            u.functional = true;
                        } else if (std::find(u.attributes.begin(), u.attributes.end(), na.name) == u.attributes.end()) {
                            u.attributes.push_back(na.name);
                        }
                        term(na.value);
                    }
                    for (const auto& a : n.positional_args) term(a);
                } else if constexpr (std::is_same_v<T, Compare>) {
                    term(n.left);
                    term(n.right);
                } else if constexpr (std::is_same_v<T, In>) {
                    term(n.element);
                    term(n.list);
                } else if constexpr (std::is_same_v<T, NegatedConj>) {
                    conjunction(n.conjuncts);
                } else if constexpr (std::is_same_v<T, Disjunction>) {
                    for (const auto& b : n.branches) conjunction(b);
                } else {
                    use(n.predicate);
                }
            },
            f.node);
    }

    const std::map<std::string, FunctionDefinition>& functions_;
    std::optional<SourceLocation> where_;
};

// -- normalization --------------------------------------------------------------

class Normalizer {
public:
    Normalizer(const std::map<std::string, PredicateSignature>& signatures,
               const std::map<std::string, FunctionDefinition>& functions, std::optional<SourceLocation> where)
        : signatures_(signatures), functions_(functions), where_(where) {}

    std::vector<NormalConj> conjunction(const Conjunction& conj) {
        std::vector<NormalConj> variants(1);
        auto append_all = [&variants](const NormalConj& items) {
            for (auto& v : variants) v.insert(v.end(), items.begin(), items.end());
        };
        for (const auto& f : conj) {
            if (const auto* d = std::get_if<Disjunction>(&f.node)) {
                std::vector<NormalConj> alternatives;
                for (const auto& branch : d->branches) {
                    for (auto& alt : conjunction(branch)) alternatives.push_back(std::move(alt));
                }
                std::vector<NormalConj> product;
                for (const auto& v : variants) {
                    for (const auto& alt : alternatives) {
                        NormalConj merged = v;
                        merged.insert(merged.end(), alt.begin(), alt.end());
                        product.push_back(std::move(merged));
                    }
                }
                variants = std::move(product);
            } else {
                append_all(formula(f));
            }
        }
        return variants;
    }

    /// Lifts functional calls out of `t`, appending their literals to `sink`.
    Term lift(const Term& t, NormalConj& sink, int depth = 0) {
        if (depth > kMaxInlineDepth) fail(ErrorCode::RecursiveFunction, "function inlining does not terminate", where_);
        return std::visit(
            [&](const auto& n) -> Term {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, FunctionalCall>) {
                    if (auto fn = functions_.find(n.predicate); fn != functions_.end()) {
                        if (n.args.size() != fn->second.parameters.size()) {
                            fail(ErrorCode::ArityMismatch,
                                 "function " + n.predicate + " expects " +
                                     std::to_string(fn->second.parameters.size()) + " argument(s)",
                                 where_);
                        }
                        std::map<std::string, Term> binding;
                        for (std::size_t i = 0; i < n.args.size(); ++i) {
                            binding[fn->second.parameters[i]] = lift(n.args[i], sink, depth + 1);
                        }
                        return lift(substitute(fn->second.body, binding), sink, depth + 1);
                    }
                    const PredicateSignature& sig = signature(n.predicate);
                    if (!sig.has_functional_value) {
                        fail(ErrorCode::ArityMismatch, n.predicate + " is used as a function but has no value", where_);
                    }
                    if (n.args.size() > sig.positional_arity) {
                        fail(ErrorCode::ArityMismatch, arity_message(n.predicate, sig, n.args.size()), where_);
                    }
                    NormalLiteral lit{n.predicate, {}};
                    NormalConj extra;
                    for (std::size_t i = 0; i < n.args.size(); ++i) {
                        lit.columns.emplace_back(i, simple(lift(n.args[i], sink, depth + 1), extra));
                    }
                    std::string v = fresh();
                    lit.columns.emplace_back(sig.schema().value_column(), var(v));
                    sink.push_back(NormalFormula{std::move(lit)});
                    sink.insert(sink.end(), extra.begin(), extra.end());
                    return var(v);
                } else if constexpr (std::is_same_v<T, BuiltinCall>) {
                    BuiltinCall out{n.op, {}};
                    for (const auto& a : n.args) out.args.push_back(lift(a, sink, depth + 1));
                    return Term{std::move(out)};
                } else if constexpr (std::is_same_v<T, ListLiteral>) {
                    ListLiteral out;
                    for (const auto& a : n.items) out.items.push_back(lift(a, sink, depth + 1));
                    return Term{std::move(out)};
                } else {
                    return t;
                }
            },
            t.node);
    }

private:
    static Term substitute(const Term& t, const std::map<std::string, Term>& binding) {
        return std::visit(
            [&](const auto& n) -> Term {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Variable>) {
                    auto it = binding.find(n.name);
                    return it == binding.end() ? t : it->second;
                } else if constexpr (std::is_same_v<T, FunctionalCall> || std::is_same_v<T, BuiltinCall>) {
                    T out{n};
                    for (auto& a : out.args) a = substitute(a, binding);
                    return Term{std::move(out)};
                } else if constexpr (std::is_same_v<T, ListLiteral>) {
                    ListLiteral out{n};
                    for (auto& a : out.items) a = substitute(a, binding);
                    return Term{std::move(out)};
                } else {
                    return t;
                }
            },
            t.node);
    }

    static std::string arity_message(const std::string& name, const PredicateSignature& sig, std::size_t got) {
        return name + " has " + std::to_string(sig.positional_arity) + " positional column(s), used with " +
               std::to_string(got);
    }

    std::string fresh() { return "_f" + std::to_string(counter_++); }

    const PredicateSignature& signature(const std::string& name) const {
        auto it = signatures_.find(name);
        if (it == signatures_.end()) fail(ErrorCode::UnknownPredicate, "unknown predicate " + name, where_);
        return it->second;
    }

    /// Variables and constants stay; anything else is bound to a fresh
    /// variable constrained by an equality.
    Term simple(Term t, NormalConj& extra) {
        if (std::holds_alternative<Variable>(t.node) || std::holds_alternative<Constant>(t.node)) return t;
        std::string v = fresh();
        extra.push_back(NormalFormula{NormalCompare{var(v), CompareOp::Eq, std::move(t)}});
        return var(v);
    }

    NormalConj formula(const BodyFormula& f) {
        NormalConj out;
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Literal>) {
                    if (n.negated) {
                        Literal positive = n;
                        positive.negated = false;
                        out.push_back(NormalFormula{NormalNegation{conjunction({BodyFormula{std::move(positive)}})}});
                    } else {
                        literal(n, out);
                    }
                } else if constexpr (std::is_same_v<T, Compare>) {
                    Term l = lift(n.left, out);
                    Term r = lift(n.right, out);
                    out.push_back(NormalFormula{NormalCompare{std::move(l), n.op, std::move(r)}});
                } else if constexpr (std::is_same_v<T, In>) {
                    Term e = lift(n.element, out);
                    Term l = lift(n.list, out);
                    out.push_back(NormalFormula{NormalIn{std::move(e), std::move(l)}});
                } else if constexpr (std::is_same_v<T, NegatedConj>) {
                    out.push_back(NormalFormula{NormalNegation{conjunction(n.conjuncts)}});
                } else if constexpr (std::is_same_v<T, NilCheck>) {
                    signature(n.predicate);
                    out.push_back(NormalFormula{NormalNilCheck{n.predicate}});
                }
            },
            f.node);
        return out;
    }

    void literal(const Literal& lit, NormalConj& out) {
        const PredicateSignature& sig = signature(lit.predicate);
        if (lit.positional_args.size() > sig.positional_arity) {
            fail(ErrorCode::ArityMismatch, arity_message(lit.predicate, sig, lit.positional_args.size()), where_);
        }
        RelationSchema schema = sig.schema();
        NormalLiteral nl{lit.predicate, {}};
        NormalConj extra;
        for (std::size_t i = 0; i < lit.positional_args.size(); ++i) {
            nl.columns.emplace_back(i, simple(lift(lit.positional_args[i], out), extra));
        }
        for (const auto& na : lit.named_args) {
            auto col = schema.attribute_column(na.name);
            if (!col) fail(ErrorCode::ArityMismatch, lit.predicate + " has no attribute '" + na.name + "'", where_);
            nl.columns.emplace_back(*col, simple(lift(na.value, out), extra));
        }
        out.push_back(NormalFormula{std::move(nl)});
        out.insert(out.end(), extra.begin(), extra.end());
    }

    const std::map<std::string, PredicateSignature>& signatures_;
    const std::map<std::string, FunctionDefinition>& functions_;
    std::optional<SourceLocation> where_;
    std::size_t counter_ = 0;
};

// -- safety -------------------------------------------------------------------

bool all_bound(const Term& t, const std::set<std::string>& bound, std::string* missing = nullptr) {
    for (const auto& v : variables_of(t)) {
        if (!bound.count(v)) {
            if (missing) *missing = v;
            return false;
        }
    }
    return true;
}

const std::string* lone_variable(const Term& t) {
    if (const auto* v = std::get_if<Variable>(&t.node)) return &v->name;
    return nullptr;
}

std::set<std::string> check_safety(const NormalConj& conj, std::set<std::string> bound,
                                   std::optional<SourceLocation> where) {
    for (const auto& f : conj) {
        if (const auto* lit = std::get_if<NormalLiteral>(&f.node)) {
            for (const auto& [col, t] : lit->columns) term_variables(t, bound);
        }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& f : conj) {
            if (const auto* c = std::get_if<NormalCompare>(&f.node); c && c->op == CompareOp::Eq) {
                const std::string* l = lone_variable(c->left);
                const std::string* r = lone_variable(c->right);
                if (l && !bound.count(*l) && all_bound(c->right, bound)) {
                    bound.insert(*l);
                    changed = true;
                } else if (r && !bound.count(*r) && all_bound(c->left, bound)) {
                    bound.insert(*r);
                    changed = true;
                }
            } else if (const auto* in = std::get_if<NormalIn>(&f.node)) {
                const std::string* e = lone_variable(in->element);
                if (e && !bound.count(*e) && all_bound(in->list, bound)) {
                    bound.insert(*e);
                    changed = true;
                }
            }
        }
    }
    std::string missing;
    auto unsafe = [&](const std::string& v) {
        fail(ErrorCode::UnsafeVariable, "variable '" + v + "' is not bound by a positive literal", where);
    };
    for (const auto& f : conj) {
        if (const auto* c = std::get_if<NormalCompare>(&f.node)) {
            if (!all_bound(c->left, bound, &missing) || !all_bound(c->right, bound, &missing)) unsafe(missing);
        } else if (const auto* in = std::get_if<NormalIn>(&f.node)) {
            if (!all_bound(in->element, bound, &missing) || !all_bound(in->list, bound, &missing)) unsafe(missing);
        }
    }
    for (const auto& f : conj) {
        if (const auto* neg = std::get_if<NormalNegation>(&f.node)) {
            for (const auto& v : neg->variants) check_safety(v, bound, where);
        }
    }
    return bound;
}

// -- dependency walking -------------------------------------------------------

template <class Fn>
void walk_occurrences(const NormalConj& conj, int polarity, Fn&& fn) {
    for (const auto& f : conj) {
        if (const auto* lit = std::get_if<NormalLiteral>(&f.node)) {
            fn(lit->predicate, polarity, false);
        } else if (const auto* neg = std::get_if<NormalNegation>(&f.node)) {
            for (const auto& v : neg->variants) walk_occurrences(v, -polarity, fn);
        } else if (const auto* nil = std::get_if<NormalNilCheck>(&f.node)) {
            fn(nil->predicate, polarity, true);
        }
    }
}

void ast_term_polarities(const Term& t, int polarity, std::vector<std::pair<std::string, int>>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, FunctionalCall>) {
                out.emplace_back(n.predicate, polarity);
                for (const auto& a : n.args) ast_term_polarities(a, polarity, out);
            } else if constexpr (std::is_same_v<T, BuiltinCall>) {
                for (const auto& a : n.args) ast_term_polarities(a, polarity, out);
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                for (const auto& a : n.items) ast_term_polarities(a, polarity, out);
            }
        },
        t.node);
}

void ast_polarities(const Conjunction& conj, int polarity, std::vector<std::pair<std::string, int>>& out) {
    for (const auto& f : conj) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Literal>) {
                    int p = n.negated ? -polarity : polarity;
                    out.emplace_back(n.predicate, p);
                    for (const auto& a : n.positional_args) ast_term_polarities(a, p, out);
                    for (const auto& a : n.named_args) ast_term_polarities(a.value, p, out);
                } else if constexpr (std::is_same_v<T, Compare>) {
                    ast_term_polarities(n.left, polarity, out);
                    ast_term_polarities(n.right, polarity, out);
                } else if constexpr (std::is_same_v<T, In>) {
                    ast_term_polarities(n.element, polarity, out);
                    ast_term_polarities(n.list, polarity, out);
                } else if constexpr (std::is_same_v<T, NegatedConj>) {
                    ast_polarities(n.conjuncts, -polarity, out);
                } else if constexpr (std::is_same_v<T, Disjunction>) {
                    for (const auto& b : n.branches) ast_polarities(b, polarity, out);
                } else {
                    out.emplace_back(n.predicate, polarity);
                }
            },
            f.node);
    }
}

// -- strongly connected components -------------------------------------------

std::vector<std::vector<std::string>> strongly_connected(const std::vector<std::string>& nodes,
                                                         const std::map<std::string, std::vector<std::string>>& succ) {
    std::map<std::string, int> index, low;
    std::map<std::string, bool> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> out;
    int counter = 0;
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        if (auto it = succ.find(v); it != succ.end()) {
            for (const auto& w : it->second) {
                if (!index.count(w)) {
                    visit(w);
                    low[v] = std::min(low[v], low[w]);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::string> component;
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                component.push_back(w);
            } while (w != v);
            std::sort(component.begin(), component.end());
            out.push_back(std::move(component));
        }
    };
    for (const auto& v : nodes) {
        if (!index.count(v)) visit(v);
    }
    return out;
}

}  // namespace

PredicateSignature signature_of(const std::string& name, const RelationSchema& schema) {
    PredicateSignature sig;
    sig.name = name;
    sig.positional_arity = schema.positional;
    sig.named_attributes = schema.attributes;
    sig.has_functional_value = schema.functional;
    return sig;
}

std::string_view to_string(SemanticsMode mode) {
    return mode == SemanticsMode::Monotone ? "Monotone" : "SnapshotIterate";
}

bool NormalRule::aggregates() const {
    return std::any_of(column_aggregates.begin(), column_aggregates.end(), [](const auto& a) { return a.has_value(); });
}

bool RecursiveClique::contains(const std::string& name) const {
    return std::binary_search(predicates.begin(), predicates.end(), name);
}

std::optional<std::size_t> StratifiedPlan::clique_of_stratum(std::size_t stratum) const {
    if (stratum >= strata.size()) return std::nullopt;
    for (std::size_t i = 0; i < recursive_cliques.size(); ++i) {
        if (recursive_cliques[i].predicates == strata[stratum]) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> StratifiedPlan::stratum_of(const std::string& predicate) const {
    for (std::size_t i = 0; i < strata.size(); ++i) {
        if (std::binary_search(strata[i].begin(), strata[i].end(), predicate)) return i;
    }
    return std::nullopt;
}

SemanticsMode check_clique_semantics(const std::vector<std::string>& clique, const std::vector<NormalRule>& rules) {
    std::set<std::string> members(clique.begin(), clique.end());
    for (const auto& r : rules) {
        if (!members.count(r.head)) continue;
        for (const auto& agg : r.column_aggregates) {
            if (agg == AggregateKind::Sum) return SemanticsMode::SnapshotIterate;
        }
        bool monotone = true;
        for (const auto& variant : r.variants) {
            walk_occurrences(variant, 1, [&](const std::string& p, int polarity, bool nil_check) {
                if (nil_check) monotone = false;
                if (members.count(p) && polarity < 0) monotone = false;
            });
        }
        if (!monotone) return SemanticsMode::SnapshotIterate;
    }
    return SemanticsMode::Monotone;
}

std::vector<std::pair<std::string, int>> occurrence_polarities(const Rule& rule) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& a : rule.head.args) ast_term_polarities(a.expr, 1, out);
    if (rule.head_value) ast_term_polarities(rule.head_value->expr, 1, out);
    ast_polarities(rule.body, 1, out);
    return out;
}

Analysis analyze(const Program& program, const AnalyzeOptions& options) {
    Analysis out;

    // User functions.
    std::map<std::string, std::size_t> rule_count;
    for (const auto& r : program.rules) {
        ++rule_count[r.head.predicate];
        for (const auto& h : r.extra_heads) ++rule_count[h.predicate];
    }
    std::vector<bool> is_function(program.rules.size(), false);
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        const Rule& r = program.rules[i];
        if (!is_function_definition(r) || rule_count[r.head.predicate] != 1) continue;
        if (options.extensional.count(r.head.predicate)) continue;
        FunctionDefinition fn;
        for (const auto& a : r.head.args) fn.parameters.push_back(std::get<Variable>(a.expr.node).name);
        fn.body = r.head_value->expr;
        std::set<std::string> params(fn.parameters.begin(), fn.parameters.end());
        for (const auto& v : variables_of(fn.body)) {
            if (!params.count(v)) {
                fail(ErrorCode::UnsafeVariable, "variable '" + v + "' in function " + r.head.predicate + " is not a parameter",
                     program.span_of_rule(i));
            }
        }
        out.functions[r.head.predicate] = std::move(fn);
        is_function[i] = true;
    }

    // Split multi-head rules.
    std::vector<HeadedRule> headed;
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        if (is_function[i]) continue;
        const Rule& r = program.rules[i];
        headed.push_back({&r, &r.head, i});
        for (const auto& h : r.extra_heads) {
            if (r.head_value) {
                fail(ErrorCode::Compile, "a rule with several heads cannot carry a value", program.span_of_rule(i));
            }
            headed.push_back({&r, &h, i});
        }
    }

    // Intensional signatures from heads.
    for (const auto& hr : headed) {
        PredicateSignature sig;
        sig.name = hr.head->predicate;
        sig.is_intensional = true;
        for (const auto& a : hr.head->args) {
            if (a.positional()) {
                ++sig.positional_arity;
            } else {
                sig.named_attributes.push_back(a.attribute());
            }
        }
        sig.has_functional_value = hr.head == &hr.rule->head && hr.rule->head_value.has_value();
        auto [it, inserted] = out.signatures.emplace(sig.name, sig);
        if (!inserted) {
            const PredicateSignature& prev = it->second;
            std::set<std::string> a(prev.named_attributes.begin(), prev.named_attributes.end());
            std::set<std::string> b(sig.named_attributes.begin(), sig.named_attributes.end());
            if (prev.positional_arity != sig.positional_arity || a != b ||
                prev.has_functional_value != sig.has_functional_value) {
                fail(ErrorCode::ArityMismatch, "rules for " + sig.name + " disagree on its columns",
                     program.span_of_rule(hr.index));
            }
        }
    }

    // Extensional signatures.
    for (const auto& [name, schema] : options.extensional) {
        PredicateSignature ext = signature_of(name, schema);
        ext.is_extensional = true;
        auto it = out.signatures.find(name);
        if (it == out.signatures.end()) {
            out.signatures.emplace(name, ext);
            continue;
        }
        PredicateSignature& sig = it->second;
        std::set<std::string> a(sig.named_attributes.begin(), sig.named_attributes.end());
        std::set<std::string> b(ext.named_attributes.begin(), ext.named_attributes.end());
        if (sig.positional_arity != ext.positional_arity || a != b || sig.has_functional_value != ext.has_functional_value) {
            fail(ErrorCode::ArityMismatch, "loaded relation " + name + " does not match the columns of its rules",
                 std::nullopt);
        }
        sig.is_extensional = true;
    }

    // Usage: unknown predicates, inference, functional use.
    UsageCollector usage(out.functions);
    for (std::size_t i = 0; i < program.rules.size(); ++i) usage.rule(program.rules[i], program.span_of_rule(i));
    for (const auto& [name, fn] : out.functions) usage.function(fn);
    out.used_as_function = usage.called;
    for (const auto& [name, u] : usage.usages) {
        if (out.signatures.count(name)) continue;
        if (!options.infer_extensional) fail(ErrorCode::UnknownPredicate, "unknown predicate " + name, u.first_seen);
        PredicateSignature sig;
        sig.name = name;
        sig.positional_arity = u.positional;
        sig.named_attributes = u.attributes;
        sig.has_functional_value = u.functional;
        sig.is_extensional = true;
        out.signatures.emplace(name, std::move(sig));
    }
    for (const auto& d : program.directives) {
        if (!out.signatures.count(d.target_predicate)) {
            fail(ErrorCode::UnknownPredicate, "directive names unknown predicate " + d.target_predicate, std::nullopt);
        }
        if (d.stop_predicate && !out.signatures.count(*d.stop_predicate)) {
            fail(ErrorCode::UnknownPredicate, "unknown stop predicate " + *d.stop_predicate, std::nullopt);
        }
    }

    // Normalize and check safety.
    for (const auto& hr : headed) {
        auto where = program.span_of_rule(hr.index);
        const PredicateSignature& sig = out.signatures.at(hr.head->predicate);
        RelationSchema schema = sig.schema();
        Normalizer norm(out.signatures, out.functions, where);

        NormalRule nr;
        nr.head = sig.name;
        nr.source_rule = hr.index;
        nr.span = where;
        nr.head_columns.resize(schema.arity());
        nr.column_aggregates.resize(schema.arity());
        NormalConj head_lifts;
        for (const auto& a : hr.head->args) {
            std::size_t col = a.positional() ? std::get<std::size_t>(a.name) : *schema.attribute_column(a.attribute());
            nr.head_columns[col] = norm.lift(a.expr, head_lifts);
            nr.column_aggregates[col] = a.agg;
        }
        if (schema.functional) {
            const HeadArg& value = *hr.rule->head_value;
            nr.head_columns[schema.value_column()] = norm.lift(value.expr, head_lifts);
            nr.column_aggregates[schema.value_column()] = value.agg;
        }
        nr.variants = norm.conjunction(hr.rule->body);
        for (auto& v : nr.variants) v.insert(v.end(), head_lifts.begin(), head_lifts.end());

        for (const auto& v : nr.variants) {
            std::set<std::string> bound = check_safety(v, {}, where);
            std::string missing;
            for (const auto& t : nr.head_columns) {
                if (!all_bound(t, bound, &missing)) {
                    fail(ErrorCode::UnsafeVariable, "head variable '" + missing + "' is not bound by the body", where);
                }
            }
        }

        auto [agg_it, first] = out.column_aggregates.emplace(nr.head, nr.column_aggregates);
        if (!first && agg_it->second != nr.column_aggregates) {
            fail(ErrorCode::AggregationConflict, "rules for " + nr.head + " use different aggregators for one column",
                 where);
        }
        out.rules_by_predicate[nr.head].push_back(out.rules.size());
        out.rules.push_back(std::move(nr));
    }

    // Dependency graph.
    std::map<std::string, std::vector<std::string>> succ;
    std::vector<std::string> nodes;
    for (const auto& [name, sig] : out.signatures) nodes.push_back(name);
    for (const auto& r : out.rules) {
        for (const auto& variant : r.variants) {
            walk_occurrences(variant, 1, [&](const std::string& p, int polarity, bool) {
                out.plan.edges.emplace(p, r.head);
                if (polarity < 0) out.plan.negation_edges.emplace(p, r.head);
            });
        }
    }
    for (const auto& [from, to] : out.plan.edges) succ[from].push_back(to);

    // Strata: condensation in topological order, ties by smallest name.
    auto components = strongly_connected(nodes, succ);
    std::map<std::string, std::size_t> component_of;
    for (std::size_t c = 0; c < components.size(); ++c) {
        for (const auto& p : components[c]) component_of[p] = c;
    }
    std::vector<std::set<std::size_t>> comp_succ(components.size());
    std::vector<std::size_t> indegree(components.size(), 0);
    for (const auto& [from, to] : out.plan.edges) {
        std::size_t a = component_of.at(from), b = component_of.at(to);
        if (a != b && comp_succ[a].insert(b).second) ++indegree[b];
    }
    using Entry = std::pair<std::string, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (indegree[c] == 0) ready.emplace(components[c].front(), c);
    }
    while (!ready.empty()) {
        std::size_t c = ready.top().second;
        ready.pop();
        out.plan.strata.push_back(components[c]);
        for (std::size_t n : comp_succ[c]) {
            if (--indegree[n] == 0) ready.emplace(components[n].front(), n);
        }
    }

    // Recursive cliques.
    for (std::size_t s = 0; s < out.plan.strata.size(); ++s) {
        const auto& members = out.plan.strata[s];
        bool recursive = members.size() > 1 || out.plan.edges.count({members.front(), members.front()});
        if (!recursive) continue;
        RecursiveClique clique;
        clique.predicates = members;
        for (const auto& d : program.directives) {
            if (clique.contains(d.target_predicate)) {
                clique.directive = d;
                break;
            }
        }
        clique.mode = check_clique_semantics(clique.predicates, out.rules);
        out.plan.recursive_cliques.push_back(std::move(clique));
    }

    // Stop closures.
    for (auto& clique : out.plan.recursive_cliques) {
        if (!clique.directive || !clique.directive->stop_predicate) continue;
        const std::string& stop = *clique.directive->stop_predicate;
        std::size_t clique_stratum = *out.plan.stratum_of(clique.predicates.front());
        std::set<std::string> needed;
        std::vector<std::string> work{stop};
        while (!work.empty()) {
            std::string p = work.back();
            work.pop_back();
            if (clique.contains(p) || !needed.insert(p).second) continue;
            for (const auto& [from, to] : out.plan.edges) {
                if (to == p) work.push_back(from);
            }
        }
        for (std::size_t s = clique_stratum + 1; s < out.plan.strata.size(); ++s) {
            for (const auto& p : out.plan.strata[s]) {
                if (!needed.count(p)) continue;
                if (out.plan.clique_of_stratum(s)) {
                    fail(ErrorCode::Compile, "stop predicate " + stop + " depends on recursive predicate " + p,
                         std::nullopt);
                }
                clique.stop_closure.push_back(p);
            }
        }
    }

    // `P = nil` only inside P's own clique.
    for (const auto& r : out.rules) {
        for (const auto& variant : r.variants) {
            walk_occurrences(variant, 1, [&](const std::string& p, int, bool nil_check) {
                if (!nil_check) return;
                bool ok = false;
                for (const auto& c : out.plan.recursive_cliques) {
                    if (c.contains(p) && c.contains(r.head)) ok = true;
                }
                if (!ok) {
                    fail(ErrorCode::NilCheckOutsideClique,
                         p + " = nil is only allowed in rules of " + p + "'s own recursive clique", r.span);
                }
            });
        }
    }
    return out;
}

std::string describe(const Analysis& analysis) {
    std::ostringstream os;
    os << "strata:\n";
    for (std::size_t s = 0; s < analysis.plan.strata.size(); ++s) {
        os << "  " << s << ": ";
        const auto& members = analysis.plan.strata[s];
        for (std::size_t i = 0; i < members.size(); ++i) os << (i ? ", " : "") << members[i];
        const auto& sig = analysis.signatures.at(members.front());
        if (members.size() == 1 && sig.is_extensional && !sig.is_intensional) os << " (extensional)";
        os << '\n';
    }
    os << "recursive cliques:";
    if (analysis.plan.recursive_cliques.empty()) os << " none";
    os << '\n';
    for (const auto& c : analysis.plan.recursive_cliques) {
        os << "  {";
        for (std::size_t i = 0; i < c.predicates.size(); ++i) os << (i ? ", " : "") << c.predicates[i];
        os << "} mode=" << to_string(c.mode);
        if (c.directive) {
            os << " depth=" << c.directive->depth;
            if (c.directive->stop_predicate) os << " stop=" << *c.directive->stop_predicate;
        } else {
            os << " depth=default";
        }
        os << '\n';
    }
    if (!analysis.plan.negation_edges.empty()) {
        os << "negation edges:\n";
        for (const auto& [from, to] : analysis.plan.negation_edges) os << "  " << from << " -> " << to << '\n';
    }
    return os.str();
}

}  // namespace gtlog
