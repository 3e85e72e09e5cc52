#include "gtlog/plan.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gtlog/parser.hpp"

namespace gtlog {

namespace {

[[noreturn]] void compile_error(const std::string& message) { throw Error(ErrorCode::Compile, message); }

PlanPtr make(PlanNode node) { return std::make_shared<const PlanNode>(std::move(node)); }

std::optional<std::size_t> position(const std::vector<std::string>& columns, const std::string& name) {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Variable>) {
                if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
            } else if constexpr (std::is_same_v<T, FunctionalCall> || std::is_same_v<T, BuiltinCall>) {
                for (const auto& a : n.args) collect_vars(a, out);
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                for (const auto& a : n.items) collect_vars(a, out);
            }
        },
        t.node);
}

void collect_vars(const NormalConj& conj, std::vector<std::string>& out) {
    for (const auto& f : conj) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, NormalLiteral>) {
                    for (const auto& [col, t] : n.columns) collect_vars(t, out);
                } else if constexpr (std::is_same_v<T, NormalCompare>) {
                    collect_vars(n.left, out);
                    collect_vars(n.right, out);
                } else if constexpr (std::is_same_v<T, NormalIn>) {
                    collect_vars(n.element, out);
                    collect_vars(n.list, out);
                } else if constexpr (std::is_same_v<T, NormalNegation>) {
                    for (const auto& v : n.variants) collect_vars(v, out);
                }
            },
            f.node);
    }
}

bool all_in(const std::vector<std::string>& vars, const std::vector<std::string>& columns) {
    return std::all_of(vars.begin(), vars.end(), [&](const auto& v) { return position(columns, v).has_value(); });
}

std::vector<std::string> vars_of(const Term& t) {
    std::vector<std::string> out;
    collect_vars(t, out);
    return out;
}

Expr compile_expr(const Term& t, const std::vector<std::string>& columns) {
    return std::visit(
        [&](const auto& n) -> Expr {
            using T = std::decay_t<decltype(n)>;
            Expr e;
            if constexpr (std::is_same_v<T, Variable>) {
                auto slot = position(columns, n.name);
                if (!slot) compile_error("variable '" + n.name + "' is not bound here");
                e.kind = Expr::Kind::Slot;
                e.slot = *slot;
            } else if constexpr (std::is_same_v<T, Constant>) {
                e.kind = Expr::Kind::Const;
                e.value = n.value;
            } else if constexpr (std::is_same_v<T, BuiltinCall>) {
                e.kind = Expr::Kind::Call;
                e.fn = find_builtin(n.op);
                if (!e.fn) compile_error("unknown builtin " + n.op);
                for (const auto& a : n.args) e.args.push_back(compile_expr(a, columns));
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                e.kind = Expr::Kind::List;
                for (const auto& a : n.items) e.args.push_back(compile_expr(a, columns));
            } else {
                compile_error("functional call to " + n.predicate + " was not lifted");
            }
            return e;
        },
        t.node);
}

std::string term_text(const Term& t) { return pretty_print(t); }

// -- body compilation ---------------------------------------------------------

class BodyCompiler {
public:
    BodyCompiler(const Analysis& analysis, const NormalLiteral* delta) : analysis_(analysis), delta_(delta) {}

    PlanPtr compile(const NormalConj& conj, PlanPtr start) {
        plan_ = std::move(start);
        std::vector<const NormalLiteral*> literals;
        for (const auto& f : conj) {
            if (const auto* nil = std::get_if<NormalNilCheck>(&f.node)) {
                plan_ = make(PlanNode{NilGuardNode{plan_, nil->predicate}, plan_->columns});
            } else if (const auto* lit = std::get_if<NormalLiteral>(&f.node)) {
                literals.push_back(lit);
            } else if (std::holds_alternative<NormalCompare>(f.node) || std::holds_alternative<NormalIn>(f.node)) {
                filters_.push_back(&f);
            } else {
                negations_.push_back(&std::get<NormalNegation>(f.node));
            }
        }
        apply_filters();
        bool first = true;
        while (!literals.empty()) {
            std::size_t pick = 0;
            auto delta_it = std::find(literals.begin(), literals.end(), delta_);
            if (first && delta_it != literals.end()) {
                pick = static_cast<std::size_t>(delta_it - literals.begin());
            } else {
                std::size_t best = 0;
                for (std::size_t i = 0; i < literals.size(); ++i) {
                    std::vector<std::string> vars;
                    for (const auto& [col, t] : literals[i]->columns) collect_vars(t, vars);
                    std::size_t shared = 0;
                    for (const auto& v : vars) shared += position(plan_->columns, v).has_value();
                    if (shared > best) {
                        best = shared;
                        pick = i;
                    }
                }
            }
            join(*literals[pick]);
            literals.erase(literals.begin() + static_cast<std::ptrdiff_t>(pick));
            first = false;
            apply_filters();
        }
        for (const auto* neg : negations_) anti_join(*neg);
        if (!filters_.empty()) compile_error("a comparison uses variables that are never bound");
        return plan_;
    }

private:
    void join(const NormalLiteral& lit) {
        const auto& sig = analysis_.signatures.at(lit.predicate);
        RelationSchema schema = sig.schema();
        ScanNode scan;
        scan.predicate = lit.predicate;
        scan.source = &lit == delta_ ? ScanSource::Delta : ScanSource::Current;
        scan.pattern.resize(schema.arity());
        scan.column_names = schema.column_names();
        std::vector<std::string> columns;
        for (const auto& [col, t] : lit.columns) {
            if (scan.pattern[col]) compile_error(lit.predicate + " column " + scan.column_names[col] + " is given twice");
            scan.pattern[col] = t;
        }
        for (const auto& p : scan.pattern) {
            if (p) {
                if (const auto* v = std::get_if<Variable>(&p->node); v && !position(columns, v->name)) {
                    columns.push_back(v->name);
                }
            }
        }
        PlanPtr right = make(PlanNode{std::move(scan), columns});
        if (std::holds_alternative<UnitNode>(plan_->node)) {
            plan_ = right;
            return;
        }
        std::vector<std::string> on, out = plan_->columns;
        for (const auto& c : columns) {
            if (position(plan_->columns, c)) {
                on.push_back(c);
            } else {
                out.push_back(c);
            }
        }
        plan_ = make(PlanNode{JoinNode{plan_, right, on}, out});
    }

    void anti_join(const NormalNegation& neg) {
        std::vector<std::string> inner;
        for (const auto& v : neg.variants) collect_vars(v, inner);
        std::vector<std::string> correlated;
        for (const auto& c : plan_->columns) {
            if (std::find(inner.begin(), inner.end(), c) != inner.end()) correlated.push_back(c);
        }
        std::vector<PlanPtr> branches;
        for (const auto& variant : neg.variants) {
            PlanPtr seed = make(PlanNode{SeedNode{}, correlated});
            PlanPtr body = BodyCompiler(analysis_, nullptr).compile(variant, seed);
            if (neg.variants.size() > 1) {
                std::vector<std::size_t> slots;
                for (std::size_t i = 0; i < correlated.size(); ++i) slots.push_back(i);
                body = make(PlanNode{ProjectNode{body, slots, std::nullopt, std::nullopt}, correlated});
            }
            branches.push_back(body);
        }
        PlanPtr right = branches.size() == 1 ? branches.front()
                                             : make(PlanNode{UnionAllNode{branches}, correlated});
        plan_ = make(PlanNode{AntiJoinNode{plan_, right, correlated}, plan_->columns});
    }

    void apply_filters() {
        for (bool changed = true; changed;) {
            changed = false;
            for (auto it = filters_.begin(); it != filters_.end();) {
                if (try_filter(**it)) {
                    it = filters_.erase(it);
                    changed = true;
                } else {
                    ++it;
                }
            }
        }
    }

    bool bound(const Term& t) const { return all_in(vars_of(t), plan_->columns); }

    static const std::string* lone_var(const Term& t) {
        const auto* v = std::get_if<Variable>(&t.node);
        return v ? &v->name : nullptr;
    }

    void compute(const std::string& column, const Term& t) {
        auto cols = plan_->columns;
        cols.push_back(column);
        plan_ = make(PlanNode{ComputeNode{plan_, column, compile_expr(t, plan_->columns), term_text(t)}, cols});
    }

    bool try_filter(const NormalFormula& f) {
        if (const auto* c = std::get_if<NormalCompare>(&f.node)) {
            bool lb = bound(c->left), rb = bound(c->right);
            if (lb && rb) {
                Expr e;
                e.kind = Expr::Kind::Compare;
                e.op = c->op;
                e.args = {compile_expr(c->left, plan_->columns), compile_expr(c->right, plan_->columns)};
                std::string text = pretty_print(BodyFormula{Compare{c->left, c->op, c->right}});
                plan_ = make(PlanNode{SelectNode{plan_, std::move(e), std::move(text)}, plan_->columns});
                return true;
            }
            if (c->op != CompareOp::Eq) return false;
            if (const auto* l = lone_var(c->left); l && rb) {
                compute(*l, c->right);
                return true;
            }
            if (const auto* r = lone_var(c->right); r && lb) {
                compute(*r, c->left);
                return true;
            }
            return false;
        }
        const auto& in = std::get<NormalIn>(f.node);
        if (!bound(in.list)) return false;
        if (bound(in.element)) {
            Expr e;
            e.kind = Expr::Kind::Member;
            e.args = {compile_expr(in.element, plan_->columns), compile_expr(in.list, plan_->columns)};
            std::string text = pretty_print(BodyFormula{In{in.element, in.list}});
            plan_ = make(PlanNode{SelectNode{plan_, std::move(e), std::move(text)}, plan_->columns});
            return true;
        }
        if (const auto* v = lone_var(in.element)) {
            auto cols = plan_->columns;
            cols.push_back(*v);
            plan_ = make(
                PlanNode{UnnestNode{plan_, *v, compile_expr(in.list, plan_->columns), term_text(in.list)}, cols});
            return true;
        }
        return false;
    }

    const Analysis& analysis_;
    const NormalLiteral* delta_;
    PlanPtr plan_;
    std::vector<const NormalFormula*> filters_;
    std::vector<const NormalNegation*> negations_;
};

PlanPtr project_head(PlanPtr body, const NormalRule& rule, const RelationSchema& schema) {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < rule.head_columns.size(); ++i) {
        const Term& t = rule.head_columns[i];
        if (const auto* v = std::get_if<Variable>(&t.node)) {
            auto slot = position(body->columns, v->name);
            if (!slot) compile_error("head variable '" + v->name + "' is not bound");
            slots.push_back(*slot);
            continue;
        }
        std::string hidden = "_h" + std::to_string(i);
        auto cols = body->columns;
        cols.push_back(hidden);
        body = make(PlanNode{ComputeNode{body, hidden, compile_expr(t, body->columns), term_text(t)}, cols});
        slots.push_back(body->columns.size() - 1);
    }
    return make(PlanNode{ProjectNode{body, slots, rule.source_rule, rule.span}, schema.column_names()});
}

PlanPtr finish(std::vector<PlanPtr> branches, const std::vector<std::optional<AggregateKind>>& aggregates,
               const std::vector<std::string>& columns) {
    PlanPtr input = branches.size() == 1 ? branches.front() : make(PlanNode{UnionAllNode{std::move(branches)}, columns});
    bool aggregating = std::any_of(aggregates.begin(), aggregates.end(), [](const auto& a) { return a.has_value(); });
    if (!aggregating) return make(PlanNode{DistinctNode{input}, columns});
    GroupAggregateNode g{input, {}, {}};
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
        if (aggregates[i]) {
            g.aggregations.emplace_back(i, *aggregates[i]);
        } else {
            g.keys.push_back(i);
        }
    }
    return make(PlanNode{std::move(g), columns});
}

PlanPtr unit() { return make(PlanNode{UnitNode{}, {}}); }

}  // namespace

PlanPtr compile_rule(const NormalRule& rule, const Analysis& analysis) {
    RelationSchema schema = analysis.signatures.at(rule.head).schema();
    std::vector<PlanPtr> branches;
    for (const auto& variant : rule.variants) {
        branches.push_back(project_head(BodyCompiler(analysis, nullptr).compile(variant, unit()), rule, schema));
    }
    return finish(std::move(branches), rule.column_aggregates, schema.column_names());
}

PlanPtr compile_predicate(const std::string& predicate, const Analysis& analysis) {
    auto sig_it = analysis.signatures.find(predicate);
    if (sig_it == analysis.signatures.end()) throw Error(ErrorCode::UnknownPredicate, "unknown predicate " + predicate);
    const PredicateSignature& sig = sig_it->second;
    RelationSchema schema = sig.schema();
    std::vector<PlanPtr> branches;
    if (auto it = analysis.rules_by_predicate.find(predicate); it != analysis.rules_by_predicate.end()) {
        for (std::size_t r : it->second) branches.push_back(compile_rule(analysis.rules[r], analysis));
    }
    if (sig.is_extensional) {
        ScanNode scan;
        scan.predicate = predicate;
        scan.source = ScanSource::Base;
        scan.column_names = schema.column_names();
        for (const auto& c : scan.column_names) scan.pattern.emplace_back(var(c));
        branches.push_back(make(PlanNode{std::move(scan), schema.column_names()}));
    }
    if (branches.size() == 1) return branches.front();
    auto agg_it = analysis.column_aggregates.find(predicate);
    std::vector<std::optional<AggregateKind>> aggregates(schema.arity());
    if (agg_it != analysis.column_aggregates.end()) aggregates = agg_it->second;
    if (branches.empty()) return finish({make(PlanNode{UnionAllNode{}, schema.column_names()})}, aggregates,
                                        schema.column_names());
    return finish(std::move(branches), aggregates, schema.column_names());
}

PlanPtr compile_delta(const std::string& predicate, const Analysis& analysis, const RecursiveClique& clique) {
    RelationSchema schema = analysis.signatures.at(predicate).schema();
    std::vector<PlanPtr> branches;
    auto it = analysis.rules_by_predicate.find(predicate);
    if (it == analysis.rules_by_predicate.end()) return nullptr;
    for (std::size_t r : it->second) {
        const NormalRule& rule = analysis.rules[r];
        for (const auto& variant : rule.variants) {
            for (const auto& f : variant) {
                const auto* lit = std::get_if<NormalLiteral>(&f.node);
                if (!lit || !clique.contains(lit->predicate)) continue;
                PlanPtr body = BodyCompiler(analysis, lit).compile(variant, unit());
                branches.push_back(project_head(body, rule, schema));
            }
        }
    }
    if (branches.empty()) return nullptr;
    return finish(std::move(branches), std::vector<std::optional<AggregateKind>>(schema.arity()),
                  schema.column_names());
}

// -- explain ------------------------------------------------------------------

namespace {

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
    return out;
}

void explain_node(const PlanNode& plan, int depth, std::ostringstream& os) {
    os << std::string(static_cast<std::size_t>(depth) * 2, ' ');
    std::vector<const PlanNode*> children;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, UnitNode>) {
                os << "Unit";
            } else if constexpr (std::is_same_v<T, SeedNode>) {
                os << "Seed (" << join_names(plan.columns) << ")";
            } else if constexpr (std::is_same_v<T, ScanNode>) {
                os << "Scan " << n.predicate << "(";
                bool first = true;
                for (std::size_t i = 0; i < n.pattern.size(); ++i) {
                    os << (first ? "" : ", ");
                    first = false;
                    if (n.column_names[i][0] != '$') os << n.column_names[i] << ": ";
                    os << (n.pattern[i] ? term_text(*n.pattern[i]) : "_");
                }
                os << ")";
                if (n.source == ScanSource::Delta) os << " [delta]";
                if (n.source == ScanSource::Base) os << " [base]";
            } else if constexpr (std::is_same_v<T, JoinNode>) {
                os << "Join on (" << join_names(n.on) << ")";
                children = {n.left.get(), n.right.get()};
            } else if constexpr (std::is_same_v<T, AntiJoinNode>) {
                os << "AntiJoin on (" << join_names(n.correlated) << ")";
                children = {n.left.get(), n.right.get()};
            } else if constexpr (std::is_same_v<T, SelectNode>) {
                os << "Select " << n.text;
                children = {n.input.get()};
            } else if constexpr (std::is_same_v<T, ComputeNode>) {
                os << "Compute " << n.column << " <- " << n.text;
                children = {n.input.get()};
            } else if constexpr (std::is_same_v<T, UnnestNode>) {
                os << "Unnest " << n.column << " <- " << n.text;
                children = {n.input.get()};
            } else if constexpr (std::is_same_v<T, NilGuardNode>) {
                os << "NilGuard " << n.predicate << " = nil";
                children = {n.input.get()};
            } else if constexpr (std::is_same_v<T, ProjectNode>) {
                os << "Project [";
                for (std::size_t i = 0; i < n.slots.size(); ++i) {
                    os << (i ? ", " : "") << plan.columns[i] << " <- " << n.input->columns[n.slots[i]];
                }
                os << "]";
                if (n.rule) os << " rule " << *n.rule;
                children = {n.input.get()};
            } else if constexpr (std::is_same_v<T, UnionAllNode>) {
                os << "UnionAll";
                for (const auto& b : n.branches) children.push_back(b.get());
            } else if constexpr (std::is_same_v<T, DistinctNode>) {
                os << "Distinct";
                children = {n.input.get()};
            } else if constexpr (std::is_same_v<T, GroupAggregateNode>) {
                os << "GroupAggregate keys (";
                for (std::size_t i = 0; i < n.keys.size(); ++i) os << (i ? ", " : "") << plan.columns[n.keys[i]];
                os << ") aggregate (";
                for (std::size_t i = 0; i < n.aggregations.size(); ++i) {
                    os << (i ? ", " : "") << to_string(n.aggregations[i].second) << " "
                       << plan.columns[n.aggregations[i].first];
                }
                os << ")";
                children = {n.input.get()};
            }
        },
        plan.node);
    os << '\n';
    for (const auto* c : children) explain_node(*c, depth + 1, os);
}

}  // namespace

std::string explain(const PlanPtr& plan) {
    std::ostringstream os;
    if (plan) explain_node(*plan, 0, os);
    return os.str();
}

// -- evaluation ---------------------------------------------------------------

Value evaluate(const Expr& expr, std::span<const Value> row) {
    switch (expr.kind) {
        case Expr::Kind::Slot: return row[expr.slot];
        case Expr::Kind::Const: return expr.value;
        case Expr::Kind::Call: {
            std::vector<Value> args;
            args.reserve(expr.args.size());
            for (const auto& a : expr.args) args.push_back(evaluate(a, row));
            return expr.fn->fn(args);
        }
        case Expr::Kind::List: {
            Value::List items;
            items.reserve(expr.args.size());
            for (const auto& a : expr.args) items.push_back(evaluate(a, row));
            return Value(std::move(items));
        }
        case Expr::Kind::Compare: {
            Value l = evaluate(expr.args[0], row);
            Value r = evaluate(expr.args[1], row);
            switch (expr.op) {
                case CompareOp::Eq: return equal_loose(l, r);
                case CompareOp::Ne: return !equal_loose(l, r);
                case CompareOp::Lt: return compare_ordered(l, r) < 0;
                case CompareOp::Le: return compare_ordered(l, r) <= 0;
                case CompareOp::Gt: return compare_ordered(l, r) > 0;
                case CompareOp::Ge: return compare_ordered(l, r) >= 0;
            }
            return false;
        }
        case Expr::Kind::Member: {
            Value e = evaluate(expr.args[0], row);
            Value l = evaluate(expr.args[1], row);
            if (!l.is_list()) {
                throw Error(ErrorCode::RuntimeType, "'in' expects a list, got " + std::string(type_name(l.type())) +
                                                        " " + literal(l));
            }
            for (const auto& item : l.as_list()) {
                if (equal_loose(e, item)) return true;
            }
            return false;
        }
    }
    return Value::nil();
}

namespace {

void dedupe(std::vector<Tuple>& rows) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

using TupleSet = std::unordered_set<Tuple, TupleHash>;

/// How a scan pattern lines up with an already-bound binding table.
struct ScanShape {
    std::vector<std::size_t> key_columns;  // relation columns matched by a lookup
    std::vector<Value> constants;          // leading part of each lookup key
    std::vector<std::size_t> bound_slots;  // outer slots for the rest of the key
    std::vector<std::pair<std::size_t, std::size_t>> equal_columns;  // repeated variables
    std::vector<std::size_t> output_columns;                          // new variables
    bool needs_dedupe = false;
};

ScanShape shape_of(const ScanNode& scan, const std::vector<std::string>& outer) {
    ScanShape s;
    std::map<std::string, std::size_t> first;
    std::vector<std::pair<std::size_t, std::string>> bound;
    for (std::size_t c = 0; c < scan.pattern.size(); ++c) {
        const auto& p = scan.pattern[c];
        if (!p) {
            s.needs_dedupe = true;
            continue;
        }
        if (const auto* k = std::get_if<Constant>(&p->node)) {
            s.key_columns.push_back(c);
            s.constants.push_back(k->value);
            continue;
        }
        const std::string& name = std::get<Variable>(p->node).name;
        if (auto it = first.find(name); it != first.end()) {
            s.equal_columns.emplace_back(it->second, c);
            s.needs_dedupe = true;
            continue;
        }
        first[name] = c;
        if (auto slot = position(outer, name)) {
            bound.emplace_back(c, name);
            s.bound_slots.push_back(*slot);
        } else {
            s.output_columns.push_back(c);
        }
    }
    for (const auto& [c, name] : bound) s.key_columns.push_back(c);
    // With bound variables, rows for one outer row differ only in new columns.
    return s;
}

class Evaluator {
public:
    explicit Evaluator(const EvalContext& ctx) : ctx_(ctx) {}

    Table run(const PlanNode& plan) {
        return std::visit([&](const auto& n) { return eval(n, plan); }, plan.node);
    }

private:
    const Relation* relation(const ScanNode& scan) const {
        const Snapshot* snap = scan.source == ScanSource::Current ? ctx_.current
                               : scan.source == ScanSource::Delta ? ctx_.delta
                                                                  : ctx_.base;
        return snap ? snap->find(scan.predicate) : nullptr;
    }

    /// Joins every outer row with the matching rows of a scan.
    Table probe(const Table& outer, const ScanNode& scan, const Relation* rel) {
        ScanShape s = shape_of(scan, outer.columns);
        Table out;
        out.columns = outer.columns;
        for (std::size_t c : s.output_columns) out.columns.push_back(std::get<Variable>(scan.pattern[c]->node).name);
        if (!rel || rel->empty() || outer.rows.empty()) return out;
        auto emit = [&](const Tuple& o, const Tuple& row) {
            for (const auto& [a, b] : s.equal_columns) {
                if (!(row[a] == row[b])) return;
            }
            Tuple t;
            t.reserve(out.columns.size());
            t.insert(t.end(), o.begin(), o.end());
            for (std::size_t c : s.output_columns) t.push_back(row[c]);
            out.rows.push_back(std::move(t));
        };
        if (s.key_columns.empty()) {
            for (const auto& o : outer.rows) {
                for (const auto& row : rel->rows()) emit(o, row);
            }
        } else {
            const auto& index = rel->index(s.key_columns);
            Tuple key = s.constants;
            key.resize(s.key_columns.size());
            for (const auto& o : outer.rows) {
                for (std::size_t i = 0; i < s.bound_slots.size(); ++i) key[s.constants.size() + i] = o[s.bound_slots[i]];
                auto it = index.find(key);
                if (it == index.end()) continue;
                for (std::uint32_t r : it->second) emit(o, rel->rows()[r]);
            }
        }
        if (s.needs_dedupe) dedupe(out.rows);
        return out;
    }

    Table eval(const UnitNode&, const PlanNode&) { return Table{{}, {Tuple{}}}; }

    Table eval(const SeedNode&, const PlanNode& plan) {
        if (!seed_) return Table{plan.columns, {}};
        return *seed_;
    }

    Table eval(const ScanNode& scan, const PlanNode&) {
        static const Table unit_table{{}, {Tuple{}}};
        return probe(unit_table, scan, relation(scan));
    }

    Table eval(const JoinNode& join, const PlanNode& plan) {
        const auto* right_scan = std::get_if<ScanNode>(&join.right->node);
        const auto* left_scan = std::get_if<ScanNode>(&join.left->node);
        if (right_scan && left_scan) {
            const Relation* l = relation(*left_scan);
            const Relation* r = relation(*right_scan);
            std::size_t ls = l ? l->size() : 0, rs = r ? r->size() : 0;
            if (ls > rs) {
                Table swapped = probe(eval(*right_scan, *join.right), *left_scan, l);
                return reorder(std::move(swapped), plan.columns);
            }
        }
        if (right_scan) {
            if (std::holds_alternative<SeedNode>(join.left->node) && seed_) {
                return probe(*seed_, *right_scan, relation(*right_scan));
            }
            return probe(run(*join.left), *right_scan, relation(*right_scan));
        }
        Table left = run(*join.left);
        Table right = run(*join.right);
        std::vector<std::size_t> lk, rk, extra;
        for (const auto& v : join.on) {
            lk.push_back(*position(left.columns, v));
            rk.push_back(*position(right.columns, v));
        }
        for (std::size_t i = 0; i < right.columns.size(); ++i) {
            if (std::find(join.on.begin(), join.on.end(), right.columns[i]) == join.on.end()) extra.push_back(i);
        }
        std::unordered_map<Tuple, std::vector<std::size_t>, TupleHash> index;
        for (std::size_t i = 0; i < right.rows.size(); ++i) {
            Tuple key;
            for (std::size_t k : rk) key.push_back(right.rows[i][k]);
            index[key].push_back(i);
        }
        Table out{plan.columns, {}};
        for (const auto& row : left.rows) {
            Tuple key;
            for (std::size_t k : lk) key.push_back(row[k]);
            auto it = index.find(key);
            if (it == index.end()) continue;
            for (std::size_t i : it->second) {
                Tuple t = row;
                for (std::size_t e : extra) t.push_back(right.rows[i][e]);
                out.rows.push_back(std::move(t));
            }
        }
        return out;
    }

    static Table reorder(Table table, const std::vector<std::string>& columns) {
        std::vector<std::size_t> perm;
        for (const auto& c : columns) perm.push_back(*position(table.columns, c));
        Table out{columns, {}};
        out.rows.reserve(table.rows.size());
        for (auto& row : table.rows) {
            Tuple t;
            t.reserve(perm.size());
            for (std::size_t p : perm) t.push_back(std::move(row[p]));
            out.rows.push_back(std::move(t));
        }
        dedupe(out.rows);
        return out;
    }

    Table eval(const AntiJoinNode& anti, const PlanNode&) {
        Table left = run(*anti.left);
        if (left.rows.empty()) return left;
        std::vector<std::size_t> ls;
        for (const auto& c : anti.correlated) ls.push_back(*position(left.columns, c));
        auto key_of = [](const Tuple& row, const std::vector<std::size_t>& slots) {
            Tuple key;
            key.reserve(slots.size());
            for (std::size_t s : slots) key.push_back(row[s]);
            return key;
        };
        Table seed{anti.correlated, {}};
        seed.rows.reserve(left.rows.size());
        for (const auto& row : left.rows) seed.rows.push_back(key_of(row, ls));
        dedupe(seed.rows);

        const Table* saved = seed_;
        seed_ = &seed;
        Table right;
        try {
            right = run(*anti.right);
        } catch (...) {
            seed_ = saved;
            throw;
        }
        seed_ = saved;

        std::vector<std::size_t> rs;
        for (const auto& c : anti.correlated) rs.push_back(*position(right.columns, c));
        TupleSet matched;
        for (const auto& row : right.rows) matched.insert(key_of(row, rs));
        Table out{left.columns, {}};
        for (auto& row : left.rows) {
            if (!matched.count(key_of(row, ls))) out.rows.push_back(std::move(row));
        }
        return out;
    }

    Table eval(const SelectNode& sel, const PlanNode&) {
        Table in = run(*sel.input);
        Table out{in.columns, {}};
        for (auto& row : in.rows) {
            Value v = evaluate(sel.condition, row);
            if (v.is_bool() && v.as_bool()) out.rows.push_back(std::move(row));
        }
        return out;
    }

    Table eval(const ComputeNode& comp, const PlanNode& plan) {
        Table in = run(*comp.input);
        in.columns = plan.columns;
        for (auto& row : in.rows) row.push_back(evaluate(comp.expr, row));
        return in;
    }

    Table eval(const UnnestNode& un, const PlanNode& plan) {
        Table in = run(*un.input);
        Table out{plan.columns, {}};
        for (const auto& row : in.rows) {
            Value l = evaluate(un.list, row);
            if (!l.is_list()) {
                throw Error(ErrorCode::RuntimeType,
                            "'in' expects a list, got " + std::string(type_name(l.type())) + " " + literal(l));
            }
            for (const auto& item : l.as_list()) {
                Tuple t = row;
                t.push_back(item);
                out.rows.push_back(std::move(t));
            }
        }
        dedupe(out.rows);
        return out;
    }

    Table eval(const NilGuardNode& guard, const PlanNode& plan) {
        if (ctx_.current && ctx_.current->contains(guard.predicate)) return Table{plan.columns, {}};
        return run(*guard.input);
    }

    Table eval(const ProjectNode& proj, const PlanNode& plan) {
        Table in;
        try {
            in = run(*proj.input);
        } catch (const Error& e) {
            if (e.where() || !proj.span) throw;
            throw Error(e.code(), e.detail(), proj.span);
        }
        Table out{plan.columns, {}};
        out.rows.reserve(in.rows.size());
        for (const auto& row : in.rows) {
            Tuple t;
            t.reserve(proj.slots.size());
            for (std::size_t s : proj.slots) t.push_back(row[s]);
            out.rows.push_back(std::move(t));
        }
        return out;
    }

    Table eval(const UnionAllNode& uni, const PlanNode& plan) {
        Table out{plan.columns, {}};
        for (const auto& b : uni.branches) {
            Table t = run(*b);
            if (out.rows.empty()) {
                out.rows = std::move(t.rows);
            } else {
                out.rows.insert(out.rows.end(), std::make_move_iterator(t.rows.begin()),
                                std::make_move_iterator(t.rows.end()));
            }
        }
        return out;
    }

    Table eval(const DistinctNode& d, const PlanNode& plan) {
        Table in = run(*d.input);
        in.columns = plan.columns;
        dedupe(in.rows);
        return in;
    }

    Table eval(const GroupAggregateNode& g, const PlanNode& plan) {
        Table in = run(*g.input);
        std::unordered_map<Tuple, std::size_t, TupleHash> group_of;
        Table out{plan.columns, {}};
        // Sum inputs are folded once per group so row order cannot change a float total.
        std::vector<std::vector<std::vector<Value>>> sums;
        bool has_sum = std::any_of(g.aggregations.begin(), g.aggregations.end(),
                                   [](const auto& a) { return a.second == AggregateKind::Sum; });
        for (const auto& row : in.rows) {
            Tuple key;
            key.reserve(g.keys.size());
            for (std::size_t k : g.keys) key.push_back(row[k]);
            auto [it, fresh] = group_of.emplace(std::move(key), out.rows.size());
            if (fresh) {
                out.rows.push_back(row);
                if (has_sum) sums.emplace_back(g.aggregations.size());
            }
            Tuple& acc = out.rows[it->second];
            for (std::size_t a = 0; a < g.aggregations.size(); ++a) {
                const auto& [col, kind] = g.aggregations[a];
                if (kind == AggregateKind::Sum) {
                    sums[it->second][a].push_back(row[col]);
                } else if (!fresh) {
                    acc[col] = combine(kind, acc[col], row[col]);
                }
            }
        }
        if (has_sum) {
            for (std::size_t r = 0; r < out.rows.size(); ++r) {
                for (std::size_t a = 0; a < g.aggregations.size(); ++a) {
                    const auto& [col, kind] = g.aggregations[a];
                    if (kind == AggregateKind::Sum) out.rows[r][col] = fold_aggregate(kind, sums[r][a]);
                }
            }
        }
        return out;
    }

    const EvalContext& ctx_;
    const Table* seed_ = nullptr;
};

}  // namespace

Table evaluate_plan(const PlanNode& plan, const EvalContext& context) { return Evaluator(context).run(plan); }

Relation evaluate_relation(const PlanNode& plan, const EvalContext& context, const std::string& name,
                           const RelationSchema& schema) {
    Table t = evaluate_plan(plan, context);
    return Relation(name, schema, std::move(t.rows));
}

}  // namespace gtlog
