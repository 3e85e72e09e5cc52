#include "gtlog/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstring>
#include <optional>

namespace gtlog {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class TokenKind { Upper, Lower, Int, Float, String, Symbol, End };

struct Token {
    TokenKind kind;
    std::string text;
    SourceLocation loc;
    Value literal;  // Int / Float / String payload
};

constexpr const char* kSymbols[] = {
    ":-", "=>", "!=", "<=", ">=", "++", "+=", "(", ")", "[", "]", ",", ";", ":",
    "?",  "|",  "~",  "=",  "<",  ">",  "+",  "-", "*", "/", "@",
};

[[noreturn]] void syntax_error(const std::string& message, SourceLocation loc) {
    throw Error(ErrorCode::Syntax, message, loc);
}

std::string describe(const Token& t) {
    switch (t.kind) {
        case TokenKind::End: return "end of input";
        case TokenKind::String: return literal(t.literal);
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            SourceLocation loc{line_, col_};
            if (pos_ >= text_.size()) {
                out.push_back(Token{TokenKind::End, "", loc, {}});
                return out;
            }
            out.push_back(next(loc));
        }
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_space() {
        for (;;) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && peek() != '\n') advance();
            } else {
                return;
            }
        }
    }

    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    Token next(SourceLocation loc) {
        char c = peek();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (ident_char(peek())) advance();
            std::string word(text_.substr(start, pos_ - start));
            bool upper = std::isupper(static_cast<unsigned char>(word.front()));
            return Token{upper ? TokenKind::Upper : TokenKind::Lower, std::move(word), loc, {}};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return number(loc);
        if (c == '"') return string_literal(loc);
        if (text_.substr(pos_, 4) == "~in~") {
            advance(4);
            return Token{TokenKind::Lower, "in", loc, {}};
        }
        for (const char* sym : kSymbols) {
            std::size_t n = std::strlen(sym);
            if (text_.substr(pos_, n) == sym) {
                advance(n);
                return Token{TokenKind::Symbol, sym, loc, {}};
            }
        }
        syntax_error(std::string("unexpected character '") + c + "'", loc);
    }

    Token number(SourceLocation loc) {
        std::size_t start = pos_;
        bool is_float = false;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            is_float = true;
            advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t k = 1;
            if (peek(k) == '+' || peek(k) == '-') ++k;
            if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
                is_float = true;
                advance(k);
                while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
            }
        }
        std::string text(text_.substr(start, pos_ - start));
        if (ident_char(peek())) syntax_error("malformed number '" + text + peek() + "'", loc);
        Token t{is_float ? TokenKind::Float : TokenKind::Int, text, loc, {}};
        if (is_float) {
            double d = 0;
            std::from_chars(text.data(), text.data() + text.size(), d);
            t.literal = Value(d);
        } else {
            std::int64_t i = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
            if (ec != std::errc()) syntax_error("integer literal out of range: " + text, loc);
            t.literal = Value(i);
        }
        return t;
    }

    Token string_literal(SourceLocation loc) {
        advance();  // opening quote
        std::string out;
        for (;;) {
            if (pos_ >= text_.size() || peek() == '\n') syntax_error("unterminated string literal", loc);
            char c = peek();
            advance();
            if (c == '"') break;
            if (c == '\\') {
                char e = peek();
                advance();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: syntax_error(std::string("unknown escape '\\") + e + "'", loc);
                }
            } else {
                out += c;
            }
        }
        Token t{TokenKind::String, out, loc, {}};
        t.literal = Value(std::move(out));
        return t;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

int binary_precedence(const Token& t) {
    if (t.kind != TokenKind::Symbol) return 0;
    if (t.text == "++") return 1;
    if (t.text == "+" || t.text == "-") return 2;
    if (t.text == "*" || t.text == "/") return 3;
    return 0;
}

std::optional<CompareOp> compare_op(const Token& t) {
    if (t.kind != TokenKind::Symbol) return std::nullopt;
    if (t.text == "=") return CompareOp::Eq;
    if (t.text == "!=") return CompareOp::Ne;
    if (t.text == "<") return CompareOp::Lt;
    if (t.text == "<=") return CompareOp::Le;
    if (t.text == ">") return CompareOp::Gt;
    if (t.text == ">=") return CompareOp::Ge;
    return std::nullopt;
}

bool is_keyword(const std::string& word) {
    return word == "in" || word == "nil" || word == "true" || word == "false";
}

struct CallSyntax {
    std::string name;
    std::vector<Term> positional;
    std::vector<NamedArg> named;
    SourceLocation loc;
};

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(Lexer(text).run()) {}

    Program program() {
        Program out;
        while (!at_end()) {
            SourceLocation loc = peek().loc;
            if (is_symbol("@")) {
                out.directives.push_back(directive());
                out.directive_spans.push_back(loc);
            } else {
                out.rules.push_back(rule());
                out.rule_spans.push_back(loc);
            }
        }
        return out;
    }

    Rule single_rule() {
        Rule r = rule(/*require_semicolon=*/false);
        if (!at_end()) fail_here("expected end of input");
        return r;
    }

    Term single_term() {
        Term t = expression();
        if (!at_end()) fail_here("expected end of input");
        return t;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }

    bool at_end() const { return peek().kind == TokenKind::End; }

    bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Symbol && t.text == s;
    }

    bool is_word(std::string_view s, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return (t.kind == TokenKind::Lower || t.kind == TokenKind::Upper) && t.text == s;
    }

    bool accept(std::string_view sym) {
        if (is_symbol(sym)) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail_here(const std::string& expected) const {
        syntax_error("unexpected " + describe(peek()) + ", " + expected, peek().loc);
    }

    void expect(std::string_view sym) {
        if (!accept(sym)) fail_here("expected '" + std::string(sym) + "'");
    }

    std::string expect_upper(const char* what) {
        if (peek().kind != TokenKind::Upper) fail_here(std::string("expected ") + what);
        return tokens_[pos_++].text;
    }

    // -- directives ---------------------------------------------------------

    Directive directive() {
        expect("@");
        std::string name = expect_upper("directive name");
        if (name != "Recursive") {
            syntax_error("unsupported directive '@" + name + "'", tokens_[pos_ - 1].loc);
        }
        Directive d;
        expect("(");
        d.target_predicate = expect_upper("predicate name");
        expect(",");
        bool negative = accept("-");
        if (peek().kind != TokenKind::Int) fail_here("expected recursion depth");
        d.depth = tokens_[pos_++].literal.as_int() * (negative ? -1 : 1);
        if (d.depth < -1) syntax_error("recursion depth must be -1 or nonnegative", tokens_[pos_ - 1].loc);
        if (accept(",")) {
            if (!is_word("stop")) fail_here("expected 'stop'");
            ++pos_;
            expect(":");
            d.stop_predicate = expect_upper("stop predicate name");
        }
        expect(")");
        expect(";");
        return d;
    }

    // -- rules --------------------------------------------------------------

    std::optional<AggregateKind> aggregate_operator() {
        if ((is_word("Min") || is_word("Max")) && is_symbol("=", 1)) {
            auto kind = peek().text == "Min" ? AggregateKind::Min : AggregateKind::Max;
            pos_ += 2;
            return kind;
        }
        if (accept("+=")) return AggregateKind::Sum;
        return std::nullopt;
    }

    HeadLiteral head_literal() {
        HeadLiteral h;
        h.predicate = expect_upper("predicate name");
        expect("(");
        std::size_t positional = 0;
        if (!is_symbol(")")) {
            do {
                HeadArg arg;
                if (peek().kind == TokenKind::Lower && is_symbol(":", 1)) {
                    arg.name = peek().text;
                    pos_ += 2;
                    arg.expr = expression();
                } else if (peek().kind == TokenKind::Lower && is_symbol("?", 1)) {
                    arg.name = peek().text;
                    pos_ += 2;
                    arg.optional_marker = true;
                    arg.agg = aggregate_operator();
                    if (!arg.agg) fail_here("expected 'Min=', 'Max=' or '+=' after '?'");
                    arg.expr = expression();
                } else {
                    arg.name = positional++;
                    arg.expr = expression();
                }
                for (const auto& prev : h.args) {
                    if (!prev.positional() && !arg.positional() && prev.attribute() == arg.attribute()) {
                        syntax_error("duplicate attribute '" + arg.attribute() + "'", tokens_[pos_ - 1].loc);
                    }
                }
                h.args.push_back(std::move(arg));
            } while (accept(","));
        }
        expect(")");
        return h;
    }

    Rule rule(bool require_semicolon = true) {
        Rule r;
        r.head = head_literal();
        while (accept(",")) r.extra_heads.push_back(head_literal());
        if (is_word("distinct")) {
            ++pos_;
            r.distinct = true;
        }
        if (auto agg = aggregate_operator()) {
            r.head_value = HeadArg{std::string(kValueColumn), expression(), agg, false};
        } else if (accept("=")) {
            r.head_value = HeadArg{std::string(kValueColumn), expression(), std::nullopt, false};
        }
        if (accept(":-")) r.body = formula();
        if (require_semicolon || !at_end()) expect(";");
        return r;
    }

    // -- body formulas ------------------------------------------------------

    Conjunction formula() {
        Conjunction a = conjunction();
        if (accept("=>")) {
            Conjunction c = conjunction();
            a.push_back(negate(std::move(c)));
            return {negate(std::move(a))};
        }
        return a;
    }

    Conjunction conjunction() {
        Conjunction out;
        do {
            for (auto& f : disjunction()) out.push_back(std::move(f));
        } while (accept(","));
        return out;
    }

    Conjunction disjunction() {
        std::vector<Conjunction> branches;
        branches.push_back(unit());
        while (accept("|")) branches.push_back(unit());
        if (branches.size() == 1) return std::move(branches.front());
        return {BodyFormula{Disjunction{std::move(branches)}}};
    }

    Conjunction unit() {
        if (accept("~")) return {negate(unit())};
        if (peek().kind == TokenKind::Upper && is_symbol("=", 1) && is_word("nil", 2)) {
            std::string name = peek().text;
            pos_ += 3;
            return {BodyFormula{NilCheck{std::move(name)}}};
        }
        if (is_symbol("(")) {
            // Either a parenthesized formula or a term starting with '('.
            std::size_t start = pos_;
            std::optional<Error> term_error;
            try {
                return {atomic_formula()};
            } catch (const Error& e) {
                term_error = e;
            }
            pos_ = start;
            try {
                expect("(");
                Conjunction inner = formula();
                expect(")");
                return inner;
            } catch (const Error& e) {
                // Report whichever reading got further into the input.
                if (later(term_error->where(), e.where())) throw *term_error;
                throw;
            }
        }
        return {atomic_formula()};
    }

    BodyFormula atomic_formula() {
        SourceLocation loc = peek().loc;
        std::optional<CallSyntax> head_call;
        Term left;
        if (peek().kind == TokenKind::Upper && is_symbol("(", 1) && !is_named_builtin(peek().text)) {
            head_call = call_syntax();
            if (binary_precedence(peek()) == 0) {
                if (!compare_op(peek()) && !is_word("in")) {
                    return BodyFormula{Literal{head_call->name, std::move(head_call->positional),
                                               std::move(head_call->named), false}};
                }
            }
            left = call_term(std::move(*head_call));
            left = binary_rhs(1, std::move(left));
        } else {
            left = expression();
        }
        if (auto op = compare_op(peek())) {
            ++pos_;
            Term right = expression();
            return BodyFormula{Compare{std::move(left), *op, std::move(right)}};
        }
        if (is_word("in")) {
            ++pos_;
            Term list = expression();
            return BodyFormula{In{std::move(left), std::move(list)}};
        }
        syntax_error("expected a literal, comparison or 'in' test", loc);
    }

    // -- terms --------------------------------------------------------------

    Term expression() { return binary_rhs(1, unary()); }

    Term binary_rhs(int min_prec, Term left) {
        for (;;) {
            int prec = binary_precedence(peek());
            if (prec < min_prec || prec == 0) return left;
            std::string op = peek().text;
            ++pos_;
            Term right = unary();
            while (binary_precedence(peek()) > prec) right = binary_rhs(prec + 1, std::move(right));
            left = builtin(op, {std::move(left), std::move(right)});
        }
    }

    Term unary() {
        if (accept("-")) {
            if (peek().kind == TokenKind::Int) return constant(Value(-tokens_[pos_++].literal.as_int()));
            if (peek().kind == TokenKind::Float) return constant(Value(-tokens_[pos_++].literal.as_float()));
            return builtin("neg", {unary()});
        }
        return primary();
    }

    CallSyntax call_syntax() {
        CallSyntax c;
        c.loc = peek().loc;
        c.name = tokens_[pos_++].text;
        expect("(");
        if (!is_symbol(")")) {
            do {
                if (peek().kind == TokenKind::Lower && is_symbol(":", 1)) {
                    std::string name = peek().text;
                    for (const auto& prev : c.named) {
                        if (prev.name == name) syntax_error("duplicate named argument '" + name + "'", peek().loc);
                    }
                    pos_ += 2;
                    c.named.push_back(NamedArg{std::move(name), expression()});
                } else {
                    if (!c.named.empty()) fail_here("positional argument after named argument");
                    c.positional.push_back(expression());
                }
            } while (accept(","));
        }
        expect(")");
        return c;
    }

    Term call_term(CallSyntax c) {
        if (!c.named.empty()) syntax_error("named arguments are not allowed in expression position", c.loc);
        if (const Builtin* b = find_builtin(c.name)) {
            if (static_cast<int>(c.positional.size()) != b->arity) {
                syntax_error(c.name + " expects " + std::to_string(b->arity) + " argument(s)", c.loc);
            }
            return builtin(std::move(c.name), std::move(c.positional));
        }
        return call(std::move(c.name), std::move(c.positional));
    }

    Term primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Int:
            case TokenKind::Float:
            case TokenKind::String:
                ++pos_;
                return constant(t.literal);
            case TokenKind::Lower:
                if (t.text == "true" || t.text == "false") {
                    ++pos_;
                    return constant(Value(t.text == "true"));
                }
                if (t.text == "nil") {
                    ++pos_;
                    return constant(Value::nil());
                }
                if (is_keyword(t.text)) fail_here("expected a term");
                ++pos_;
                return var(t.text);
            case TokenKind::Upper:
                if (!is_symbol("(", 1)) fail_here("expected '(' after predicate name");
                return call_term(call_syntax());
            case TokenKind::Symbol:
                if (t.text == "[") {
                    ++pos_;
                    ListLiteral list;
                    if (!is_symbol("]")) {
                        do {
                            list.items.push_back(expression());
                        } while (accept(","));
                    }
                    expect("]");
                    return Term{std::move(list)};
                }
                if (t.text == "(") {
                    ++pos_;
                    Term inner = expression();
                    expect(")");
                    return inner;
                }
                break;
            case TokenKind::End:
                break;
        }
        fail_here("expected a term");
    }

    static bool later(const std::optional<SourceLocation>& a, const std::optional<SourceLocation>& b) {
        if (!a || !b) return false;
        return a->line > b->line || (a->line == b->line && a->column > b->column);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

int term_precedence(const Term& t) {
    if (const auto* b = std::get_if<BuiltinCall>(&t.node)) {
        if (b->args.size() == 2) {
            if (b->op == "++") return 1;
            if (b->op == "+" || b->op == "-") return 2;
            if (b->op == "*" || b->op == "/") return 3;
        }
    }
    return 4;
}

void print_term(std::string& out, const Term& t);

void print_args(std::string& out, const std::vector<Term>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        print_term(out, args[i]);
    }
}

void print_wrapped(std::string& out, const Term& t, bool wrap) {
    if (wrap) out += '(';
    print_term(out, t);
    if (wrap) out += ')';
}

void print_term(std::string& out, const Term& t) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Variable>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, Constant>) {
                out += literal(n.value);
            } else if constexpr (std::is_same_v<T, FunctionalCall>) {
                out += n.predicate + "(";
                print_args(out, n.args);
                out += ')';
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                out += '[';
                print_args(out, n.items);
                out += ']';
            } else {
                int prec = term_precedence(t);
                if (prec < 4) {
                    print_wrapped(out, n.args[0], term_precedence(n.args[0]) < prec);
                    out += " " + n.op + " ";
                    print_wrapped(out, n.args[1], term_precedence(n.args[1]) <= prec);
                } else if (n.op == "neg") {
                    out += '-';
                    const Term& arg = n.args[0];
                    bool numeric_constant = false;
                    if (const auto* c = std::get_if<Constant>(&arg.node)) numeric_constant = c->value.is_numeric();
                    print_wrapped(out, arg, term_precedence(arg) < 4 || numeric_constant);
                } else {
                    out += n.op + "(";
                    print_args(out, n.args);
                    out += ')';
                }
            }
        },
        t.node);
}

void print_formula(std::string& out, const BodyFormula& f);

void print_conjunction(std::string& out, const Conjunction& conj) {
    for (std::size_t i = 0; i < conj.size(); ++i) {
        if (i) out += ", ";
        print_formula(out, conj[i]);
    }
}

void print_literal(std::string& out, const Literal& lit) {
    if (lit.negated) out += '~';
    out += lit.predicate + "(";
    print_args(out, lit.positional_args);
    for (std::size_t i = 0; i < lit.named_args.size(); ++i) {
        if (i || !lit.positional_args.empty()) out += ", ";
        out += lit.named_args[i].name + ": ";
        print_term(out, lit.named_args[i].value);
    }
    out += ')';
}

void print_formula(std::string& out, const BodyFormula& f) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                print_literal(out, n);
            } else if constexpr (std::is_same_v<T, Compare>) {
                print_term(out, n.left);
                out += " " + std::string(to_string(n.op)) + " ";
                print_term(out, n.right);
            } else if constexpr (std::is_same_v<T, In>) {
                print_term(out, n.element);
                out += " in ";
                print_term(out, n.list);
            } else if constexpr (std::is_same_v<T, NegatedConj>) {
                out += "~(";
                print_conjunction(out, n.conjuncts);
                out += ')';
            } else if constexpr (std::is_same_v<T, Disjunction>) {
                for (std::size_t i = 0; i < n.branches.size(); ++i) {
                    if (i) out += " | ";
                    const Conjunction& b = n.branches[i];
                    bool wrap = b.size() != 1 || std::holds_alternative<Disjunction>(b.front().node);
                    if (wrap) out += '(';
                    print_conjunction(out, b);
                    if (wrap) out += ')';
                }
            } else {
                out += n.predicate + " = nil";
            }
        },
        f.node);
}

std::string aggregate_symbol(AggregateKind kind) {
    switch (kind) {
        case AggregateKind::Min: return "Min=";
        case AggregateKind::Max: return "Max=";
        case AggregateKind::Sum: return "+=";
    }
    return "=";
}

void print_head(std::string& out, const HeadLiteral& h) {
    out += h.predicate + "(";
    for (std::size_t i = 0; i < h.args.size(); ++i) {
        if (i) out += ", ";
        const HeadArg& a = h.args[i];
        if (!a.positional()) {
            out += a.attribute();
            if (a.agg) {
                out += "? " + aggregate_symbol(*a.agg) + " ";
            } else {
                out += ": ";
            }
        }
        print_term(out, a.expr);
    }
    out += ')';
}

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }

Rule parse_rule(std::string_view text) { return Parser(text).single_rule(); }

Term parse_term(std::string_view text) { return Parser(text).single_term(); }

std::string pretty_print(const Term& term) {
    std::string out;
    print_term(out, term);
    return out;
}

std::string pretty_print(const BodyFormula& formula) {
    std::string out;
    print_formula(out, formula);
    return out;
}

std::string pretty_print(const Rule& rule) {
    std::string out;
    print_head(out, rule.head);
    for (const auto& h : rule.extra_heads) {
        out += ", ";
        print_head(out, h);
    }
    if (rule.distinct) out += " distinct";
    if (rule.head_value) {
        out += " " + (rule.head_value->agg ? aggregate_symbol(*rule.head_value->agg) : std::string("=")) + " ";
        print_term(out, rule.head_value->expr);
    }
    if (!rule.body.empty()) {
        out += " :- ";
        print_conjunction(out, rule.body);
    }
    out += ';';
    return out;
}

std::string pretty_print(const Directive& d) {
    std::string out = "@Recursive(" + d.target_predicate + ", " + std::to_string(d.depth);
    if (d.stop_predicate) out += ", stop: " + *d.stop_predicate;
    return out + ");";
}

std::string pretty_print(const Program& program) {
    std::string out;
    auto line = [&](const std::string& s) {
        if (!out.empty()) out += '\n';
        out += s;
    };
    for (const auto& d : program.directives) line(pretty_print(d));
    for (const auto& r : program.rules) line(pretty_print(r));
    return out;
}

}  // namespace gtlog
