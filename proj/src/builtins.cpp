#include "gtlog/builtins.hpp"

#include <algorithm>

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "gtlog/error.hpp"

namespace gtlog {

namespace {

[[noreturn]] void mismatch(std::string_view op, const Value& a) {
    throw Error(ErrorCode::TypeMismatch,
                std::string(op) + " not defined for " + std::string(type_name(a.type())) + " " + literal(a));
}

[[noreturn]] void mismatch(std::string_view op, const Value& a, const Value& b) {
    throw Error(ErrorCode::TypeMismatch, std::string(op) + " not defined for " +
                                             std::string(type_name(a.type())) + " " + literal(a) + " and " +
                                             std::string(type_name(b.type())) + " " + literal(b));
}

template <class IntOp, class FloatOp>
Value arith(std::string_view op, const Value& a, const Value& b, IntOp int_op, FloatOp float_op) {
    if (!a.is_numeric() || !b.is_numeric()) mismatch(op, a, b);
    if (a.is_int() && b.is_int()) return Value(int_op(a.as_int(), b.as_int()));
    return Value(float_op(a.as_number(), b.as_number()));
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return out;
}

std::int64_t truncate_checked(double d) {
    if (!std::isfinite(d) || d >= 9.2233720368547758e18 || d < -9.2233720368547758e18) {
        throw Error(ErrorCode::Conversion, "float " + format_float(d) + " out of int64 range");
    }
    return static_cast<std::int64_t>(std::trunc(d));
}

Value call_greatest(std::span<const Value> a) { return greatest(a[0], a[1]); }
Value call_least(std::span<const Value> a) { return least(a[0], a[1]); }
Value call_to_string(std::span<const Value> a) { return to_string(a[0]); }
Value call_to_int64(std::span<const Value> a) { return to_int64(a[0]); }
Value call_to_float64(std::span<const Value> a) { return to_float64(a[0]); }
Value call_concat(std::span<const Value> a) { return concat(a[0], a[1]); }
Value call_add(std::span<const Value> a) { return add(a[0], a[1]); }
Value call_subtract(std::span<const Value> a) { return subtract(a[0], a[1]); }
Value call_multiply(std::span<const Value> a) { return multiply(a[0], a[1]); }
Value call_divide(std::span<const Value> a) { return divide(a[0], a[1]); }
Value call_negate(std::span<const Value> a) { return negate(a[0]); }

constexpr std::array<Builtin, 11> kBuiltins{{
    {"Greatest", 2, call_greatest},
    {"Least", 2, call_least},
    {"ToString", 1, call_to_string},
    {"ToInt64", 1, call_to_int64},
    {"ToFloat64", 1, call_to_float64},
    {"++", 2, call_concat},
    {"+", 2, call_add},
    {"-", 2, call_subtract},
    {"*", 2, call_multiply},
    {"/", 2, call_divide},
    {"neg", 1, call_negate},
}};

}  // namespace

std::string_view to_string(AggregateKind kind) {
    switch (kind) {
        case AggregateKind::Min: return "Min";
        case AggregateKind::Max: return "Max";
        case AggregateKind::Sum: return "Sum";
    }
    return "?";
}

Value greatest(const Value& a, const Value& b) { return compare_ordered(a, b) < 0 ? b : a; }

Value least(const Value& a, const Value& b) { return compare_ordered(b, a) < 0 ? b : a; }

Value to_string(const Value& v) {
    if (v.is_str()) return v;
    return Value(display(v));
}

Value to_int64(const Value& v) {
    switch (v.type()) {
        case Value::Type::Int: return v;
        case Value::Type::Float: return Value(truncate_checked(v.as_float()));
        case Value::Type::Str: {
            if (auto i = parse_int(v.as_str())) return Value(*i);
            if (auto d = parse_double(v.as_str())) return Value(truncate_checked(*d));
            throw Error(ErrorCode::Conversion, "cannot convert " + literal(v) + " to int64");
        }
        default:
            throw Error(ErrorCode::Conversion, "cannot convert " + std::string(type_name(v.type())) + " to int64");
    }
}

Value to_float64(const Value& v) {
    switch (v.type()) {
        case Value::Type::Int: return Value(static_cast<double>(v.as_int()));
        case Value::Type::Float: return v;
        case Value::Type::Str:
            if (auto d = parse_double(v.as_str())) return Value(*d);
            throw Error(ErrorCode::Conversion, "cannot convert " + literal(v) + " to float64");
        default:
            throw Error(ErrorCode::Conversion, "cannot convert " + std::string(type_name(v.type())) + " to float64");
    }
}

Value concat(const Value& a, const Value& b) {
    if (!a.is_str() || !b.is_str()) mismatch("++", a, b);
    return Value(a.as_str() + b.as_str());
}

Value add(const Value& a, const Value& b) {
    return arith("+", a, b, [](std::int64_t x, std::int64_t y) { return x + y; },
                 [](double x, double y) { return x + y; });
}

Value subtract(const Value& a, const Value& b) {
    return arith("-", a, b, [](std::int64_t x, std::int64_t y) { return x - y; },
                 [](double x, double y) { return x - y; });
}

Value multiply(const Value& a, const Value& b) {
    return arith("*", a, b, [](std::int64_t x, std::int64_t y) { return x * y; },
                 [](double x, double y) { return x * y; });
}

Value divide(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int() && b.as_int() == 0) {
        throw Error(ErrorCode::RuntimeType, "integer division by zero");
    }
    return arith("/", a, b, [](std::int64_t x, std::int64_t y) { return x / y; },
                 [](double x, double y) { return x / y; });
}

Value negate(const Value& a) {
    if (a.is_int()) return Value(-a.as_int());
    if (a.is_float()) return Value(-a.as_float());
    mismatch("unary -", a);
}

Value combine(AggregateKind kind, const Value& acc, const Value& v) {
    switch (kind) {
        case AggregateKind::Min: return least(acc, v);
        case AggregateKind::Max: return greatest(acc, v);
        case AggregateKind::Sum:
            if (!acc.is_numeric() || !v.is_numeric()) mismatch("Sum", acc, v);
            return add(acc, v);
    }
    return acc;
}

Value fold_aggregate(AggregateKind kind, std::span<const Value> values) {
    if (values.empty()) throw Error(ErrorCode::RuntimeType, "aggregation over an empty group");
    if (kind == AggregateKind::Sum) {
        // Float addition is not associative; a canonical order makes the sum order-independent.
        std::vector<Value> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end());
        if (!sorted.front().is_numeric()) mismatch("Sum", sorted.front());
        Value acc = sorted.front();
        for (std::size_t i = 1; i < sorted.size(); ++i) acc = combine(kind, acc, sorted[i]);
        return acc;
    }
    Value acc = values.front();
    for (const auto& v : values.subspan(1)) acc = combine(kind, acc, v);
    return acc;
}

const Builtin* find_builtin(std::string_view name) {
    for (const auto& b : kBuiltins) {
        if (b.name == name) return &b;
    }
    return nullptr;
}

bool is_named_builtin(std::string_view name) {
    return !name.empty() && name.front() >= 'A' && name.front() <= 'Z' && find_builtin(name) != nullptr;
}

}  // namespace gtlog
