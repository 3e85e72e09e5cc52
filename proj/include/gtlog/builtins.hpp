#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "gtlog/value.hpp"

namespace gtlog {

enum class AggregateKind { Min, Max, Sum };

std::string_view to_string(AggregateKind kind);

Value greatest(const Value& a, const Value& b);
Value least(const Value& a, const Value& b);

Value to_string(const Value& v);
/// Int passes through, Float truncates toward zero, numeric strings parse.
Value to_int64(const Value& v);
Value to_float64(const Value& v);
Value concat(const Value& a, const Value& b);

Value add(const Value& a, const Value& b);
Value subtract(const Value& a, const Value& b);
Value multiply(const Value& a, const Value& b);
/// Int/Int truncates toward zero; division of an Int by zero is an error.
Value divide(const Value& a, const Value& b);
Value negate(const Value& a);

/// One step of an aggregation fold.
Value combine(AggregateKind kind, const Value& acc, const Value& v);

/// Order-independent fold over a nonempty sequence.
Value fold_aggregate(AggregateKind kind, std::span<const Value> values);

/// Callable builtin looked up by its surface name (operators use their
/// symbol, unary minus is "neg").
struct Builtin {
    std::string_view name;
    int arity;
    Value (*fn)(std::span<const Value> args);
};

const Builtin* find_builtin(std::string_view name);

/// Builtins written as `Name(args)` in program text; every other
/// capitalized call is a predicate or a user function.
bool is_named_builtin(std::string_view name);

}  // namespace gtlog
