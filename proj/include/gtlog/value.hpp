#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gtlog {

/// Dynamically typed datum flowing through relations.
///
/// Equality and the canonical order are type-strict: `Int 1` and `Float 1.0`
/// are different values. Comparison operators in rules go through
/// `compare_ordered`, which promotes numerics and rejects other mixes.
class Value {
public:
    enum class Type { Nil, Bool, Int, Float, Str, List };
    using List = std::vector<Value>;

    Value() = default;
    Value(bool b) : data_(b) {}
    Value(int i) : data_(static_cast<std::int64_t>(i)) {}
    Value(std::int64_t i) : data_(i) {}
    Value(double d) : data_(d) {}
    Value(const char* s) : data_(std::string(s)) {}
    Value(std::string s) : data_(std::move(s)) {}
    Value(std::string_view s) : data_(std::string(s)) {}
    Value(List items) : data_(std::make_shared<const List>(std::move(items))) {}

    static Value nil() { return Value(); }

    Type type() const noexcept { return static_cast<Type>(data_.index()); }
    bool is_nil() const noexcept { return type() == Type::Nil; }
    bool is_bool() const noexcept { return type() == Type::Bool; }
    bool is_int() const noexcept { return type() == Type::Int; }
    bool is_float() const noexcept { return type() == Type::Float; }
    bool is_numeric() const noexcept { return is_int() || is_float(); }
    bool is_str() const noexcept { return type() == Type::Str; }
    bool is_list() const noexcept { return type() == Type::List; }

    bool as_bool() const { return std::get<bool>(data_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
    double as_float() const { return std::get<double>(data_); }
    /// Int or Float widened to double.
    double as_number() const { return is_int() ? static_cast<double>(as_int()) : as_float(); }
    const std::string& as_str() const { return std::get<std::string>(data_); }
    const List& as_list() const { return *std::get<std::shared_ptr<const List>>(data_); }

    friend bool operator==(const Value& a, const Value& b);

    /// Total order over all values: by type tag first, then within type.
    /// Used for canonical row order, never for rule semantics.
    friend std::strong_ordering operator<=>(const Value& a, const Value& b);

    std::size_t hash() const noexcept;

private:
    struct Nil {};
    std::variant<Nil, bool, std::int64_t, double, std::string, std::shared_ptr<const List>> data_;
};

std::string_view type_name(Value::Type t);

/// Rule-level ordering: numeric order across Int/Float, byte order for
/// strings, false < true. Throws TypeMismatch for any other pairing.
std::strong_ordering compare_ordered(const Value& a, const Value& b);

/// Rule-level equality: numeric promotion between Int and Float, structural
/// otherwise; never throws.
bool equal_loose(const Value& a, const Value& b);

/// Plain rendering used by exports: strings unquoted, floats shortest form.
std::string display(const Value& v);

/// Source-literal rendering: strings quoted and escaped, floats always carry
/// a decimal point or exponent so they re-read as floats.
std::string literal(const Value& v);

std::string format_float(double d);

using Tuple = std::vector<Value>;

struct TupleHash {
    std::size_t operator()(const Tuple& t) const noexcept;
};

struct ValueHash {
    std::size_t operator()(const Value& v) const noexcept { return v.hash(); }
};

}  // namespace gtlog
