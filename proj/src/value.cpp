#include "gtlog/value.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <functional>

#include "gtlog/error.hpp"

namespace gtlog {

namespace {

constexpr std::size_t kHashSeed = 0x9e3779b97f4a7c15ull;

std::size_t mix(std::size_t seed, std::size_t h) noexcept {
    return seed ^ (h + kHashSeed + (seed << 6) + (seed >> 2));
}

/// IEEE-754 totalOrder via the sign-magnitude bit pattern.
std::strong_ordering float_order(double a, double b) noexcept {
    auto key = [](double d) {
        auto bits = std::bit_cast<std::int64_t>(d);
        return bits < 0 ? std::int64_t(~std::uint64_t(bits) | (std::uint64_t(1) << 63)) : bits;
    };
    return key(a) <=> key(b);
}

}  // namespace

bool operator==(const Value& a, const Value& b) {
    if (a.data_.index() != b.data_.index()) return false;
    switch (a.type()) {
        case Value::Type::Nil: return true;
        case Value::Type::Bool: return a.as_bool() == b.as_bool();
        case Value::Type::Int: return a.as_int() == b.as_int();
        case Value::Type::Float: return float_order(a.as_float(), b.as_float()) == 0;
        case Value::Type::Str: return a.as_str() == b.as_str();
        case Value::Type::List: return a.as_list() == b.as_list();
    }
    return false;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.data_.index() != b.data_.index()) return a.data_.index() <=> b.data_.index();
    switch (a.type()) {
        case Value::Type::Nil: return std::strong_ordering::equal;
        case Value::Type::Bool: return a.as_bool() <=> b.as_bool();
        case Value::Type::Int: return a.as_int() <=> b.as_int();
        case Value::Type::Float: return float_order(a.as_float(), b.as_float());
        case Value::Type::Str: return a.as_str().compare(b.as_str()) <=> 0;
        case Value::Type::List: {
            const auto& x = a.as_list();
            const auto& y = b.as_list();
            return std::lexicographical_compare_three_way(x.begin(), x.end(), y.begin(), y.end());
        }
    }
    return std::strong_ordering::equal;
}

std::size_t Value::hash() const noexcept {
    std::size_t h = data_.index();
    switch (type()) {
        case Type::Nil: break;
        case Type::Bool: h = mix(h, as_bool() ? 1 : 2); break;
        case Type::Int: h = mix(h, std::hash<std::int64_t>{}(as_int())); break;
        case Type::Float: h = mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(as_float()))); break;
        case Type::Str: h = mix(h, std::hash<std::string>{}(as_str())); break;
        case Type::List:
            for (const auto& item : as_list()) h = mix(h, item.hash());
            break;
    }
    return h;
}

std::size_t TupleHash::operator()(const Tuple& t) const noexcept {
    std::size_t h = t.size();
    for (const auto& v : t) h = mix(h, v.hash());
    return h;
}

std::string_view type_name(Value::Type t) {
    switch (t) {
        case Value::Type::Nil: return "nil";
        case Value::Type::Bool: return "bool";
        case Value::Type::Int: return "int";
        case Value::Type::Float: return "float";
        case Value::Type::Str: return "string";
        case Value::Type::List: return "list";
    }
    return "?";
}

std::strong_ordering compare_ordered(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) return a.as_int() <=> b.as_int();
    if (a.is_numeric() && b.is_numeric()) {
        double x = a.as_number(), y = b.as_number();
        if (x < y) return std::strong_ordering::less;
        if (x > y) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    if (a.is_str() && b.is_str()) return a.as_str().compare(b.as_str()) <=> 0;
    if (a.is_bool() && b.is_bool()) return a.as_bool() <=> b.as_bool();
    throw Error(ErrorCode::TypeMismatch, "cannot order " + std::string(type_name(a.type())) + " " +
                                             literal(a) + " against " + std::string(type_name(b.type())) +
                                             " " + literal(b));
}

bool equal_loose(const Value& a, const Value& b) {
    if (a.is_numeric() && b.is_numeric() && a.type() != b.type()) return a.as_number() == b.as_number();
    return a == b;
}

std::string format_float(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    return std::string(buf, end);
}

std::string display(const Value& v) {
    switch (v.type()) {
        case Value::Type::Nil: return "nil";
        case Value::Type::Bool: return v.as_bool() ? "true" : "false";
        case Value::Type::Int: return std::to_string(v.as_int());
        case Value::Type::Float: return format_float(v.as_float());
        case Value::Type::Str: return v.as_str();
        case Value::Type::List: {
            std::string out = "[";
            bool first = true;
            for (const auto& item : v.as_list()) {
                if (!first) out += ", ";
                first = false;
                out += literal(item);
            }
            return out + "]";
        }
    }
    return {};
}

std::string literal(const Value& v) {
    if (v.is_str()) {
        std::string out = "\"";
        for (char c : v.as_str()) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default: out += c;
            }
        }
        return out + "\"";
    }
    if (v.is_float()) {
        std::string s = format_float(v.as_float());
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        return s;
    }
    return display(v);
}

}  // namespace gtlog
