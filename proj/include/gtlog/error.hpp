#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gtlog {

/// 1-based position in program text.
struct SourceLocation {
    std::uint32_t line = 0;
    std::uint32_t column = 0;
};

enum class ErrorCode {
    // Program errors: detected before evaluation starts.
    Syntax,
    UnknownPredicate,
    UnsafeVariable,
    ArityMismatch,
    AggregationConflict,
    NilCheckOutsideClique,
    RecursiveFunction,
    Compile,
    // Runtime errors.
    RuntimeType,
    TypeMismatch,
    Conversion,
    FunctionalValueConflict,
    KeyAbsent,
    Timeout,
    // Library / data errors.
    Io,
    Parse,
    MissingColumn,
    InvalidInterval,
    NotADag,
};

std::string_view to_string(ErrorCode code);

/// True for errors that indicate a defect in the program text.
bool is_program_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<SourceLocation> where = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    const std::optional<SourceLocation>& where() const noexcept { return where_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::optional<SourceLocation> where_;
    std::string detail_;
};

}  // namespace gtlog
