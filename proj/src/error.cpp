#include "gtlog/error.hpp"

namespace gtlog {

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::optional<SourceLocation>& where) {
    std::string out(to_string(code));
    if (where) {
        out += " at " + std::to_string(where->line) + ":" + std::to_string(where->column);
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Syntax: return "SyntaxError";
        case ErrorCode::UnknownPredicate: return "UnknownPredicate";
        case ErrorCode::UnsafeVariable: return "UnsafeVariable";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::AggregationConflict: return "AggregationConflict";
        case ErrorCode::NilCheckOutsideClique: return "NilCheckOutsideClique";
        case ErrorCode::RecursiveFunction: return "RecursiveFunction";
        case ErrorCode::Compile: return "CompileError";
        case ErrorCode::RuntimeType: return "RuntimeTypeError";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::Conversion: return "ConversionError";
        case ErrorCode::FunctionalValueConflict: return "FunctionalValueConflict";
        case ErrorCode::KeyAbsent: return "KeyAbsent";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::InvalidInterval: return "InvalidInterval";
        case ErrorCode::NotADag: return "NotADag";
    }
    return "Error";
}

bool is_program_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::Syntax:
        case ErrorCode::UnknownPredicate:
        case ErrorCode::UnsafeVariable:
        case ErrorCode::ArityMismatch:
        case ErrorCode::AggregationConflict:
        case ErrorCode::NilCheckOutsideClique:
        case ErrorCode::RecursiveFunction:
        case ErrorCode::Compile:
            return true;
        default:
            return false;
    }
}

Error::Error(ErrorCode code, const std::string& message, std::optional<SourceLocation> where)
    : std::runtime_error(format_message(code, message, where)),
      code_(code),
      where_(where),
      detail_(message) {}

}  // namespace gtlog
