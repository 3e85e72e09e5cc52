#pragma once

#include <string>
#include <string_view>

#include "gtlog/ast.hpp"

namespace gtlog {

/// Parses gtlog program text. Throws Error(Syntax) with the line/column of
/// the offending token.
///
/// Grammar sketch (loosest first inside a body):
///   body    := conj ['=>' conj]
///   conj    := disj {',' disj}
///   disj    := unit {'|' unit}
///   unit    := '~' unit | '(' body ')' | Pred '=' 'nil'
///            | term [cmp term] | term 'in' term
/// `~in~` is accepted as a spelling of `in`. `#` starts a line comment.
Program parse_program(std::string_view text);

/// Single rule or fact, with or without the trailing ';'.
Rule parse_rule(std::string_view text);

Term parse_term(std::string_view text);

std::string pretty_print(const Program& program);
std::string pretty_print(const Rule& rule);
std::string pretty_print(const Directive& directive);
std::string pretty_print(const BodyFormula& formula);
std::string pretty_print(const Term& term);

}  // namespace gtlog
