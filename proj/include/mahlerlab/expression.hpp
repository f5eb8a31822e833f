#pragma once

#include <functional>
#include <string_view>

#include "mahlerlab/jet.hpp"

namespace mahlerlab {

using JetFunction = std::function<Jet2(const Jet2&)>;

// Compiles an expression in the single variable x into a Jet2-evaluable
// closure. Grammar: numbers, x, pi, + - * / ^ (also the Unicode minus,
// times and division signs), parentheses and the functions sqrt, exp, log.
// '^' binds tighter than unary minus and is right associative, so -x^2 is
// -(x^2). Throws ParseError with the offending position.
JetFunction compile_expression(std::string_view source);

}  // namespace mahlerlab
