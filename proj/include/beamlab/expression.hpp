#pragma once

// Arithmetic expression evaluator for numeric config fields.
//
// Frequency and amplitude parameters are often irrational (for instance a
// forcing frequency tuned to a nonlinear resonance), so config files accept
// either a JSON number or a string expression:
//
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := ('+' | '-')* primary
//   primary := number | 'pi' | 'sqrt' '(' expr ')' | '(' expr ')'
//
// Malformed input raises ConfigError.

#include <string>

namespace beamlab {

double evaluate_expression(const std::string& text);

} // namespace beamlab
