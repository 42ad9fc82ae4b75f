#pragma once

#include "chrism/term.hpp"

namespace chrism {

/// Evaluates a ground arithmetic expression (+ - * / // mod, sign) to an Int
/// or Float term. Throws RuntimeError on variables or non-numeric operands.
Term eval_arith(const Term& expr);

/// eval_arith narrowed to a double.
double eval_number(const Term& expr);

/// Evaluates a guard/builtin goal under (and possibly extending) bindings:
/// conjunction, if-then-else, true/fail, =, is, and the comparison operators.
/// Returns goal success; throws RuntimeError on instantiation errors or
/// unsupported goals.
bool eval_goal(const Term& goal, Bindings& bindings);

}  // namespace chrism
