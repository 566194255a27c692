#pragma once

#include "vardt/ast.hpp"

namespace vardt::lang {

// Binds every compound sub-expression of a condition, a return expression or
// a call argument to a fresh temporary `__t<method>_<n>`, numbered in
// pre-order. Bindings are inline, so a temporary inside the right operand of
// `&&`/`||` is only defined when that operand is evaluated.
Program transform_gsa(const Program& p);

}  // namespace vardt::lang
