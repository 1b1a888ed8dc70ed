#pragma once

#include <functional>
#include <span>

#include "simba/autodiff.hpp"

namespace simba {

using LossBuilder = std::function<Var(Tape&)>;

// Compares tape gradients against central differences
// (f(p + eps) - f(p - eps)) / (2 eps) for every entry of every parameter and
// returns the largest relative error, with denominator
// max(|analytic|, |numeric|, 1e-8). Returns 0 for an empty parameter list.
//
// build_loss must bind the given parameters through Tape::parameter and be a
// pure function of their values; a second evaluation at the same point that
// differs from the first raises CheckError. Parameter gradients are
// overwritten. eps must lie in [1e-7, 1e-3].
double finite_diff_check(std::span<Parameter* const> params, const LossBuilder& build_loss, double eps = 1e-5);

}  // namespace simba
