#pragma once

#include <span>

#include "simba/tensor.hpp"

namespace simba {

// Fraction of equal entries; NaN for empty input.
double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

// Unweighted mean of per-class F1 over classes 0..C-1. A class absent from
// both predictions and labels scores 0 and triggers a warning.
double macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> labels, std::size_t classes);

// Central moment discrepancy between two samples (rows are observations):
//   |mean(X) - mean(Y)| / (b - a) + sum_{j=2..K} |c_j(X) - c_j(Y)| / (b - a)^j
// with c_j the per-dimension j-th central moment, |.| the Euclidean norm and
// [a, b] the range of all values in X and Y. Returns 0 (with a warning) when
// that range is empty.
double cmd_metric(const Tensor& x, const Tensor& y, std::size_t moments = 5);

}  // namespace simba
