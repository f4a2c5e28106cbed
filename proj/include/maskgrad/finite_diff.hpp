#pragma once

#include <functional>
#include <span>
#include <vector>

namespace maskgrad {

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central-difference gradient (f(p + h e_i) - f(p - h e_i)) / 2h.
// Throws NumericError if f returns a non-finite value.
std::vector<double> finite_diff(const ScalarFunction& f, std::span<const double> p,
                                double h = 1e-6);

// ||a - b|| / max(||a||, ||b||); 0 when both are zero.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace maskgrad
