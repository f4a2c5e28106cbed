#pragma once

#include <span>
#include <vector>

namespace maskgrad {

// Row normalizers mapping a real vector onto the probability simplex.

// exp(v - max v) / sum. Strictly positive output.
std::vector<double> softmax_row(std::span<const double> v);

// Euclidean projection of v onto the simplex (sort-and-threshold).
// Output can contain exact zeros.
std::vector<double> sparsemax_row(std::span<const double> v);

// Threshold tau such that sparsemax(v) = max(v - tau, 0).
double sparsemax_threshold(std::span<const double> v);

// Vector-Jacobian product of softmax given its output p.
std::vector<double> softmax_backward(std::span<const double> p,
                                     std::span<const double> upstream);

// Vector-Jacobian product of sparsemax given its output p. On the support
// S = {j : p_j > 0} the Jacobian is I - 1 1^T / |S|, zero elsewhere.
// Coordinates exactly on the threshold count as inactive.
std::vector<double> sparsemax_backward_from_output(std::span<const double> p,
                                                   std::span<const double> upstream);

// Same, recomputing the forward pass from the input v.
std::vector<double> sparsemax_backward(std::span<const double> v,
                                       std::span<const double> upstream);

}  // namespace maskgrad
