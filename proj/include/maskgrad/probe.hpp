#pragma once

#include <cstddef>
#include <span>

#include "maskgrad/model.hpp"
#include "maskgrad/tensor.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

// Linear-probe R^2 scores measuring what a latent retains. Each score is
// the mean over target columns of held-out R^2.
struct ProbeReport {
  double action_r2 = 0.0;      // expert action from z
  double relevant_r2 = 0.0;    // relevant state coordinates from z
  double irrelevant_r2 = 0.0;  // irrelevant state coordinates from z
  bool degenerate = false;     // latent had zero variance; scores forced to 0
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

struct RidgeFit {
  double r2 = 0.0;
  bool degenerate = false;
};

// Ridge regression (closed-form normal equations on centered data) from
// `inputs` to `targets`, scored by mean held-out R^2 over target columns.
// Target columns with zero held-out variance are skipped.
RidgeFit ridge_probe(const Tensor& train_inputs, const Tensor& train_targets,
                     const Tensor& test_inputs, const Tensor& test_targets, double ridge = 1e-6);

// Splits pairs 80/20 by trajectory (every fifth trajectory held out) and
// fits the three probes on the controller's latent.
ProbeReport probe_latent(const Controller& controller, const Dataset& data,
                         std::span<const std::size_t> relevant);

// Same split and probes for an arbitrary latent, one row per dataset pair.
ProbeReport probe_latent(const Tensor& latent, const Dataset& data,
                         std::span<const std::size_t> relevant);

}  // namespace maskgrad
