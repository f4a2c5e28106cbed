#include <gtest/gtest.h>

#include <cmath>

#include "maskgrad/adam.hpp"
#include "maskgrad/errors.hpp"

namespace maskgrad {
namespace {

TEST(Adam, TwoHandComputedSteps) {
  // lr 0.1, defaults otherwise, gradients +0.5 then -1 on a scalar at 1.0.
  // Step 1: m=0.05 v=0.00025 -> m_hat=0.5 v_hat=0.25 -> 1 - 0.1*0.5/(0.5+1e-8)
  // Step 2: m=-0.055 v=0.00124975 -> m_hat=-0.28947... v_hat=0.62518...
  Adam adam({0.1, 0.9, 0.999, 1e-8});
  Tensor p = Tensor::vector({1.0});
  Tensor g = Tensor::vector({0.5});
  std::vector<Tensor*> params{&p};
  std::vector<const Tensor*> grads{&g};
  adam.step(params, grads);
  EXPECT_NEAR(p[0], 0.900000002, 1e-15);
  g[0] = -1.0;
  adam.step(params, grads);
  EXPECT_NEAR(p[0], 0.9366103542405654, 1e-14);
  EXPECT_EQ(adam.steps(), 2u);
}

TEST(Adam, ReferenceRecursionOnManyScalars) {
  const AdamConfig cfg{0.01, 0.8, 0.99, 1e-6};
  Adam adam(cfg);
  Tensor p = Tensor::vector({0.3, -2.0, 5.0});
  std::vector<double> ref(p.values().begin(), p.values().end()), m(3, 0.0), v(3, 0.0);
  for (int t = 1; t <= 120; ++t) {
    Tensor g = Tensor::vector({std::sin(t * 0.3), 0.01 * t, t % 3 == 0 ? -4.0 : 0.5});
    std::vector<Tensor*> params{&p};
    std::vector<const Tensor*> grads{&g};
    adam.step(params, grads);
    for (std::size_t i = 0; i < 3; ++i) {
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(cfg.beta1, t));
      const double vh = v[i] / (1 - std::pow(cfg.beta2, t));
      ref[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
      EXPECT_NEAR(p[i], ref[i], 1e-12);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Adam adam;
  Tensor p = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor before = p;
  Tensor g = Tensor::zeros({2, 2});
  std::vector<Tensor*> params{&p};
  std::vector<const Tensor*> grads{&g};
  for (int i = 0; i < 10; ++i) adam.step(params, grads);
  EXPECT_EQ(p, before);
}

TEST(Adam, MismatchedShapesThrow) {
  Adam adam;
  Tensor p = Tensor::vector({1, 2});
  Tensor g = Tensor::vector({1});
  std::vector<Tensor*> params{&p};
  std::vector<const Tensor*> grads{&g};
  EXPECT_THROW(adam.step(params, grads), ShapeError);
}

}  // namespace
}  // namespace maskgrad
