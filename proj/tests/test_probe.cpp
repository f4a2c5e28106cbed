#include <gtest/gtest.h>

#include "maskgrad/errors.hpp"
#include "maskgrad/probe.hpp"
#include "maskgrad/trainer.hpp"
#include "support.hpp"

namespace maskgrad {
namespace {

Dataset probe_dataset() {
  return generate_demonstrations(EnvSpec::reach(), regime_by_name("id"), 25, 4);
}

TEST(RidgeProbe, OneDimensionalClosedForm) {
  // y = 3x + 1 + noise; the fit must match the least-squares slope and the
  // held-out R^2 computed by hand.
  Rng rng(1);
  std::vector<double> xtr(40), ytr(40), xte(20), yte(20);
  for (std::size_t i = 0; i < 40; ++i) {
    xtr[i] = uniform(rng, -1, 1);
    ytr[i] = 3 * xtr[i] + 1 + normal(rng, 0, 0.1);
  }
  for (std::size_t i = 0; i < 20; ++i) {
    xte[i] = uniform(rng, -1, 1);
    yte[i] = 3 * xte[i] + 1 + normal(rng, 0, 0.1);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    mx += xtr[i] / 40;
    my += ytr[i] / 40;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    sxy += (xtr[i] - mx) * (ytr[i] - my);
    sxx += (xtr[i] - mx) * (xtr[i] - mx);
  }
  const double slope = sxy / (sxx + 1e-6);
  double mte = 0;
  for (double y : yte) mte += y / 20;
  double sse = 0, sst = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const double pred = my + slope * (xte[i] - mx);
    sse += (yte[i] - pred) * (yte[i] - pred);
    sst += (yte[i] - mte) * (yte[i] - mte);
  }
  const RidgeFit fit = ridge_probe(Tensor::matrix(40, 1, xtr), Tensor::matrix(40, 1, ytr),
                                   Tensor::matrix(20, 1, xte), Tensor::matrix(20, 1, yte));
  EXPECT_NEAR(fit.r2, 1 - sse / sst, 1e-12);
  EXPECT_FALSE(fit.degenerate);
}

TEST(RidgeProbe, ShapeAndEmptyErrors) {
  EXPECT_THROW(ridge_probe(Tensor::zeros({3, 2}), Tensor::zeros({2, 1}), Tensor::zeros({1, 2}),
                           Tensor::zeros({1, 1})),
               ShapeError);
  EXPECT_THROW(ridge_probe(Tensor::zeros({0, 2}), Tensor::zeros({0, 1}), Tensor::zeros({1, 2}),
                           Tensor::zeros({1, 1})),
               ConfigError);
}

TEST(ProbeLatent, IdentityLatentRecoversEverything) {
  const Dataset data = probe_dataset();
  TrainConfig c;
  c.method = Method::kBC;
  c.epochs = 0;
  const Controller bc(train(c, data).model);
  const ProbeReport r = probe_latent(bc, data, data.env.relevant_indices());
  EXPECT_NEAR(r.relevant_r2, 1.0, 1e-6);
  EXPECT_NEAR(r.irrelevant_r2, 1.0, 1e-6);
  EXPECT_EQ(r.train_rows + r.test_rows, data.pair_count());
  EXPECT_GT(r.test_rows, 0u);
}

TEST(ProbeLatent, ActionLatentGivesPerfectActionProbe) {
  const Dataset data = probe_dataset();
  const PairTable table = flatten(data);
  const ProbeReport r = probe_latent(table.actions, data, data.env.relevant_indices());

  // Oracle: 2x2 ridge normal equations solved by Cramer's rule on the same
  // split, then held-out R^2 averaged over both action columns.
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < table.trajectory.size(); ++i)
    (table.trajectory[i] % 5 == 4 ? te : tr).push_back(i);
  const Tensor& a = table.actions;
  double m[2] = {0, 0};
  for (std::size_t i : tr)
    for (int c = 0; c < 2; ++c) m[c] += a(i, c) / static_cast<double>(tr.size());
  double g[2][2] = {{1e-6, 0}, {0, 1e-6}};
  for (std::size_t i : tr)
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) g[p][q] += (a(i, p) - m[p]) * (a(i, q) - m[q]);
  const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  double expected = 0.0;
  for (int c = 0; c < 2; ++c) {
    // beta column c solves G b = (X^T y_c) = G_noridge e_c = G e_c - 1e-6 e_c.
    const double r0 = g[0][c] - (c == 0 ? 1e-6 : 0.0);
    const double r1 = g[1][c] - (c == 1 ? 1e-6 : 0.0);
    const double b0 = (r0 * g[1][1] - g[0][1] * r1) / det;
    const double b1 = (g[0][0] * r1 - g[1][0] * r0) / det;
    double tm = 0;
    for (std::size_t i : te) tm += a(i, c) / static_cast<double>(te.size());
    double sse = 0, sst = 0;
    for (std::size_t i : te) {
      const double pred = m[c] + (a(i, 0) - m[0]) * b0 + (a(i, 1) - m[1]) * b1;
      sse += (a(i, c) - pred) * (a(i, c) - pred);
      sst += (a(i, c) - tm) * (a(i, c) - tm);
    }
    expected += (1.0 - sse / sst) / 2.0;
  }
  EXPECT_NEAR(r.action_r2, expected, 1e-9);

  // Without the ridge term the identity map is recovered exactly.
  const Tensor xtr = Tensor({tr.size(), 2}, [&] {
    std::vector<double> v;
    for (std::size_t i : tr) v.insert(v.end(), {a(i, 0), a(i, 1)});
    return v;
  }());
  const Tensor xte = Tensor({te.size(), 2}, [&] {
    std::vector<double> v;
    for (std::size_t i : te) v.insert(v.end(), {a(i, 0), a(i, 1)});
    return v;
  }());
  EXPECT_NEAR(ridge_probe(xtr, xtr, xte, xte, 0.0).r2, 1.0, 1e-9);
}

TEST(ProbeLatent, ConstantLatentIsDegenerate) {
  const Dataset data = probe_dataset();
  const Tensor z = Tensor::filled({data.pair_count(), 3}, 0.7);
  const ProbeReport r = probe_latent(z, data, data.env.relevant_indices());
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.action_r2, 0.0);
  EXPECT_EQ(r.relevant_r2, 0.0);
  EXPECT_EQ(r.irrelevant_r2, 0.0);
}

TEST(ProbeLatent, SplitHoldsOutEveryFifthTrajectory) {
  const Dataset data = probe_dataset();
  const PairTable table = flatten(data);
  std::size_t held = 0;
  for (std::size_t t : table.trajectory) held += t % 5 == 4;
  const ProbeReport r = probe_latent(table.states, data, data.env.relevant_indices());
  EXPECT_EQ(r.test_rows, held);
}

TEST(ProbeLatent, ScoresNeverExceedOne) {
  const Dataset data = probe_dataset();
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor z = testing::random_matrix(rng, data.pair_count(), 1 + rng() % 4);
    const ProbeReport r = probe_latent(z, data, data.env.relevant_indices());
    EXPECT_LE(r.action_r2, 1.0);
    EXPECT_LE(r.relevant_r2, 1.0);
    EXPECT_LE(r.irrelevant_r2, 1.0);
  }
}

TEST(ProbeLatent, RowMismatchThrows) {
  const Dataset data = probe_dataset();
  EXPECT_THROW(probe_latent(Tensor::zeros({3, 2}), data, data.env.relevant_indices()), ShapeError);
}

}  // namespace
}  // namespace maskgrad
