#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "maskgrad/errors.hpp"
#include "maskgrad/trainer.hpp"
#include "support.hpp"

namespace maskgrad {
namespace {

Dataset small_dataset(std::size_t demos = 10, std::uint64_t seed = 1) {
  return generate_demonstrations(EnvSpec::reach(), regime_by_name("id"), demos, seed);
}

TrainConfig quick_config(Method method) {
  TrainConfig c;
  c.method = method;
  c.epochs = 3;
  c.hidden = {16};
  c.encoder_hidden = 16;
  return c;
}

Batch random_batch(Rng& rng, std::size_t rows, std::size_t n, std::size_t m) {
  return {testing::random_matrix(rng, rows, n), testing::random_matrix(rng, rows, m)};
}

TEST(TrainConfig, ValidateRejectsBadValues) {
  TrainConfig c;
  c.batch = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.adam.lr = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.kl_weight = -1e-3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.method = Method::kVAE;
  c.latent_dim = 16;
  EXPECT_THROW(init_model(c, 16, 2), ConfigError);
}

TEST(TrainConfig, DigestIsStableAndSensitive) {
  TrainConfig a, b;
  EXPECT_EQ(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 16u);
  b.kl_weight = 2e-3;
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(InitModel, BcUsesFrozenIdentityMask) {
  const Model m = init_model(quick_config(Method::kBC), 16, 2);
  EXPECT_TRUE(m.mask.frozen());
  EXPECT_EQ(build_mask(m.mask).matrix, Tensor::identity(16));
  Model copy = m;
  EXPECT_EQ(copy.trainable().size(), m.policy.tensors.size());
}

TEST(LossGradient, LoggedLossEqualsRecomputedBatchMse) {
  Rng rng(1);
  for (Method method : {Method::kTransMask, Method::kBC}) {
    for (int trial = 0; trial < 10; ++trial) {
      TrainConfig c = quick_config(method);
      c.seed = trial;
      const Model model = init_model(c, 6, 2);
      const Batch batch = random_batch(rng, 5, 6, 2);
      const LossGradient lg = loss_gradient(model, batch, 0.0);
      const Mask mask = build_mask(model.mask);
      double total = 0.0;
      for (std::size_t r = 0; r < 5; ++r) {
        const auto pred = policy_forward(model.policy, transform(mask, batch.states.row(r)));
        total += bc_loss(pred, batch.actions.row(r));
      }
      EXPECT_NEAR(lg.loss, total / 5.0, 1e-12);
      EXPECT_EQ(lg.loss, lg.imitation);
    }
  }
}

TEST(LossGradient, MatchesFiniteDifferencesThroughMaskAndPolicy) {
  Rng rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    TrainConfig c = quick_config(Method::kTransMask);
    c.seed = trial;
    c.variant = trial % 2 ? MaskVariant::kOnesEncoder : MaskVariant::kDirectMatrix;
    c.normalizer = trial % 3 ? Normalizer::kSoftmax : Normalizer::kSparsemax;
    c.mask_init = MaskInit{0.8, 2, 4};
    c.hidden = {5};
    Model model = init_model(c, 4, 2);
    const Batch batch = random_batch(rng, 3, 4, 2);
    const LossGradient lg = loss_gradient(model, batch, 0.0);
    std::vector<double> analytic;
    for (const Tensor& g : lg.grads) analytic.insert(analytic.end(), g.values().begin(), g.values().end());
    std::vector<double> flat;
    for (const Tensor* t : std::as_const(model).trainable()) {
      flat.insert(flat.end(), t->values().begin(), t->values().end());
    }
    const auto f = [&](std::span<const double> x) {
      Model probe = model;
      std::size_t offset = 0;
      for (Tensor* t : probe.trainable()) {
        for (double& v : t->values()) v = x[offset++];
      }
      return loss_gradient(probe, batch, 0.0).loss;
    };
    EXPECT_LT(relative_error(analytic, finite_diff(f, flat)), 1e-5) << "trial " << trial;
  }
}

TEST(LossGradient, BottleneckGradientAndKl) {
  Rng rng(3);
  TrainConfig c = quick_config(Method::kVAE);
  c.latent_dim = 2;
  c.hidden = {4};
  c.encoder_hidden = 5;
  const Model model = init_model(c, 5, 2);
  const Batch batch = random_batch(rng, 4, 5, 2);
  const Tensor noise = testing::random_matrix(rng, 4, 2);
  const LossGradient lg = loss_gradient(model, batch, 0.3, noise);
  EXPECT_NEAR(lg.loss, lg.imitation + 0.3 * lg.kl, 1e-12);
  EXPECT_GE(lg.kl, 0.0);
  std::vector<double> analytic;
  for (const Tensor& g : lg.grads) analytic.insert(analytic.end(), g.values().begin(), g.values().end());
  std::vector<double> flat;
  for (const Tensor* t : model.trainable()) flat.insert(flat.end(), t->values().begin(), t->values().end());
  const auto f = [&](std::span<const double> x) {
    Model probe = model;
    std::size_t offset = 0;
    for (Tensor* t : probe.trainable()) {
      for (double& v : t->values()) v = x[offset++];
    }
    return loss_gradient(probe, batch, 0.3, noise).loss;
  };
  EXPECT_LT(relative_error(analytic, finite_diff(f, flat)), 1e-5);
  EXPECT_THROW(loss_gradient(model, batch, 0.3, Tensor::zeros({4, 3})), ShapeError);
}

TEST(LossGradient, ZeroKlWeightReducesToBottleneckBc) {
  Rng rng(4);
  TrainConfig c = quick_config(Method::kVAE);
  const Model model = init_model(c, 16, 2);
  const Batch batch = random_batch(rng, 6, 16, 2);
  const Tensor noise = testing::random_matrix(rng, 6, c.latent_dim);
  const LossGradient lg = loss_gradient(model, batch, 0.0, noise);
  EXPECT_EQ(lg.loss, lg.imitation);
  EXPECT_GT(lg.kl, 0.0);
}

TEST(TrainStep, SingleSampleLinearMatchesHandAdamStep) {
  // Linear policy, identity mask: grad W = (Ws + b - a) s^T, grad b = Ws + b - a.
  // On the first Adam step m_hat = g and v_hat = g^2, so each entry moves by
  // lr * g / (|g| + eps).
  TrainConfig c = quick_config(Method::kBC);
  c.hidden = {};
  c.adam.lr = 0.05;
  Model model = init_model(c, 3, 2);
  const Model before = model;
  const Batch batch{Tensor::matrix({{0.5, -1.0, 2.0}}), Tensor::matrix({{0.1, -0.2}})};
  Adam adam(c.adam);
  Rng noise(0);
  const StepResult r = train_step(model, adam, batch, c, noise);

  const Tensor& w0 = before.policy.tensors[0];
  const Tensor& b0 = before.policy.tensors[1];
  const auto s = batch.states.row(0);
  double expect_loss = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    double resid = b0[i] - batch.actions(0, i);
    for (std::size_t j = 0; j < 3; ++j) resid += w0(i, j) * s[j];
    expect_loss += 0.5 * resid * resid;
    const auto moved = [&](double g) { return c.adam.lr * g / (std::abs(g) + c.adam.eps); };
    EXPECT_NEAR(model.policy.tensors[1][i], b0[i] - moved(resid), 1e-15);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(model.policy.tensors[0](i, j), w0(i, j) - moved(resid * s[j]), 1e-15);
    }
  }
  EXPECT_NEAR(r.loss, expect_loss, 1e-15);
}

TEST(TrainStep, PerfectFitLeavesParametersUnchanged) {
  TrainConfig c = quick_config(Method::kTransMask);
  Model model = init_model(c, 4, 2);
  Rng rng(5);
  Tensor states = testing::random_matrix(rng, 3, 4);
  Tensor actions = Tensor::zeros({3, 2});
  const Mask mask = build_mask(model.mask);
  for (std::size_t r = 0; r < 3; ++r) {
    const auto a = policy_forward(model.policy, transform(mask, states.row(r)));
    actions(r, 0) = a[0];
    actions(r, 1) = a[1];
  }
  const Model before = model;
  Adam adam(c.adam);
  Rng noise(0);
  const StepResult step = train_step(model, adam, {states, actions}, c, noise);
  EXPECT_EQ(step.loss, 0.0);
  EXPECT_EQ(model.policy.tensors, before.policy.tensors);
  EXPECT_EQ(model.mask.theta, before.mask.theta);
}

TEST(TrainStep, RejectsEmptyAndMismatchedBatches) {
  TrainConfig c = quick_config(Method::kBC);
  Model model = init_model(c, 4, 2);
  Adam adam(c.adam);
  Rng noise(0);
  EXPECT_THROW(train_step(model, adam, {Tensor::zeros({0, 4}), Tensor::zeros({0, 2})}, c, noise),
               ConfigError);
  EXPECT_THROW(train_step(model, adam, {Tensor::zeros({2, 5}), Tensor::zeros({2, 2})}, c, noise),
               ShapeError);
}

TEST(TrainStep, DivergingLearningRateRaisesNumericError) {
  TrainConfig c = quick_config(Method::kBC);
  c.hidden = {};
  c.adam.lr = 1e150;
  Model model = init_model(c, 2, 2);
  Adam adam(c.adam);
  Rng noise(0);
  const Batch batch{Tensor::matrix({{1e10, 1e10}}), Tensor::matrix({{0.0, 0.0}})};
  EXPECT_THROW(
      {
        for (int i = 0; i < 5; ++i) train_step(model, adam, batch, c, noise);
      },
      NumericError);
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const Dataset data = small_dataset();
  TrainConfig c = quick_config(Method::kTransMask);
  c.epochs = 0;
  const TrainResult r = train(c, data);
  const Model init = init_model(c, 16, 2);
  EXPECT_EQ(r.model.mask.theta, init.mask.theta);
  EXPECT_EQ(r.model.policy.tensors, init.policy.tensors);
  EXPECT_TRUE(r.log.epochs.empty());
}

TEST(Train, DeterministicUnderSeed) {
  const Dataset data = small_dataset();
  for (Method method : {Method::kTransMask, Method::kBC, Method::kVAE}) {
    const TrainConfig c = quick_config(method);
    const TrainResult a = train(c, data), b = train(c, data);
    EXPECT_EQ(a.model.policy.tensors, b.model.policy.tensors);
    EXPECT_EQ(a.model.mask.theta, b.model.mask.theta);
    ASSERT_EQ(a.log.epochs.size(), 3u);
    EXPECT_EQ(a.log.epochs.back().loss, b.log.epochs.back().loss);
    EXPECT_EQ(a.log.epochs.back().relevance, b.log.epochs.back().relevance);
    std::ostringstream la, lb;
    write_train_log_csv(la, a.log);
    write_train_log_csv(lb, b.log);
    EXPECT_EQ(la.str(), lb.str());
  }
}

TEST(Train, SeedChangesOutcome) {
  const Dataset data = small_dataset();
  TrainConfig a = quick_config(Method::kTransMask), b = a;
  b.seed = 1;
  EXPECT_NE(train(a, data).model.mask.theta, train(b, data).model.mask.theta);
}

TEST(Train, MaskRowsStayOnSimplexAfterEveryStep) {
  const Dataset data = small_dataset(5);
  const PairTable table = flatten(data);
  for (Normalizer norm : {Normalizer::kSparsemax, Normalizer::kSoftmax}) {
    TrainConfig c = quick_config(Method::kTransMask);
    c.normalizer = norm;
    c.adam.lr = 0.05;  // large steps stress the invariant
    Model model = init_model(c, 16, 2);
    Adam adam(c.adam);
    Rng rng(6), noise(0);
    for (int step = 0; step < 100; ++step) {
      std::vector<std::size_t> rows(8);
      for (std::size_t& r : rows) r = rng() % table.states.rows();
      train_step(model, adam, gather(table, rows), c, noise);
      const Mask m = build_mask(model.mask);
      for (std::size_t i = 0; i < m.n(); ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < m.n(); ++j) {
          ASSERT_GE(m.matrix(i, j), 0.0);
          total += m.matrix(i, j);
        }
        ASSERT_NEAR(total, 1.0, 1e-9) << "step " << step;
      }
    }
  }
}

TEST(Train, LogsRelevanceAndSeparation) {
  const Dataset data = small_dataset();
  const TrainConfig c = quick_config(Method::kTransMask);
  const std::vector<std::size_t> relevant{0, 1, 2, 3};
  const TrainResult r = train(c, data, relevant);
  for (const EpochLog& e : r.log.epochs) {
    ASSERT_EQ(e.relevance.size(), 16u);
    ASSERT_TRUE(e.separation.has_value());
    EXPECT_NEAR(*e.separation, separation_score({e.relevance}, relevant), 1e-15);
    EXPECT_TRUE(std::isfinite(e.loss));
  }
  std::ostringstream csv, timing;
  write_train_log_csv(csv, r.log);
  write_timing_csv(timing, r.log);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "epoch,loss,separation");
  EXPECT_EQ(timing.str().substr(0, timing.str().find('\n')), "epoch,wall_ms");
}

TEST(Train, EmptyDatasetIsRejected) {
  EXPECT_THROW(train(quick_config(Method::kBC), small_dataset(0)), ConfigError);
}

TEST(Flatten, PairsAndTrajectoryIds) {
  const Dataset data = small_dataset(4);
  const PairTable t = flatten(data);
  EXPECT_EQ(t.states.rows(), data.pair_count());
  EXPECT_EQ(t.actions.cols(), 2u);
  EXPECT_EQ(t.trajectory.front(), 0u);
  EXPECT_EQ(t.trajectory.back(), 3u);
  const std::vector<std::size_t> rows{2, 0};
  const Batch b = gather(t, rows);
  EXPECT_EQ(b.states.row(0), t.states.row(2));
  EXPECT_EQ(b.actions.row(1), t.actions.row(0));
}

TEST(GaussianKl, ClosedFormProperties) {
  EXPECT_EQ(gaussian_kl(std::vector<double>{0, 0}, std::vector<double>{0, 0}), 0.0);
  EXPECT_NEAR(gaussian_kl(std::vector<double>{1}, std::vector<double>{0}), 0.5, 1e-15);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mean = testing::random_vector(rng, 3, -2, 2);
    const auto logvar = testing::random_vector(rng, 3, -2, 2);
    EXPECT_GT(gaussian_kl(mean, logvar), 0.0);
  }
  EXPECT_THROW(gaussian_kl(std::vector<double>{0}, std::vector<double>{0, 0}), ShapeError);
}

}  // namespace
}  // namespace maskgrad
