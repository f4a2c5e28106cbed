#include "maskgrad/probe.hpp"

#include <Eigen/Dense>
#include <vector>

#include "maskgrad/errors.hpp"
#include "maskgrad/trainer.hpp"

namespace maskgrad {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_eigen(const Tensor& t) {
  Matrix m(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m(i, j) = t(i, j);
  return m;
}

Tensor select_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size() * t.cols());
  for (std::size_t r : rows) {
    auto row = t.values().subspan(r * t.cols(), t.cols());
    out.insert(out.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), t.cols()}, std::move(out));
}

Tensor select_cols(const Tensor& t, std::span<const std::size_t> cols) {
  std::vector<double> out;
  out.reserve(t.rows() * cols.size());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t c : cols) out.push_back(t(i, c));
  return Tensor({t.rows(), cols.size()}, std::move(out));
}

}  // namespace

RidgeFit ridge_probe(const Tensor& train_inputs, const Tensor& train_targets,
                     const Tensor& test_inputs, const Tensor& test_targets, double ridge) {
  if (train_inputs.rows() != train_targets.rows() || test_inputs.rows() != test_targets.rows() ||
      train_inputs.cols() != test_inputs.cols() || train_targets.cols() != test_targets.cols()) {
    throw ShapeError("ridge_probe: inconsistent shapes");
  }
  if (train_inputs.rows() == 0 || test_inputs.rows() == 0) {
    throw ConfigError("ridge_probe: empty train or test split");
  }
  const Matrix x = to_eigen(train_inputs);
  const Matrix y = to_eigen(train_targets);
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::RowVectorXd y_mean = y.colwise().mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Matrix yc = y.rowwise() - y_mean;

  RidgeFit fit;
  if (((x.rowwise() - x.row(0)).array() == 0.0).all()) {
    fit.degenerate = true;
    return fit;
  }
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += ridge;
  const Matrix beta = gram.ldlt().solve(xc.transpose() * yc);

  const Matrix xt = to_eigen(test_inputs);
  const Matrix yt = to_eigen(test_targets);
  const Matrix predicted = ((xt.rowwise() - x_mean) * beta).rowwise() + y_mean;
  const Eigen::RowVectorXd test_mean = yt.colwise().mean();
  double total = 0.0;
  std::size_t scored = 0;
  for (Eigen::Index c = 0; c < yt.cols(); ++c) {
    const double sst = (yt.col(c).array() - test_mean(c)).square().sum();
    if (sst <= 0.0) continue;
    const double sse = (yt.col(c) - predicted.col(c)).squaredNorm();
    total += 1.0 - sse / sst;
    ++scored;
  }
  fit.r2 = scored ? total / static_cast<double>(scored) : 0.0;
  return fit;
}

ProbeReport probe_latent(const Tensor& latent, const Dataset& data,
                         std::span<const std::size_t> relevant) {
  const PairTable table = flatten(data);
  if (latent.rows() != table.states.rows()) {
    throw ShapeError("probe_latent: latent rows do not match dataset pairs");
  }
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t r = 0; r < table.trajectory.size(); ++r) {
    (table.trajectory[r] % 5 == 4 ? test_rows : train_rows).push_back(r);
  }
  std::vector<bool> is_relevant(data.env.state_dim(), false);
  for (std::size_t i : relevant) is_relevant.at(i) = true;
  std::vector<std::size_t> irrelevant;
  for (std::size_t i = 0; i < is_relevant.size(); ++i) {
    if (!is_relevant[i]) irrelevant.push_back(i);
  }

  const Tensor z_train = select_rows(latent, train_rows);
  const Tensor z_test = select_rows(latent, test_rows);
  auto score = [&](const Tensor& targets) {
    return ridge_probe(z_train, select_rows(targets, train_rows), z_test,
                       select_rows(targets, test_rows));
  };
  ProbeReport report;
  report.train_rows = train_rows.size();
  report.test_rows = test_rows.size();
  const RidgeFit action = score(table.actions);
  const RidgeFit mu = score(select_cols(table.states, relevant));
  const RidgeFit eta = irrelevant.empty() ? RidgeFit{} : score(select_cols(table.states, irrelevant));
  report.degenerate = action.degenerate;
  report.action_r2 = action.r2;
  report.relevant_r2 = mu.r2;
  report.irrelevant_r2 = eta.r2;
  return report;
}

ProbeReport probe_latent(const Controller& controller, const Dataset& data,
                         std::span<const std::size_t> relevant) {
  const PairTable table = flatten(data);
  return probe_latent(controller.latent(table.states), data, relevant);
}

}  // namespace maskgrad
