#include "mmturbo/markov_middleton.hpp"

#include "mmturbo/random.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mmturbo {

void MarkovMiddletonParams::validate() const {
  if (num_states < 1) throw std::invalid_argument("W must be at least 1");
  if (!(impulsive_index > 0) || !std::isfinite(impulsive_index))
    throw std::invalid_argument("A must be positive");
  if (!(power_ratio > 0) || !std::isfinite(power_ratio))
    throw std::invalid_argument("Lambda must be positive");
  if (!(correlation >= 0 && correlation < 1)) throw std::invalid_argument("r must lie in [0, 1)");
  if (!(background_var > 0) || !std::isfinite(background_var))
    throw std::invalid_argument("sigma0^2 must be positive");
}

Eigen::VectorXd truncated_priors(const MarkovMiddletonParams& params) {
  params.validate();
  const int w = params.num_states;
  // e^{-A} cancels in the normalization; work with log(A^j / j!) relative to the peak.
  Eigen::VectorXd log_weights(w);
  for (int j = 0; j < w; ++j)
    log_weights(j) = j * std::log(params.impulsive_index) - std::lgamma(j + 1.0);
  const double peak = log_weights.maxCoeff();
  Eigen::VectorXd p = (log_weights.array() - peak).exp();
  return p / p.sum();
}

Eigen::VectorXd state_variances(const MarkovMiddletonParams& params) {
  params.validate();
  Eigen::VectorXd var(params.num_states);
  for (int j = 0; j < params.num_states; ++j)
    var(j) = (1.0 + j * params.power_ratio / params.impulsive_index) * params.background_var;
  return var;
}

Eigen::MatrixXd transition_matrix(const MarkovMiddletonParams& params) {
  const Eigen::VectorXd p = truncated_priors(params);
  const double r = params.correlation;
  Eigen::MatrixXd trans = (1.0 - r) * Eigen::VectorXd::Ones(p.size()) * p.transpose();
  trans.diagonal().array() += r;
  return trans;
}

NoisePowers average_powers(const MarkovMiddletonParams& params) {
  const Eigen::VectorXd p = truncated_priors(params);
  const Eigen::VectorXd var = state_variances(params);
  NoisePowers out{p(0) * params.background_var, 0.0};
  for (int j = 1; j < params.num_states; ++j) out.impulsive += p(j) * var(j);
  return out;
}

NoiseRealization sample_noise(const MarkovMiddletonParams& params, std::size_t length,
                              std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("noise realization length must be positive");
  const Eigen::VectorXd prior = truncated_priors(params);
  const Eigen::VectorXd var = state_variances(params);
  const Eigen::MatrixXd trans = transition_matrix(params);
  const int w = params.num_states;

  // Row-wise cumulative tables for inverse-CDF state draws.
  Eigen::MatrixXd cumulative(w + 1, w);
  for (int j = 0; j < w; ++j) cumulative(0, j) = prior.head(j + 1).sum();
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j) cumulative(i + 1, j) = trans.row(i).head(j + 1).sum();
  auto draw = [&](int row, double u) {
    for (int j = 0; j + 1 < w; ++j)
      if (u < cumulative(row, j)) return j;
    return w - 1;
  };

  Rng rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd scale = (var.array() / 2.0).sqrt();
  NoiseRealization out;
  out.states.resize(length);
  out.samples.resize(static_cast<Eigen::Index>(length));
  int state = draw(0, uniform01(rng));
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) state = draw(state + 1, uniform01(rng));
    out.states[t] = state;
    const double re = gauss(rng);
    const double im = gauss(rng);
    out.samples(static_cast<Eigen::Index>(t)) = scale(state) * std::complex<double>(re, im);
  }
  return out;
}

}  // namespace mmturbo
