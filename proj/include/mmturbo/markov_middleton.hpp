#pragma once

// Finite-state Markov-Middleton impulsive noise.
//
// State j in [0, W) has Poisson weight e^{-A} A^j / j!, truncated and renormalized over the
// W states. State variances follow (1 + j*Lambda/A) * sigma0^2 and the states evolve as a
// Markov chain that stays put with extra probability r. Noise is circularly-symmetric
// complex Gaussian with the state variance as its TOTAL power (half per real dimension).

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace mmturbo {

struct MarkovMiddletonParams {
  int num_states = 4;            // W
  double impulsive_index = 0.3;  // A
  double power_ratio = 10.0;     // Lambda
  double correlation = 0.0;      // r
  double background_var = 1.0;   // sigma0^2, total over both dimensions

  /// Throws std::invalid_argument unless W >= 1, A > 0, Lambda > 0, 0 <= r < 1, sigma0^2 > 0.
  void validate() const;

  bool operator==(const MarkovMiddletonParams&) const = default;
};

struct NoiseRealization {
  std::vector<int> states;
  Eigen::VectorXcd samples;
};

struct NoisePowers {
  double background;  // p'(0) * sigma0^2
  double impulsive;   // sum_{j>=1} p'(j) * sigma_j^2, zero when W = 1
};

/// Truncated, renormalized Poisson state priors p'. Factorials go through lgamma.
Eigen::VectorXd truncated_priors(const MarkovMiddletonParams& params);

Eigen::VectorXd state_variances(const MarkovMiddletonParams& params);

/// P(i, j) = r [i == j] + (1 - r) p'(j).
Eigen::MatrixXd transition_matrix(const MarkovMiddletonParams& params);

NoisePowers average_powers(const MarkovMiddletonParams& params);

/// w_1 ~ p', then Markov transitions; deterministic in `seed`.
NoiseRealization sample_noise(const MarkovMiddletonParams& params, std::size_t length,
                              std::uint64_t seed);

/// log of the complex Gaussian density of y around x with total variance `state_var`.
inline double log_likelihood(std::complex<double> y, std::complex<double> x, double state_var) {
  constexpr double kLogPi = 1.14472988584940017414342735135305871;
  return -std::norm(y - x) / state_var - kLogPi - std::log(state_var);
}

}  // namespace mmturbo
