#pragma once

// Exhaustive-enumeration references for the trellis-based modules. Each oracle walks every
// path of the underlying model directly, without reusing any trellis construction from the
// library, so agreement is meaningful.

#include "mmturbo/markov_middleton.hpp"
#include "mmturbo/trellis.hpp"
#include "mmturbo/tx_chain.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using mmturbo::kNegInf;
using mmturbo::log_add;
using Table = mmturbo::LogTable<double>;

/// Calls fn(digits) for every length-`len` vector over [0, base).
inline void for_each_sequence(int base, int len, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> digits(static_cast<std::size_t>(len), 0);
  while (true) {
    fn(digits);
    int k = len - 1;
    while (k >= 0 && ++digits[static_cast<std::size_t>(k)] == base) digits[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) return;
  }
}

/// log p(s_t = j, y_1^t) by summing every state path s_0..s_t.
inline Table dense_forward(const mmturbo::BranchMetricTable<double>& metrics, const Eigen::VectorXd& init) {
  const int n = metrics.num_states();
  const int steps = static_cast<int>(metrics.steps());
  Table out = Table::Constant(steps + 1, n, kNegInf<double>);
  for (int t = 0; t <= steps; ++t)
    for_each_sequence(n, t + 1, [&](const std::vector<int>& s) {
      double acc = init(s[0]);
      for (int k = 1; k <= t; ++k) acc += metrics.at(static_cast<std::size_t>(k))(s[k - 1], s[k]);
      out(t, s.back()) = log_add(out(t, s.back()), acc);
    });
  return out;
}

/// log p(s_{t-1} = i, s_t = j, y_1^T) by summing every full path; values[t-1](i, j).
inline std::vector<Eigen::MatrixXd> dense_pair_joint(const mmturbo::BranchMetricTable<double>& metrics,
                                                     const Eigen::VectorXd& init, const Eigen::VectorXd& term) {
  const int n = metrics.num_states();
  const int steps = static_cast<int>(metrics.steps());
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(steps), Eigen::MatrixXd::Constant(n, n, kNegInf<double>));
  for_each_sequence(n, steps + 1, [&](const std::vector<int>& s) {
    double acc = init(s[0]) + term(s.back());
    for (int k = 1; k <= steps; ++k) acc += metrics.at(static_cast<std::size_t>(k))(s[k - 1], s[k]);
    for (int k = 1; k <= steps; ++k) {
      double& cell = out[static_cast<std::size_t>(k - 1)](s[k - 1], s[k]);
      cell = log_add(cell, acc);
    }
  });
  return out;
}

inline double gauss(std::complex<double> y, int phase, int order, double var) {
  return mmturbo::log_likelihood(y, mmturbo::psk_point(phase, order), var);
}

/// log of p'(w_1) prod P(w_{t-1}, w_t).
inline double noise_path(const mmturbo::MarkovMiddletonParams& rx, const std::vector<int>& w) {
  const Eigen::VectorXd prior = mmturbo::truncated_priors(rx);
  const Eigen::MatrixXd trans = mmturbo::transition_matrix(rx);
  double acc = std::log(prior(w[0]));
  for (std::size_t t = 1; t < w.size(); ++t) acc += std::log(trans(w[t - 1], w[t]));
  return acc;
}

/// log p(x_t, y_1^T) over the differential channel with symbol priors.
inline Table joint_demap(const Eigen::VectorXcd& y, const mmturbo::MarkovMiddletonParams& rx, int order,
                         const Table& prior) {
  const int steps = static_cast<int>(y.size());
  const Eigen::VectorXd var = mmturbo::state_variances(rx);
  Table out = Table::Constant(steps, order, kNegInf<double>);
  for_each_sequence(order, steps, [&](const std::vector<int>& x) {
    std::vector<int> z(x.size());
    int prev = 0;
    double px = 0;
    for (int t = 0; t < steps; ++t) {
      prev = (prev + x[static_cast<std::size_t>(t)]) % order;
      z[static_cast<std::size_t>(t)] = prev;
      px += prior(t, x[static_cast<std::size_t>(t)]);
    }
    double py = kNegInf<double>;
    for_each_sequence(rx.num_states, steps, [&](const std::vector<int>& w) {
      double acc = noise_path(rx, w);
      for (int t = 0; t < steps; ++t)
        acc += gauss(y(t), z[static_cast<std::size_t>(t)], order, var(w[static_cast<std::size_t>(t)]));
      py = log_add(py, acc);
    });
    for (int t = 0; t < steps; ++t) {
      double& cell = out(t, x[static_cast<std::size_t>(t)]);
      cell = log_add(cell, px + py);
    }
  });
  return out;
}

/// log p(z_t, y_1^T) for i.i.d. uniform transmitted symbols.
inline Table in_detect(const Eigen::VectorXcd& y, const mmturbo::MarkovMiddletonParams& rx, int order) {
  const int steps = static_cast<int>(y.size());
  const Eigen::VectorXd var = mmturbo::state_variances(rx);
  Table out = Table::Constant(steps, order, kNegInf<double>);
  for_each_sequence(order, steps, [&](const std::vector<int>& z) {
    double pz = -steps * std::log(double(order));
    double total = kNegInf<double>;
    for_each_sequence(rx.num_states, steps, [&](const std::vector<int>& w) {
      double acc = noise_path(rx, w);
      for (int t = 0; t < steps; ++t)
        acc += gauss(y(t), z[static_cast<std::size_t>(t)], order, var(w[static_cast<std::size_t>(t)]));
      total = log_add(total, acc);
    });
    for (int t = 0; t < steps; ++t) {
      double& cell = out(t, z[static_cast<std::size_t>(t)]);
      cell = log_add(cell, pz + total);
    }
  });
  return out;
}

/// sum over x paths of prod z_joint(t, z_t) * prior(t, x_t), marginalized on x_t.
inline Table de_demap(const Table& z_joint, const Table& prior) {
  const int steps = static_cast<int>(z_joint.rows());
  const int order = static_cast<int>(z_joint.cols());
  Table out = Table::Constant(steps, order, kNegInf<double>);
  for_each_sequence(order, steps, [&](const std::vector<int>& x) {
    int z = 0;
    double acc = 0;
    for (int t = 0; t < steps; ++t) {
      z = (z + x[static_cast<std::size_t>(t)]) % order;
      acc += z_joint(t, z) + prior(t, x[static_cast<std::size_t>(t)]);
    }
    for (int t = 0; t < steps; ++t) {
      double& cell = out(t, x[static_cast<std::size_t>(t)]);
      cell = log_add(cell, acc);
    }
  });
  return out;
}

struct DecodeJoint {
  Table info;   // K + L rows
  Table coded;  // (K + L) * n rows
};

/// Enumerates every information word, encodes it and sums the coded-bit likelihoods.
inline DecodeJoint conv_decode(const Table& coded_lik, const mmturbo::ConvCodeSpec& code, int info_bits) {
  const int n = code.outputs();
  const int rows = info_bits + code.memory;
  DecodeJoint out{Table::Constant(rows, 2, kNegInf<double>), Table::Constant(rows * n, 2, kNegInf<double>)};
  for_each_sequence(2, info_bits, [&](const std::vector<int>& b) {
    mmturbo::BitFrame bits(b.begin(), b.end());
    const auto coded = mmturbo::conv_encode(bits, code);
    double acc = -info_bits * std::log(2.0) - code.memory * std::log(2.0);
    for (std::size_t k = 0; k < coded.size(); ++k) acc += coded_lik(static_cast<Eigen::Index>(k), coded[k]);
    for (int k = 0; k < rows; ++k) {
      const int bit = k < info_bits ? b[static_cast<std::size_t>(k)] : 0;
      out.info(k, bit) = log_add(out.info(k, bit), acc);
    }
    for (std::size_t k = 0; k < coded.size(); ++k) {
      double& cell = out.coded(static_cast<Eigen::Index>(k), coded[k]);
      cell = log_add(cell, acc);
    }
  });
  return out;
}

}  // namespace oracle
