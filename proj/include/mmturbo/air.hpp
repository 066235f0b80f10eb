#pragma once

// Simulation-based achievable information rate of i.i.d. uniform M-PSK over the
// Markov-Middleton channel. The auxiliary trellis runs over product states a = (x, w);
// log p(y) and log p(y | x) both come out of a forward pass, and the rate estimate is
// their per-symbol difference averaged over independent sequences.
//
// With receiver parameters different from the channel the same recursions give the
// auxiliary-channel (mismatched) lower bound.

#include "mmturbo/factored_trellis.hpp"
#include "mmturbo/markov_middleton.hpp"
#include "mmturbo/tx_chain.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace mmturbo {

/// log N(y_t; point(p), sigma_w^2) for every t and product state a = p * W + w.
LogTable<double> symbol_state_loglik(const Eigen::VectorXcd& y, int order,
                                     const Eigen::VectorXd& variances);

/// log N(y_t; point(p), sigma_{w_t}^2) with the noise state known: T x M.
LogTable<double> symbol_loglik_known_state(const Eigen::VectorXcd& y, int order,
                                           const Eigen::VectorXd& variances,
                                           const std::vector<int>& states);

class AuxTrellis {
 public:
  AuxTrellis(const MarkovMiddletonParams& rx, int order);

  int order() const { return order_; }
  int noise_states() const { return noise_states_; }
  int num_states() const { return order_ * noise_states_; }
  static int state_index(int phase, int noise_state, int noise_states) {
    return phase * noise_states + noise_state;
  }

  const Eigen::VectorXd& variances() const { return variances_; }
  /// Dense p(a_t | a_{t-1}) = P_ij / M.
  Eigen::MatrixXd transition_probabilities() const;
  /// Branch class of a transition is the destination symbol.
  const FactoredTrellis<double>& trellis() const { return trellis_; }
  /// log p(a_0): the noise state is stationary and the symbol uniform.
  const LogVector<double>& initial() const { return init_; }

  LogTable<double> node_table(const Eigen::VectorXcd& y) const {
    return symbol_state_loglik(y, order_, variances_);
  }

 private:
  int order_;
  int noise_states_;
  Eigen::VectorXd variances_;
  Eigen::MatrixXd noise_transitions_;
  FactoredTrellis<double> trellis_;
  LogVector<double> init_;
};

AuxTrellis build_aux_trellis(const MarkovMiddletonParams& rx, int order);

/// log p(y_1^T) under the receiver model.
double log_p_y(const Eigen::VectorXcd& y, const AuxTrellis& aux);
/// log p(y_1^T | x_1^T) under the receiver model.
double log_p_y_given_x(const Eigen::VectorXcd& y, const SymbolFrame& x, const AuxTrellis& aux);

/// Same two quantities from a precomputed node table.
double log_p_y(const LogTable<double>& node, const AuxTrellis& aux);
double log_p_y_given_x(const LogTable<double>& node, const SymbolFrame& x, const AuxTrellis& aux);

struct AirRequest {
  MarkovMiddletonParams channel;
  MarkovMiddletonParams receiver;  // background_var of both is overwritten from snr_db
  int order = 4;
  double snr_db = 3.0;
  std::size_t seq_length = 100000;
  std::size_t n_sequences = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct AirEstimate {
  double air = 0;        // bits per symbol
  double std_error = 0;  // across sequences
  std::size_t n_sequences = 0;
  std::size_t seq_length = 0;
  MarkovMiddletonParams channel;
  MarkovMiddletonParams receiver;
  std::vector<double> per_sequence;  // bits per symbol
};

/// sigma0^2 = 10^(-snr/10) for unit-energy PSK, applied to channel and receiver alike.
double background_var_for_snr(double snr_db);

AirEstimate estimate_air(const AirRequest& request);

}  // namespace mmturbo
