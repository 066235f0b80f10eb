#include "mmturbo/air.hpp"

#include "mmturbo/parallel.hpp"
#include "mmturbo/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmturbo {

namespace {

FactoredTrellis<double> make_aux_trellis(const Eigen::MatrixXd& noise_trans, int order) {
  const int w = static_cast<int>(noise_trans.rows());
  const int n = order * w;
  LogSquare<double> edge(n, n);
  Eigen::MatrixXi cls(n, n);
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to) {
      edge(from, to) = std::log(noise_trans(from % w, to % w));
      cls(from, to) = to / w;
    }
  return FactoredTrellis<double>(edge, cls, order);
}

}  // namespace

LogTable<double> symbol_state_loglik(const Eigen::VectorXcd& y, int order,
                                     const Eigen::VectorXd& variances) {
  const auto w = variances.size();
  LogTable<double> node(y.size(), order * w);
  std::vector<std::complex<double>> points(static_cast<std::size_t>(order));
  for (int p = 0; p < order; ++p) points[static_cast<std::size_t>(p)] = psk_point(p, order);
  Eigen::VectorXd inv = variances.cwiseInverse();
  Eigen::VectorXd offset = -(variances.array() * std::numbers::pi).log();
  for (Eigen::Index t = 0; t < y.size(); ++t)
    for (int p = 0; p < order; ++p) {
      const double d2 = std::norm(y(t) - points[static_cast<std::size_t>(p)]);
      for (Eigen::Index j = 0; j < w; ++j) node(t, p * w + j) = offset(j) - d2 * inv(j);
    }
  return node;
}

LogTable<double> symbol_loglik_known_state(const Eigen::VectorXcd& y, int order,
                                           const Eigen::VectorXd& variances,
                                           const std::vector<int>& states) {
  if (static_cast<Eigen::Index>(states.size()) != y.size())
    throw std::invalid_argument("state sequence length does not match the observation");
  LogTable<double> out(y.size(), order);
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    const int w = states[static_cast<std::size_t>(t)];
    if (w < 0 || w >= variances.size()) throw std::invalid_argument("noise state out of range");
    for (int p = 0; p < order; ++p) out(t, p) = log_likelihood(y(t), psk_point(p, order), variances(w));
  }
  return out;
}

AuxTrellis::AuxTrellis(const MarkovMiddletonParams& rx, int order)
    : order_(order),
      noise_states_(rx.num_states),
      variances_(state_variances(rx)),
      noise_transitions_(transition_matrix(rx)),
      trellis_(make_aux_trellis(noise_transitions_, order)) {
  if (order < 1) throw std::invalid_argument("PSK order must be positive");
  const Eigen::VectorXd prior = truncated_priors(rx);
  init_.resize(num_states());
  for (int p = 0; p < order_; ++p)
    for (int j = 0; j < noise_states_; ++j)
      init_(state_index(p, j, noise_states_)) = std::log(prior(j) / order_);
}

Eigen::MatrixXd AuxTrellis::transition_probabilities() const {
  const int n = num_states();
  Eigen::MatrixXd out(n, n);
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to)
      out(from, to) = noise_transitions_(from % noise_states_, to % noise_states_) / order_;
  return out;
}

AuxTrellis build_aux_trellis(const MarkovMiddletonParams& rx, int order) {
  return AuxTrellis(rx, order);
}

double log_p_y(const LogTable<double>& node, const AuxTrellis& aux) {
  LogTable<double> cls = LogTable<double>::Constant(node.rows(), aux.order(), -std::log(aux.order()));
  const auto alpha = aux.trellis().forward(node, cls, aux.initial());
  return log_sum_exp(alpha.row(alpha.rows() - 1));
}

double log_p_y_given_x(const LogTable<double>& node, const SymbolFrame& x, const AuxTrellis& aux) {
  if (static_cast<Eigen::Index>(x.size()) != node.rows())
    throw std::invalid_argument("symbol and observation lengths differ");
  if (x.order != aux.order()) throw std::invalid_argument("symbol order does not match the trellis");
  const double log_px = -std::log(aux.order());
  LogTable<double> cls = LogTable<double>::Constant(node.rows(), aux.order(), kNegInf<double>);
  for (Eigen::Index t = 0; t < node.rows(); ++t) cls(t, x.phases[static_cast<std::size_t>(t)]) = log_px;
  const auto alpha = aux.trellis().forward(node, cls, aux.initial());
  return log_sum_exp(alpha.row(alpha.rows() - 1)) - static_cast<double>(node.rows()) * log_px;
}

double log_p_y(const Eigen::VectorXcd& y, const AuxTrellis& aux) {
  if (y.size() == 0) throw std::invalid_argument("empty frame");
  return log_p_y(aux.node_table(y), aux);
}

double log_p_y_given_x(const Eigen::VectorXcd& y, const SymbolFrame& x, const AuxTrellis& aux) {
  if (y.size() == 0) throw std::invalid_argument("empty frame");
  return log_p_y_given_x(aux.node_table(y), x, aux);
}

double background_var_for_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

AirEstimate estimate_air(const AirRequest& request) {
  if (request.seq_length == 0 || request.n_sequences == 0)
    throw std::invalid_argument("AIR needs a positive sequence length and count");
  if (request.order < 2) throw std::invalid_argument("PSK order must be at least 2");
  MarkovMiddletonParams channel = request.channel;
  MarkovMiddletonParams receiver = request.receiver;
  channel.background_var = receiver.background_var = background_var_for_snr(request.snr_db);
  channel.validate();
  receiver.validate();
  const AuxTrellis aux(receiver, request.order);
  const auto length = static_cast<Eigen::Index>(request.seq_length);

  auto one_sequence = [&](std::size_t index) {
    const std::uint64_t seed = derive_seed(request.seed, index);
    Rng rng(derive_seed(seed, 0));
    SymbolFrame x{request.order, std::vector<int>(request.seq_length)};
    for (auto& p : x.phases) p = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(request.order)));
    const auto noise = sample_noise(channel, request.seq_length, derive_seed(seed, 1));
    const Eigen::VectorXcd y = apply_channel(x, noise);
    const auto node = aux.node_table(y);
    const double nats = (log_p_y_given_x(node, x, aux) - log_p_y(node, aux)) / static_cast<double>(length);
    return nats / kLn2;
  };

  AirEstimate out;
  out.per_sequence = parallel_map(0, request.n_sequences, request.threads, one_sequence);
  out.n_sequences = request.n_sequences;
  out.seq_length = request.seq_length;
  out.channel = channel;
  out.receiver = receiver;
  double sum = 0;
  for (double v : out.per_sequence) sum += v;
  out.air = sum / static_cast<double>(out.n_sequences);
  if (out.n_sequences > 1) {
    double ss = 0;
    for (double v : out.per_sequence) ss += (v - out.air) * (v - out.air);
    out.std_error = std::sqrt(ss / static_cast<double>(out.n_sequences - 1) /
                              static_cast<double>(out.n_sequences));
  }
  return out;
}

}  // namespace mmturbo
