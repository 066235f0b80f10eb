#include "mmturbo/receivers.hpp"

#include <cmath>
#include <stdexcept>

namespace mmturbo {

namespace {

void require_same_shape(const SoftMessage& a, const SoftMessage& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw std::invalid_argument("soft messages differ in length or alphabet");
}

void require_prior(const SoftMessage& prior, Eigen::Index rows, int alphabet) {
  if (prior.values.rows() != rows || prior.values.cols() != alphabet)
    throw std::invalid_argument("prior does not match the frame length or alphabet");
}

LogVector<double> zeros(int n) { return LogVector<double>::Zero(n); }

LogVector<double> pinned_start(int n) {
  LogVector<double> v = LogVector<double>::Constant(n, kNegInf<double>);
  v(0) = 0;
  return v;
}

int label_bit(int label, int bit, int bits_per_symbol) { return (label >> (bits_per_symbol - 1 - bit)) & 1; }

SoftMessage demap_with_node(const LogTable<double>& node, const SuperTrellis& st, const SoftMessage& prior) {
  require_prior(prior, node.rows(), st.order());
  const auto& tr = st.trellis();
  return {MessageRole::joint, MessageDomain::symbol,
          tr.run(node, prior.values, st.initial(), zeros(tr.num_states()))};
}

SoftMessage psk_detect_with_node(const LogTable<double>& node, const AuxTrellis& aux, const SoftMessage& prior) {
  require_prior(prior, node.rows(), aux.order());
  const auto& tr = aux.trellis();
  return {MessageRole::joint, MessageDomain::symbol,
          tr.run(node, prior.values, aux.initial(), zeros(tr.num_states()))};
}

}  // namespace

SoftMessage SoftMessage::uniform(MessageRole role, MessageDomain domain, std::size_t size, int alphabet) {
  return {role, domain,
          LogTable<double>::Constant(static_cast<Eigen::Index>(size), alphabet, -std::log(double(alphabet)))};
}

SoftMessage extrinsic_divide(const SoftMessage& joint, const SoftMessage& used_input, MessageRole role) {
  require_same_shape(joint, used_input);
  SoftMessage out{role, joint.domain, LogTable<double>(joint.values.rows(), joint.values.cols())};
  for (Eigen::Index k = 0; k < joint.values.rows(); ++k)
    for (Eigen::Index a = 0; a < joint.values.cols(); ++a) {
      const double num = joint.values(k, a);
      const double den = used_input.values(k, a);
      if (den == kNegInf<double>) {
        if (num != kNegInf<double>) throw std::domain_error("extrinsic division by zero-probability");
        out.values(k, a) = kNegInf<double>;
      } else {
        out.values(k, a) = num - den;
      }
    }
  return out;
}

SoftMessage normalized(SoftMessage msg, MessageRole role, double clamp) {
  normalize_rows(msg.values);
  msg.values = msg.values.cwiseMax(-clamp).cwiseMin(0.0);
  msg.role = role;
  return msg;
}

SoftMessage bits_to_symbols(const SoftMessage& bits, const PskMapSpec& labeling) {
  const int m = labeling.bits_per_symbol();
  if (bits.alphabet() != 2) throw std::invalid_argument("bit message must be binary");
  if (bits.size() % static_cast<std::size_t>(m) != 0)
    throw std::invalid_argument("bit message length not aligned to log2(M)");
  const auto steps = static_cast<Eigen::Index>(bits.size() / static_cast<std::size_t>(m));
  SoftMessage out{bits.role, MessageDomain::symbol, LogTable<double>::Zero(steps, labeling.order)};
  for (Eigen::Index t = 0; t < steps; ++t)
    for (int p = 0; p < labeling.order; ++p) {
      const int label = labeling.label_of_phase[static_cast<std::size_t>(p)];
      double acc = 0;
      for (int r = 0; r < m; ++r) acc += bits.values(t * m + r, label_bit(label, r, m));
      out.values(t, p) = acc;
    }
  return out;
}

SoftMessage symbols_to_bits(const SoftMessage& symbols, const PskMapSpec& labeling) {
  const int m = labeling.bits_per_symbol();
  if (symbols.alphabet() != labeling.order) throw std::invalid_argument("symbol message alphabet mismatch");
  const Eigen::Index steps = symbols.values.rows();
  SoftMessage out{symbols.role, MessageDomain::interleaved_bit,
                  LogTable<double>::Constant(steps * m, 2, kNegInf<double>)};
  for (Eigen::Index t = 0; t < steps; ++t)
    for (int p = 0; p < labeling.order; ++p) {
      const int label = labeling.label_of_phase[static_cast<std::size_t>(p)];
      for (int r = 0; r < m; ++r) {
        double& cell = out.values(t * m + r, label_bit(label, r, m));
        cell = log_add(cell, symbols.values(t, p));
      }
    }
  return out;
}

namespace {

FactoredTrellis<double> make_super_trellis(const Eigen::MatrixXd& noise_trans, int order) {
  const int w = static_cast<int>(noise_trans.rows());
  const int n = order * w;
  LogSquare<double> edge(n, n);
  Eigen::MatrixXi cls(n, n);
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to) {
      edge(from, to) = std::log(noise_trans(from % w, to % w));
      cls(from, to) = ((to / w) - (from / w) + order) % order;
    }
  return FactoredTrellis<double>(edge, cls, order);
}

FactoredTrellis<double> make_differential_trellis(int order) {
  LogSquare<double> edge = LogSquare<double>::Zero(order, order);
  Eigen::MatrixXi cls(order, order);
  for (int from = 0; from < order; ++from)
    for (int to = 0; to < order; ++to) cls(from, to) = (to - from + order) % order;
  return FactoredTrellis<double>(edge, cls, order);
}

FactoredTrellis<double> make_code_trellis(const ConvCodeSpec& code) {
  code.validate();
  const int s = code.num_states();
  LogSquare<double> edge = LogSquare<double>::Constant(s, s, kNegInf<double>);
  Eigen::MatrixXi cls = Eigen::MatrixXi::Constant(s, s, -1);
  for (int from = 0; from < s; ++from)
    for (int bit = 0; bit < 2; ++bit) {
      const int to = code.next_state(from, bit);
      if (cls(from, to) >= 0) throw std::invalid_argument("code trellis has parallel branches");
      edge(from, to) = 0;
      cls(from, to) = (bit << code.outputs()) | static_cast<int>(code.output_word(from, bit));
    }
  return FactoredTrellis<double>(edge, cls, 2 << code.outputs());
}

}  // namespace

SuperTrellis::SuperTrellis(const MarkovMiddletonParams& rx, int order)
    : order_(order),
      noise_states_(rx.num_states),
      variances_(state_variances(rx)),
      trellis_(make_super_trellis(transition_matrix(rx), order)) {
  const Eigen::VectorXd prior = truncated_priors(rx);
  init_ = LogVector<double>::Constant(order_ * noise_states_, kNegInf<double>);
  for (int j = 0; j < noise_states_; ++j) init_(j) = std::log(prior(j));  // z_0 = 0
}

DifferentialTrellis::DifferentialTrellis(int order)
    : order_(order), trellis_(make_differential_trellis(order)), init_(pinned_start(order)) {}

CodeTrellis::CodeTrellis(const ConvCodeSpec& code)
    : code_(code), trellis_(make_code_trellis(code)), pinned_(pinned_start(code.num_states())) {}

SoftMessage joint_dpsk_in_demap(const Eigen::VectorXcd& y, const SuperTrellis& trellis, const SoftMessage& prior) {
  return demap_with_node(symbol_state_loglik(y, trellis.order(), trellis.variances()), trellis, prior);
}

SoftMessage joint_dpsk_in_demap(const Eigen::VectorXcd& y, const MarkovMiddletonParams& rx, const SoftMessage& prior) {
  return joint_dpsk_in_demap(y, SuperTrellis(rx, prior.alphabet()), prior);
}

SoftMessage in_detect(const Eigen::VectorXcd& y, const AuxTrellis& aux) {
  const auto uniform = SoftMessage::uniform(MessageRole::extrinsic_prior, MessageDomain::diff_symbol,
                                            static_cast<std::size_t>(y.size()), aux.order());
  auto out = psk_detect_with_node(aux.node_table(y), aux, uniform);
  out.domain = MessageDomain::diff_symbol;
  return out;
}

SoftMessage in_detect(const Eigen::VectorXcd& y, const MarkovMiddletonParams& rx, int order) {
  return in_detect(y, AuxTrellis(rx, order));
}

SoftMessage psk_in_detect(const Eigen::VectorXcd& y, const AuxTrellis& aux, const SoftMessage& prior) {
  return psk_detect_with_node(aux.node_table(y), aux, prior);
}

SoftMessage de_demap(const SoftMessage& z_joint, const SoftMessage& prior, const DifferentialTrellis& trellis) {
  if (z_joint.alphabet() != trellis.order()) throw std::invalid_argument("z message alphabet mismatch");
  require_prior(prior, z_joint.values.rows(), trellis.order());
  // Per-step constants do not change the recursion's relative values; strip them so the
  // lattice stays small and add their total back onto the output.
  LogTable<double> node = z_joint.values;
  double offset = 0;
  for (Eigen::Index t = 0; t < node.rows(); ++t) {
    const double norm = log_sum_exp(node.row(t));
    if (norm == kNegInf<double>) continue;
    node.row(t).array() -= norm;
    offset += norm;
  }
  const auto& tr = trellis.trellis();
  LogTable<double> post = tr.run(node, prior.values, trellis.initial(), zeros(trellis.order()));
  post.array() += offset;
  return {MessageRole::joint, MessageDomain::symbol, std::move(post)};
}

SoftMessage de_demap(const SoftMessage& z_joint, const SoftMessage& prior) {
  return de_demap(z_joint, prior, DifferentialTrellis(z_joint.alphabet()));
}

DecoderOutput conv_map_decode(const SoftMessage& coded_lik, const CodeTrellis& trellis) {
  const int n = trellis.code().outputs();
  if (coded_lik.alphabet() != 2) throw std::invalid_argument("coded likelihoods must be binary");
  if (coded_lik.size() % static_cast<std::size_t>(n) != 0 || coded_lik.size() == 0)
    throw std::invalid_argument("coded length is not a multiple of the code's output count");
  const auto steps = static_cast<Eigen::Index>(coded_lik.size() / static_cast<std::size_t>(n));
  const int classes = trellis.trellis().num_classes();
  const double log_half = -kLn2;
  LogTable<double> cls(steps, classes);
  for (Eigen::Index t = 0; t < steps; ++t)
    for (int c = 0; c < classes; ++c) {
      double acc = log_half;
      for (int r = 0; r < n; ++r) acc += coded_lik.values(t * n + r, (c >> r) & 1);
      cls(t, c) = acc;
    }
  const LogTable<double> node = LogTable<double>::Zero(steps, trellis.code().num_states());
  const auto& tr = trellis.trellis();
  const LogTable<double> post = tr.run(node, cls, trellis.pinned(), trellis.pinned());

  DecoderOutput out{{MessageRole::joint, MessageDomain::info_bit, LogTable<double>::Constant(steps, 2, kNegInf<double>)},
                    {MessageRole::joint, MessageDomain::coded_bit,
                     LogTable<double>::Constant(steps * n, 2, kNegInf<double>)}};
  for (Eigen::Index t = 0; t < steps; ++t)
    for (int c = 0; c < classes; ++c) {
      const double v = post(t, c);
      if (v == kNegInf<double>) continue;
      double& info = out.info.values(t, c >> n);
      info = log_add(info, v);
      for (int r = 0; r < n; ++r) {
        double& coded = out.coded.values(t * n + r, (c >> r) & 1);
        coded = log_add(coded, v);
      }
    }
  return out;
}

DecoderOutput conv_map_decode(const SoftMessage& coded_lik, const ConvCodeSpec& code) {
  return conv_map_decode(coded_lik, CodeTrellis(code));
}

BitFrame hard_decisions(const SoftMessage& bits, std::size_t count) {
  if (bits.alphabet() != 2 || count > bits.size()) throw std::invalid_argument("bad hard-decision request");
  BitFrame out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out[k] = bits.values(row, 1) > bits.values(row, 0) ? 1 : 0;
  }
  return out;
}

std::string_view to_string(ReceiverDesign design) {
  switch (design) {
    case ReceiverDesign::joint: return "joint";
    case ReceiverDesign::separate: return "separate";
    case ReceiverDesign::psk_baseline: return "psk_baseline";
    case ReceiverDesign::genie_csi: return "genie_csi";
  }
  return "unknown";
}

std::optional<ReceiverDesign> parse_design(std::string_view name) {
  for (auto d : {ReceiverDesign::joint, ReceiverDesign::separate, ReceiverDesign::psk_baseline,
                 ReceiverDesign::genie_csi})
    if (to_string(d) == name) return d;
  return std::nullopt;
}

FrameGeometry FrameGeometry::make(std::size_t info_bits, const ConvCodeSpec& code, const PskMapSpec& labeling) {
  code.validate();
  labeling.validate();
  if (info_bits == 0) throw std::invalid_argument("frame needs at least one information bit");
  const std::size_t coded = (info_bits + static_cast<std::size_t>(code.memory)) * static_cast<std::size_t>(code.outputs());
  const auto m = static_cast<std::size_t>(labeling.bits_per_symbol());
  if (coded % m != 0) throw std::invalid_argument("coded frame length is not a whole number of symbols");
  return {info_bits, coded, coded / m};
}

TurboReceiver::TurboReceiver(TurboConfig config, Interleaver interleaver)
    : config_(std::move(config)),
      interleaver_(std::move(interleaver)),
      geometry_(FrameGeometry::make(config_.info_bits, config_.code, config_.labeling)),
      variances_(state_variances(config_.rx)),
      diff_(config_.labeling.order),
      code_(config_.code) {
  if (config_.iterations < 0) throw std::invalid_argument("iteration count must be non-negative");
  if (interleaver_.size() != geometry_.coded_bits)
    throw std::invalid_argument("interleaver length does not match the coded frame");
  const int order = config_.labeling.order;
  if (config_.design == ReceiverDesign::joint) super_.emplace(config_.rx, order);
  if (config_.design == ReceiverDesign::separate || config_.design == ReceiverDesign::psk_baseline)
    aux_.emplace(config_.rx, order);
}

TurboOutput TurboReceiver::decode(const Eigen::VectorXcd& y, const std::vector<int>* known_states) const {
  if (static_cast<std::size_t>(y.size()) != geometry_.symbols)
    throw std::invalid_argument("observation length does not match the frame geometry");
  const int order = config_.labeling.order;
  const auto& labeling = config_.labeling;

  LogTable<double> node;
  SoftMessage z_lik;
  switch (config_.design) {
    case ReceiverDesign::joint: node = symbol_state_loglik(y, order, variances_); break;
    case ReceiverDesign::psk_baseline: node = aux_->node_table(y); break;
    case ReceiverDesign::separate: z_lik = in_detect(y, *aux_); break;
    case ReceiverDesign::genie_csi:
      if (known_states == nullptr) throw std::invalid_argument("genie receiver needs the noise states");
      z_lik = {MessageRole::joint, MessageDomain::diff_symbol,
               symbol_loglik_known_state(y, order, variances_, *known_states)};
      break;
  }

  SoftMessage prior_sym = SoftMessage::uniform(MessageRole::extrinsic_prior, MessageDomain::symbol, geometry_.symbols, order);
  SoftMessage prior_bits =
      SoftMessage::uniform(MessageRole::extrinsic_prior, MessageDomain::interleaved_bit, geometry_.coded_bits, 2);
  TurboOutput out;
  for (int it = 0; it <= config_.iterations; ++it) {
    SoftMessage sym_joint;
    switch (config_.design) {
      case ReceiverDesign::joint: sym_joint = demap_with_node(node, *super_, prior_sym); break;
      case ReceiverDesign::psk_baseline: sym_joint = psk_detect_with_node(node, *aux_, prior_sym); break;
      default: sym_joint = de_demap(z_lik, prior_sym, diff_); break;
    }
    const SoftMessage bit_joint = symbols_to_bits(sym_joint, labeling);
    SoftMessage lik = normalized(extrinsic_divide(bit_joint, prior_bits, MessageRole::extrinsic_likelihood),
                                 MessageRole::extrinsic_likelihood, config_.clamp);
    SoftMessage coded_lik{MessageRole::extrinsic_likelihood, MessageDomain::coded_bit,
                          interleaver_.deinterleave_rows(lik.values)};
    const DecoderOutput dec = conv_map_decode(coded_lik, code_);

    LogTable<double> info = dec.info.values.topRows(static_cast<Eigen::Index>(geometry_.info_bits));
    normalize_rows(info);
    out.decisions.push_back(hard_decisions({MessageRole::joint, MessageDomain::info_bit, info}, geometry_.info_bits));
    out.info_posteriors.push_back(std::move(info));
    if (it == config_.iterations) break;

    const SoftMessage ext = normalized(extrinsic_divide(dec.coded, coded_lik, MessageRole::extrinsic_prior),
                                       MessageRole::extrinsic_prior, config_.clamp);
    prior_bits = {MessageRole::extrinsic_prior, MessageDomain::interleaved_bit, interleaver_.interleave_rows(ext.values)};
    prior_sym = bits_to_symbols(prior_bits, labeling);
  }
  return out;
}

TurboOutput turbo_decode(const Eigen::VectorXcd& y, const TurboConfig& config, const Interleaver& interleaver,
                         const std::vector<int>* known_states) {
  return TurboReceiver(config, interleaver).decode(y, known_states);
}

}  // namespace mmturbo
