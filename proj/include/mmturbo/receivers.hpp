#pragma once

// MAP receivers built on the factored forward-backward engine:
//
//   joint      super-trellis over (z, w) with symbol priors, iterated with the code decoder
//   separate   IN detector over (z, w) run once, then DE demapper <-> code decoder
//   psk        non-differential baseline: IN detector over (x, w) <-> code decoder
//   genie      known noise states, DE demapper <-> code decoder
//
// All soft quantities are natural-log probabilities. Bits inside a symbol are ordered most
// significant first, matching psk_map.

#include "mmturbo/air.hpp"
#include "mmturbo/factored_trellis.hpp"
#include "mmturbo/markov_middleton.hpp"
#include "mmturbo/tx_chain.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmturbo {

enum class MessageRole { joint, extrinsic_likelihood, extrinsic_prior };
enum class MessageDomain { info_bit, coded_bit, interleaved_bit, symbol, diff_symbol };

struct SoftMessage {
  MessageRole role = MessageRole::joint;
  MessageDomain domain = MessageDomain::symbol;
  LogTable<double> values;  // one row per index, one column per alphabet letter

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  int alphabet() const { return static_cast<int>(values.cols()); }

  static SoftMessage uniform(MessageRole role, MessageDomain domain, std::size_t size, int alphabet);
};

/// joint - used_input, elementwise in the log domain. Throws when the divisor is -inf
/// where the dividend is finite; 0/0 is reported as -inf.
SoftMessage extrinsic_divide(const SoftMessage& joint, const SoftMessage& used_input, MessageRole role);

/// Per-row normalization followed by clamping into [-clamp, 0].
SoftMessage normalized(SoftMessage msg, MessageRole role, double clamp = 50.0);

/// Bit-to-symbol map: log p(x) = sum of the log-probabilities of its label bits.
SoftMessage bits_to_symbols(const SoftMessage& bits, const PskMapSpec& labeling);
/// Symbol-to-bit map: log p(d = v) = log-sum-exp over symbols whose label has bit v.
SoftMessage symbols_to_bits(const SoftMessage& symbols, const PskMapSpec& labeling);

/// Super-trellis over (z, w) whose transitions are driven by the PSK symbol x.
class SuperTrellis {
 public:
  SuperTrellis(const MarkovMiddletonParams& rx, int order);
  int order() const { return order_; }
  int noise_states() const { return noise_states_; }
  const Eigen::VectorXd& variances() const { return variances_; }
  const FactoredTrellis<double>& trellis() const { return trellis_; }
  const LogVector<double>& initial() const { return init_; }

 private:
  int order_;
  int noise_states_;
  Eigen::VectorXd variances_;
  FactoredTrellis<double> trellis_;
  LogVector<double> init_;
};

/// M-state differential decoder trellis; state = z, branch class = x.
class DifferentialTrellis {
 public:
  explicit DifferentialTrellis(int order);
  int order() const { return order_; }
  const FactoredTrellis<double>& trellis() const { return trellis_; }
  const LogVector<double>& initial() const { return init_; }

 private:
  int order_;
  FactoredTrellis<double> trellis_;
  LogVector<double> init_;
};

/// Terminated code trellis; branch class = (b, output word).
class CodeTrellis {
 public:
  explicit CodeTrellis(const ConvCodeSpec& code);
  const ConvCodeSpec& code() const { return code_; }
  const FactoredTrellis<double>& trellis() const { return trellis_; }
  const LogVector<double>& pinned() const { return pinned_; }

 private:
  ConvCodeSpec code_;
  FactoredTrellis<double> trellis_;
  LogVector<double> pinned_;
};

/// log p(x_t, y_1^T) from the joint DPSK-IN super-trellis.
SoftMessage joint_dpsk_in_demap(const Eigen::VectorXcd& y, const SuperTrellis& trellis,
                                const SoftMessage& prior);
SoftMessage joint_dpsk_in_demap(const Eigen::VectorXcd& y, const MarkovMiddletonParams& rx,
                                const SoftMessage& prior);

/// log p(z_t, y_1^T) from the IN detector (uniform, independent z).
SoftMessage in_detect(const Eigen::VectorXcd& y, const AuxTrellis& aux);
SoftMessage in_detect(const Eigen::VectorXcd& y, const MarkovMiddletonParams& rx, int order);

/// log p(x_t, y_1^T) from the IN detector with symbol priors (non-differential link).
SoftMessage psk_in_detect(const Eigen::VectorXcd& y, const AuxTrellis& aux, const SoftMessage& prior);

/// log p(x_t, y_1^T) from the differential demapper driven by per-symbol z likelihoods.
SoftMessage de_demap(const SoftMessage& z_joint, const SoftMessage& prior, const DifferentialTrellis& trellis);
SoftMessage de_demap(const SoftMessage& z_joint, const SoftMessage& prior);

struct DecoderOutput {
  SoftMessage info;   // K + L rows, tail included
  SoftMessage coded;  // (K + L) * n rows
};

/// BCJR decoding of the terminated code from coded-bit likelihoods, p(b_k) = 1/2.
DecoderOutput conv_map_decode(const SoftMessage& coded_lik, const CodeTrellis& trellis);
DecoderOutput conv_map_decode(const SoftMessage& coded_lik, const ConvCodeSpec& code);

/// argmax per row; ties go to bit 0.
BitFrame hard_decisions(const SoftMessage& bits, std::size_t count);

enum class ReceiverDesign { joint, separate, psk_baseline, genie_csi };

std::string_view to_string(ReceiverDesign design);
std::optional<ReceiverDesign> parse_design(std::string_view name);
/// psk_baseline transmits plain PSK; every other design expects a differential link.
inline bool uses_differential(ReceiverDesign design) { return design != ReceiverDesign::psk_baseline; }

struct TurboConfig {
  ReceiverDesign design = ReceiverDesign::joint;
  MarkovMiddletonParams rx;
  int iterations = 10;  // feedback passes after the first demap + decode
  ConvCodeSpec code;
  PskMapSpec labeling = PskMapSpec::gray(4);
  std::size_t info_bits = 49998;  // (K + L) * 2 = 100000 coded bits, 50000 QPSK symbols
  double clamp = 50.0;
};

struct TurboOutput {
  std::vector<BitFrame> decisions;                // per iteration, K info bits
  std::vector<LogTable<double>> info_posteriors;  // per iteration, K x 2 normalized
};

/// Frame geometry shared by transmitter and receiver.
struct FrameGeometry {
  std::size_t info_bits;
  std::size_t coded_bits;
  std::size_t symbols;
  static FrameGeometry make(std::size_t info_bits, const ConvCodeSpec& code, const PskMapSpec& labeling);
};

class TurboReceiver {
 public:
  TurboReceiver(TurboConfig config, Interleaver interleaver);

  const TurboConfig& config() const { return config_; }
  const FrameGeometry& geometry() const { return geometry_; }

  /// `known_states` is required by the genie design and ignored otherwise.
  TurboOutput decode(const Eigen::VectorXcd& y, const std::vector<int>* known_states = nullptr) const;

 private:
  TurboConfig config_;
  Interleaver interleaver_;
  FrameGeometry geometry_;
  Eigen::VectorXd variances_;
  std::optional<SuperTrellis> super_;
  std::optional<AuxTrellis> aux_;
  DifferentialTrellis diff_;
  CodeTrellis code_;
};

TurboOutput turbo_decode(const Eigen::VectorXcd& y, const TurboConfig& config,
                         const Interleaver& interleaver, const std::vector<int>* known_states = nullptr);

}  // namespace mmturbo
