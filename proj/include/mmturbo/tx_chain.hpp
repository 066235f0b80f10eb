#pragma once

// Transmitter: feedforward convolutional encoder, bit interleaver, M-PSK mapper and
// differential encoder, plus the additive channel.

#include "mmturbo/markov_middleton.hpp"
#include "mmturbo/trellis.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mmturbo {

using BitFrame = std::vector<std::uint8_t>;

/// Rate 1/n feedforward code with an L-stage shift register. Generators are given in
/// octal convention: the most significant of the L+1 taps multiplies the current input.
struct ConvCodeSpec {
  int memory = 2;
  std::vector<unsigned> generators = {05, 07};

  void validate() const;
  int num_states() const { return 1 << memory; }
  int outputs() const { return static_cast<int>(generators.size()); }

  /// Register state holds the previous L inputs, the most recent in the top bit.
  int next_state(int state, int bit) const { return ((bit << memory) | state) >> 1; }
  /// Bit r of the result is the output of generators[r].
  unsigned output_word(int state, int bit) const;
};

/// Encodes and appends L zero tail bits so the register returns to state 0.
/// Output length is (K + L) * n.
BitFrame conv_encode(const BitFrame& bits, const ConvCodeSpec& spec);

class Interleaver {
 public:
  /// `perm` must be a permutation of [0, size).
  explicit Interleaver(std::vector<std::size_t> perm);

  std::size_t size() const { return perm_.size(); }
  const std::vector<std::size_t>& permutation() const { return perm_; }

  /// out[k] = in[perm[k]].
  template <typename T>
  std::vector<T> interleave(const std::vector<T>& in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t k = 0; k < perm_.size(); ++k) out[k] = in[perm_[k]];
    return out;
  }
  template <typename T>
  std::vector<T> deinterleave(const std::vector<T>& in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t k = 0; k < perm_.size(); ++k) out[perm_[k]] = in[k];
    return out;
  }
  /// Row-wise versions for per-bit soft tables.
  LogTable<double> interleave_rows(const LogTable<double>& in) const;
  LogTable<double> deinterleave_rows(const LogTable<double>& in) const;

 private:
  void check(std::size_t n) const {
    if (n != perm_.size()) throw std::invalid_argument("interleaver length mismatch");
  }
  std::vector<std::size_t> perm_;
};

/// Uniformly random permutation of [0, depth), deterministic in `seed`.
Interleaver make_interleaver(std::size_t depth, std::uint64_t seed);

/// Frame-length interleaver built from consecutive blocks of `depth` bits; every full
/// block uses the same random permutation, a trailing partial block gets its own.
Interleaver make_block_interleaver(std::size_t length, std::size_t depth, std::uint64_t seed);

/// M-PSK constellation {e^{j 2 pi p / M}} with a bit labeling. Symbols are carried as
/// integer phase indices p; bits are grouped log2(M) at a time, first bit most significant.
struct PskMapSpec {
  int order = 4;
  std::vector<int> label_of_phase;
  std::vector<int> phase_of_label;

  static PskMapSpec gray(int order);
  static PskMapSpec natural(int order);

  int bits_per_symbol() const;
  std::complex<double> point(int phase) const;
  void validate() const;
};

struct SymbolFrame {
  int order = 4;
  std::vector<int> phases;

  std::size_t size() const { return phases.size(); }
  Eigen::VectorXcd values() const;
};

SymbolFrame psk_map(const BitFrame& bits, const PskMapSpec& spec);
BitFrame psk_demap(const SymbolFrame& symbols, const PskMapSpec& spec);

/// z_t = x_t z_{t-1} with z_0 = 1 (phase 0); z_0 is not part of the output.
SymbolFrame differential_encode(const SymbolFrame& x);

/// y_t = s_t + n_t.
Eigen::VectorXcd apply_channel(const SymbolFrame& symbols, const NoiseRealization& noise);

/// Exact unit-circle point for phase index p of an M-ary constellation.
std::complex<double> psk_point(int phase, int order);

}  // namespace mmturbo
