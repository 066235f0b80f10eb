#include "mmturbo/tx_chain.hpp"

#include "mmturbo/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mmturbo {

void ConvCodeSpec::validate() const {
  if (memory < 1 || memory > 16) throw std::invalid_argument("code memory must lie in [1, 16]");
  if (generators.empty()) throw std::invalid_argument("code needs at least one generator");
  for (unsigned g : generators)
    if (g == 0 || g >= (1u << (memory + 1)))
      throw std::invalid_argument("generator does not fit the register length");
}

unsigned ConvCodeSpec::output_word(int state, int bit) const {
  const auto reg = static_cast<unsigned>((bit << memory) | state);
  unsigned word = 0;
  for (std::size_t r = 0; r < generators.size(); ++r)
    word |= static_cast<unsigned>(std::popcount(reg & generators[r]) & 1) << r;
  return word;
}

BitFrame conv_encode(const BitFrame& bits, const ConvCodeSpec& spec) {
  spec.validate();
  const int n = spec.outputs();
  BitFrame out;
  out.reserve((bits.size() + static_cast<std::size_t>(spec.memory)) * static_cast<std::size_t>(n));
  int state = 0;
  auto push = [&](int bit) {
    const unsigned word = spec.output_word(state, bit);
    for (int r = 0; r < n; ++r) out.push_back(static_cast<std::uint8_t>((word >> r) & 1u));
    state = spec.next_state(state, bit);
  };
  for (auto b : bits) {
    if (b > 1) throw std::invalid_argument("conv_encode expects binary input");
    push(b);
  }
  for (int k = 0; k < spec.memory; ++k) push(0);
  return out;
}

Interleaver::Interleaver(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
  std::vector<bool> hit(perm_.size(), false);
  for (auto p : perm_) {
    if (p >= perm_.size() || hit[p]) throw std::invalid_argument("interleaver is not a permutation");
    hit[p] = true;
  }
}

LogTable<double> Interleaver::interleave_rows(const LogTable<double>& in) const {
  check(static_cast<std::size_t>(in.rows()));
  LogTable<double> out(in.rows(), in.cols());
  for (std::size_t k = 0; k < perm_.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = in.row(static_cast<Eigen::Index>(perm_[k]));
  return out;
}

LogTable<double> Interleaver::deinterleave_rows(const LogTable<double>& in) const {
  check(static_cast<std::size_t>(in.rows()));
  LogTable<double> out(in.rows(), in.cols());
  for (std::size_t k = 0; k < perm_.size(); ++k)
    out.row(static_cast<Eigen::Index>(perm_[k])) = in.row(static_cast<Eigen::Index>(k));
  return out;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t depth, std::uint64_t seed) {
  std::vector<std::size_t> perm(depth);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = depth; i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
  return perm;
}

}  // namespace

Interleaver make_interleaver(std::size_t depth, std::uint64_t seed) {
  if (depth == 0) throw std::invalid_argument("interleaver depth must be positive");
  return Interleaver(shuffled_indices(depth, seed));
}

Interleaver make_block_interleaver(std::size_t length, std::size_t depth, std::uint64_t seed) {
  if (depth == 0 || length == 0) throw std::invalid_argument("interleaver depth must be positive");
  if (depth >= length) return make_interleaver(length, seed);
  const auto block = shuffled_indices(depth, seed);
  std::vector<std::size_t> perm;
  perm.reserve(length);
  std::size_t offset = 0;
  for (; offset + depth <= length; offset += depth)
    for (auto p : block) perm.push_back(offset + p);
  if (offset < length) {
    const auto tail = shuffled_indices(length - offset, derive_seed(seed, 1));
    for (auto p : tail) perm.push_back(offset + p);
  }
  return Interleaver(std::move(perm));
}

std::complex<double> psk_point(int phase, int order) {
  const int p = ((phase % order) + order) % order;
  if ((4 * p) % order == 0) {
    static constexpr std::complex<double> kQuadrant[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return kQuadrant[(4 * p) / order];
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * p / order);
}

PskMapSpec PskMapSpec::gray(int order) {
  PskMapSpec spec = natural(order);
  for (int p = 0; p < order; ++p) {
    spec.label_of_phase[static_cast<std::size_t>(p)] = p ^ (p >> 1);
    spec.phase_of_label[static_cast<std::size_t>(p ^ (p >> 1))] = p;
  }
  return spec;
}

PskMapSpec PskMapSpec::natural(int order) {
  if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order)))
    throw std::invalid_argument("PSK order must be a power of two >= 2");
  PskMapSpec spec;
  spec.order = order;
  spec.label_of_phase.resize(static_cast<std::size_t>(order));
  spec.phase_of_label.resize(static_cast<std::size_t>(order));
  std::iota(spec.label_of_phase.begin(), spec.label_of_phase.end(), 0);
  std::iota(spec.phase_of_label.begin(), spec.phase_of_label.end(), 0);
  return spec;
}

int PskMapSpec::bits_per_symbol() const { return std::countr_zero(static_cast<unsigned>(order)); }

std::complex<double> PskMapSpec::point(int phase) const { return psk_point(phase, order); }

void PskMapSpec::validate() const {
  if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order)))
    throw std::invalid_argument("PSK order must be a power of two >= 2");
  const auto m = static_cast<std::size_t>(order);
  if (label_of_phase.size() != m || phase_of_label.size() != m)
    throw std::invalid_argument("labeling table has wrong size");
  for (std::size_t p = 0; p < m; ++p) {
    const int label = label_of_phase[p];
    if (label < 0 || label >= order || phase_of_label[static_cast<std::size_t>(label)] != static_cast<int>(p))
      throw std::invalid_argument("labeling is not a bijection");
  }
}

Eigen::VectorXcd SymbolFrame::values() const {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(phases.size()));
  for (std::size_t t = 0; t < phases.size(); ++t)
    out(static_cast<Eigen::Index>(t)) = psk_point(phases[t], order);
  return out;
}

SymbolFrame psk_map(const BitFrame& bits, const PskMapSpec& spec) {
  spec.validate();
  const auto m = static_cast<std::size_t>(spec.bits_per_symbol());
  if (bits.size() % m != 0) throw std::invalid_argument("bit count not divisible by log2(M)");
  SymbolFrame out{spec.order, {}};
  out.phases.reserve(bits.size() / m);
  for (std::size_t k = 0; k < bits.size(); k += m) {
    int label = 0;
    for (std::size_t r = 0; r < m; ++r) {
      if (bits[k + r] > 1) throw std::invalid_argument("psk_map expects binary input");
      label = (label << 1) | bits[k + r];
    }
    out.phases.push_back(spec.phase_of_label[static_cast<std::size_t>(label)]);
  }
  return out;
}

BitFrame psk_demap(const SymbolFrame& symbols, const PskMapSpec& spec) {
  spec.validate();
  if (symbols.order != spec.order) throw std::invalid_argument("symbol order does not match mapper");
  const int m = spec.bits_per_symbol();
  BitFrame out;
  out.reserve(symbols.size() * static_cast<std::size_t>(m));
  for (int p : symbols.phases) {
    const int label = spec.label_of_phase[static_cast<std::size_t>(p)];
    for (int r = m - 1; r >= 0; --r) out.push_back(static_cast<std::uint8_t>((label >> r) & 1));
  }
  return out;
}

SymbolFrame differential_encode(const SymbolFrame& x) {
  SymbolFrame z{x.order, {}};
  z.phases.reserve(x.size());
  int prev = 0;
  for (int p : x.phases) {
    if (p < 0 || p >= x.order) throw std::invalid_argument("phase index outside the constellation");
    prev = (prev + p) % x.order;
    z.phases.push_back(prev);
  }
  return z;
}

Eigen::VectorXcd apply_channel(const SymbolFrame& symbols, const NoiseRealization& noise) {
  if (static_cast<Eigen::Index>(symbols.size()) != noise.samples.size())
    throw std::invalid_argument("symbol and noise lengths differ");
  return symbols.values() + noise.samples;
}

}  // namespace mmturbo
