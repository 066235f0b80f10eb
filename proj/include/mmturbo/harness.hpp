#pragma once

// Experiment orchestration: configuration, seeded Monte-Carlo sweeps, CSV output and the
// receiver complexity count. Work is fanned out per sequence / frame and reduced in index
// order, so every output is identical for any thread count.

#include "mmturbo/air.hpp"
#include "mmturbo/markov_middleton.hpp"
#include "mmturbo/receivers.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmturbo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Experiment { air, ber, noise, complexity };

std::string_view to_string(Experiment kind);

struct SimConfig {
  Experiment kind = Experiment::air;

  // channel; the list-valued entries span the sweep grid
  int num_states = 4;
  std::vector<double> impulsive_index = {0.3};
  std::vector<double> power_ratio = {10.0};
  std::vector<double> correlation = {0.0};
  std::vector<double> snr_db = {3.0};
  int order = 4;

  // receiver assumptions; unset entries follow the channel
  std::optional<int> rx_num_states;
  std::optional<double> rx_impulsive_index;
  std::optional<double> rx_power_ratio;
  std::optional<double> rx_correlation;

  // air
  std::size_t seq_length = 100000;
  std::size_t n_sequences = 10;

  // ber
  std::vector<ReceiverDesign> designs = {ReceiverDesign::joint};
  int iterations = 10;
  int genie_iterations = 30;
  std::size_t info_bits = 49998;
  std::size_t depth = 0;  // 0: one interleaver spanning the coded frame
  std::size_t min_errors = 100;
  std::size_t max_frames = 200;
  double clamp = 50.0;
  ConvCodeSpec code;

  // noise
  std::size_t length = 10000;

  // complexity
  std::vector<int> complexity_iterations = {0, 1, 2, 3, 10};

  std::uint64_t seed = 1;
  unsigned threads = 1;

  MarkovMiddletonParams channel(double a, double lambda, double r, double snr) const;
  /// Receiver model for a channel point; sigma0^2 is always the channel's.
  MarkovMiddletonParams receiver(const MarkovMiddletonParams& channel) const;
};

/// Keys accepted by an experiment, in output order.
const std::vector<std::string>& config_keys(Experiment kind);

/// Flat "key = value" text; '#' starts a comment. Throws ConfigError on malformed lines.
std::map<std::string, std::string> parse_config_text(std::string_view text);
/// Throws IoError when the file cannot be read.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies `values` over the defaults and validates the result. Throws ConfigError.
SimConfig resolve_config(Experiment kind, const std::map<std::string, std::string>& values);

/// Every resolved key of the experiment, one "key = value" per line.
std::string render_config(const SimConfig& config);

/// Shortest round-trip decimal form.
std::string format_double(double value);

// --- AIR -------------------------------------------------------------------------------

struct AirRow {
  double snr_db;
  AirEstimate estimate;
  std::uint64_t seed;
};

/// Grid order: A, Lambda, r, SNR (last varies fastest). Every point uses the master seed.
std::vector<AirRow> run_air_sweep(const SimConfig& config);
void write_air_csv(std::ostream& out, const std::vector<AirRow>& rows);

// --- BER -------------------------------------------------------------------------------

struct BerPoint {
  ReceiverDesign design;
  double snr_db;
  MarkovMiddletonParams channel;
  MarkovMiddletonParams receiver;
  std::size_t info_bits;
  std::size_t depth;
  std::size_t min_errors;
  std::uint64_t seed;
  /// frame_errors[f][i]: bit errors of frame f after iteration i.
  std::vector<std::vector<std::uint32_t>> frame_errors;

  std::size_t frames() const { return frame_errors.size(); }
  std::size_t iterations() const { return frame_errors.empty() ? 0 : frame_errors.front().size(); }
  std::size_t errors(std::size_t iteration) const;
  double ber(std::size_t iteration) const;
  /// Standard error of the BER from the spread of per-frame error rates.
  double std_error(std::size_t iteration) const;
  double final_ber() const { return ber(iterations() - 1); }
};

/// Transmits and decodes frames f = 0, 1, ... until the last iteration has accumulated
/// `min_errors` bit errors or `max_frames` frames were used. Frame f draws its bits and
/// noise from derive_seed(seed, f), so every design and SNR sees the same frames.
BerPoint run_ber_point(const SimConfig& config, ReceiverDesign design, const MarkovMiddletonParams& channel,
                       double snr_db);

/// Grid order: A, Lambda, r, design, SNR.
std::vector<BerPoint> run_ber_sweep(const SimConfig& config);
void write_ber_csv(std::ostream& out, const std::vector<BerPoint>& points);

// --- noise and complexity --------------------------------------------------------------

NoiseRealization run_noise_dump(const SimConfig& config);
void write_noise_csv(std::ostream& out, const NoiseRealization& noise);

/// Multiplications per symbol of the joint or separate turbo receiver.
std::uint64_t complexity_count(int order, int noise_states, int memory, int iterations, ReceiverDesign design);
void write_complexity_csv(std::ostream& out, const SimConfig& config);

}  // namespace mmturbo
