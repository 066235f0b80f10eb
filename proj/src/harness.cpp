#include "mmturbo/harness.hpp"

#include "mmturbo/parallel.hpp"
#include "mmturbo/random.hpp"

#include <cmath>

namespace mmturbo {

namespace {

constexpr std::uint64_t kInterleaverStream = ~std::uint64_t{0};

struct FrameResult {
  std::vector<std::uint32_t> errors;
};

}  // namespace

std::vector<AirRow> run_air_sweep(const SimConfig& c) {
  std::vector<AirRow> rows;
  for (double a : c.impulsive_index)
    for (double lambda : c.power_ratio)
      for (double r : c.correlation)
        for (double snr : c.snr_db) {
          AirRequest req;
          req.channel = c.channel(a, lambda, r, snr);
          req.receiver = c.receiver(req.channel);
          req.order = c.order;
          req.snr_db = snr;
          req.seq_length = c.seq_length;
          req.n_sequences = c.n_sequences;
          req.seed = c.seed;
          req.threads = c.threads;
          rows.push_back({snr, estimate_air(req), c.seed});
        }
  return rows;
}

void write_air_csv(std::ostream& out, const std::vector<AirRow>& rows) {
  out << "A,Lambda,r,W,snr_db,rx_A,rx_Lambda,rx_r,rx_W,air_bits,std_err,T,n_seq,seed\n";
  for (const auto& row : rows) {
    const auto& ch = row.estimate.channel;
    const auto& rx = row.estimate.receiver;
    out << format_double(ch.impulsive_index) << ',' << format_double(ch.power_ratio) << ','
        << format_double(ch.correlation) << ',' << ch.num_states << ',' << format_double(row.snr_db) << ','
        << format_double(rx.impulsive_index) << ',' << format_double(rx.power_ratio) << ','
        << format_double(rx.correlation) << ',' << rx.num_states << ',' << format_double(row.estimate.air) << ','
        << format_double(row.estimate.std_error) << ',' << row.estimate.seq_length << ','
        << row.estimate.n_sequences << ',' << row.seed << '\n';
  }
}

std::size_t BerPoint::errors(std::size_t iteration) const {
  std::size_t total = 0;
  for (const auto& f : frame_errors) total += f.at(iteration);
  return total;
}

double BerPoint::ber(std::size_t iteration) const {
  if (frame_errors.empty()) return 0;
  return static_cast<double>(errors(iteration)) / static_cast<double>(frames() * info_bits);
}

double BerPoint::std_error(std::size_t iteration) const {
  const std::size_t n = frames();
  if (n < 2) return 0;
  const double mean = ber(iteration);
  double ss = 0;
  for (const auto& f : frame_errors) {
    const double p = static_cast<double>(f.at(iteration)) / static_cast<double>(info_bits);
    ss += (p - mean) * (p - mean);
  }
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

BerPoint run_ber_point(const SimConfig& c, ReceiverDesign design, const MarkovMiddletonParams& channel_point,
                       double snr_db) {
  MarkovMiddletonParams channel = channel_point;
  channel.background_var = background_var_for_snr(snr_db);
  TurboConfig tc;
  tc.design = design;
  tc.rx = c.receiver(channel);
  tc.iterations = design == ReceiverDesign::genie_csi ? c.genie_iterations : c.iterations;
  tc.code = c.code;
  tc.labeling = PskMapSpec::gray(c.order);
  tc.info_bits = c.info_bits;
  tc.clamp = c.clamp;
  const auto geom = FrameGeometry::make(c.info_bits, c.code, tc.labeling);
  const std::size_t depth = c.depth == 0 ? geom.coded_bits : c.depth;
  const auto pi = make_block_interleaver(geom.coded_bits, depth, derive_seed(c.seed, kInterleaverStream));
  const TurboReceiver receiver(tc, pi);

  auto one_frame = [&](std::size_t frame) {
    const std::uint64_t seed = derive_seed(c.seed, frame);
    Rng rng(derive_seed(seed, 0));
    BitFrame info(c.info_bits);
    for (auto& b : info) b = static_cast<std::uint8_t>(uniform_below(rng, 2));
    const auto x = psk_map(pi.interleave(conv_encode(info, c.code)), tc.labeling);
    const auto tx = uses_differential(design) ? differential_encode(x) : x;
    const auto noise = sample_noise(channel, tx.size(), derive_seed(seed, 1));
    const auto out = receiver.decode(apply_channel(tx, noise), &noise.states);
    FrameResult result;
    for (const auto& d : out.decisions) {
      std::uint32_t e = 0;
      for (std::size_t k = 0; k < info.size(); ++k) e += d[k] != info[k];
      result.errors.push_back(e);
    }
    return result;
  };

  BerPoint point{design, snr_db, channel, tc.rx, c.info_bits, depth, c.min_errors, c.seed, {}};
  const std::size_t batch = resolve_threads(c.threads);
  std::size_t total = 0;
  for (std::size_t next = 0; next < c.max_frames && total < c.min_errors;) {
    const std::size_t count = std::min(batch, c.max_frames - next);
    auto results = parallel_map(next, count, c.threads, one_frame);
    // Frames are consumed in index order; the stopping frame does not depend on the batch size.
    for (auto& r : results) {
      if (total >= c.min_errors) break;
      total += r.errors.back();
      point.frame_errors.push_back(std::move(r.errors));
    }
    next += count;
  }
  return point;
}

std::vector<BerPoint> run_ber_sweep(const SimConfig& c) {
  std::vector<BerPoint> points;
  for (double a : c.impulsive_index)
    for (double lambda : c.power_ratio)
      for (double r : c.correlation)
        for (auto design : c.designs)
          for (double snr : c.snr_db) points.push_back(run_ber_point(c, design, c.channel(a, lambda, r, snr), snr));
  return points;
}

void write_ber_csv(std::ostream& out, const std::vector<BerPoint>& points) {
  out << "snr_db,design,iteration,A,Lambda,r,W,rx_A,rx_Lambda,rx_r,rx_W,depth,info_bits,frames,bit_errors,bits,"
         "ber,std_err,low_confidence,seed\n";
  for (const auto& p : points) {
    const std::size_t final_errors = p.iterations() ? p.errors(p.iterations() - 1) : 0;
    for (std::size_t i = 0; i < p.iterations(); ++i) {
      out << format_double(p.snr_db) << ',' << to_string(p.design) << ',' << i << ','
          << format_double(p.channel.impulsive_index) << ',' << format_double(p.channel.power_ratio) << ','
          << format_double(p.channel.correlation) << ',' << p.channel.num_states << ','
          << format_double(p.receiver.impulsive_index) << ',' << format_double(p.receiver.power_ratio) << ','
          << format_double(p.receiver.correlation) << ',' << p.receiver.num_states << ',' << p.depth << ','
          << p.info_bits << ',' << p.frames() << ',' << p.errors(i) << ',' << p.frames() * p.info_bits << ','
          << format_double(p.ber(i)) << ',' << format_double(p.std_error(i)) << ','
          << (final_errors < p.min_errors ? 1 : 0) << ',' << p.seed << '\n';
    }
  }
}

NoiseRealization run_noise_dump(const SimConfig& c) {
  const auto ch = c.channel(c.impulsive_index.front(), c.power_ratio.front(), c.correlation.front(), c.snr_db.front());
  return sample_noise(ch, c.length, c.seed);
}

void write_noise_csv(std::ostream& out, const NoiseRealization& noise) {
  out << "t,state,re,im\n";
  for (std::size_t t = 0; t < noise.states.size(); ++t) {
    const auto v = noise.samples(static_cast<Eigen::Index>(t));
    out << t + 1 << ',' << noise.states[t] << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
  }
}

std::uint64_t complexity_count(int order, int noise_states, int memory, int iterations, ReceiverDesign design) {
  if (order < 1 || noise_states < 1 || memory < 1 || iterations < 0)
    throw std::invalid_argument("complexity inputs must be positive");
  auto ipow = [](std::uint64_t base, int exp) {
    std::uint64_t v = 1;
    while (exp-- > 0) v *= base;
    return v;
  };
  const std::uint64_t m = static_cast<std::uint64_t>(order);
  const std::uint64_t super = m * m * static_cast<std::uint64_t>(noise_states) * static_cast<std::uint64_t>(noise_states);
  const std::uint64_t code = ipow(m, 2 * memory);
  const std::uint64_t passes = static_cast<std::uint64_t>(iterations) + 1;
  switch (design) {
    case ReceiverDesign::joint: return 2 * passes * (super + code);
    case ReceiverDesign::separate: return 2 * (super + passes * (m * m + code));
    default: throw std::invalid_argument("complexity is defined for the joint and separate designs");
  }
}

void write_complexity_csv(std::ostream& out, const SimConfig& c) {
  out << "order,W,memory,iterations,design,multiplications_per_symbol\n";
  for (auto design : {ReceiverDesign::joint, ReceiverDesign::separate})
    for (int i : c.complexity_iterations)
      out << c.order << ',' << c.num_states << ',' << c.code.memory << ',' << i << ',' << to_string(design) << ','
          << complexity_count(c.order, c.num_states, c.code.memory, i, design) << '\n';
}

}  // namespace mmturbo
