#include "mmturbo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mmturbo {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto comma = s.find(',');
    parts.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return parts;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view text) {
  throw ConfigError("invalid value for '" + key + "': '" + std::string(text) + "'");
}

double parse_real(const std::string& key, std::string_view text) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) bad_value(key, text);
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, std::string_view text, int base = 10) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) bad_value(key, text);
  return v;
}

std::vector<double> parse_reals(const std::string& key, std::string_view text) {
  std::vector<double> out;
  for (auto part : split_list(text)) out.push_back(parse_real(key, part));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) out += (k ? "," : "") + format_double(values[k]);
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) out += (k ? "," : "") + std::to_string(values[k]);
  return out;
}

std::string octal(unsigned v) {
  std::ostringstream s;
  s << std::oct << v;
  return s.str();
}

const std::vector<std::string> kAirKeys = {"W", "A", "Lambda", "r", "snr_db", "order", "rx_W", "rx_A",
                                           "rx_Lambda", "rx_r", "seq_length", "n_sequences", "seed", "threads"};
const std::vector<std::string> kBerKeys = {"W", "A", "Lambda", "r", "snr_db", "order", "rx_W", "rx_A", "rx_Lambda",
                                           "rx_r", "designs", "iterations", "genie_iterations", "info_bits", "depth",
                                           "min_errors", "max_frames", "clamp", "memory", "generators", "seed", "threads"};
const std::vector<std::string> kNoiseKeys = {"W", "A", "Lambda", "r", "snr_db", "length", "seed", "threads"};
const std::vector<std::string> kComplexityKeys = {"order", "W", "memory", "iterations"};

}  // namespace

std::string_view to_string(Experiment kind) {
  switch (kind) {
    case Experiment::air: return "air";
    case Experiment::ber: return "ber";
    case Experiment::noise: return "noise";
    case Experiment::complexity: return "complexity";
  }
  return "unknown";
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys(Experiment kind) {
  switch (kind) {
    case Experiment::air: return kAirKeys;
    case Experiment::ber: return kBerKeys;
    case Experiment::noise: return kNoiseKeys;
    case Experiment::complexity: return kComplexityKeys;
  }
  return kAirKeys;
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(value);
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  return parse_config_text(buf.str());
}

MarkovMiddletonParams SimConfig::channel(double a, double lambda, double r, double snr) const {
  return {num_states, a, lambda, r, background_var_for_snr(snr)};
}

MarkovMiddletonParams SimConfig::receiver(const MarkovMiddletonParams& ch) const {
  MarkovMiddletonParams rx = ch;
  if (rx_num_states) rx.num_states = *rx_num_states;
  if (rx_impulsive_index) rx.impulsive_index = *rx_impulsive_index;
  if (rx_power_ratio) rx.power_ratio = *rx_power_ratio;
  if (rx_correlation) rx.correlation = *rx_correlation;
  return rx;
}

SimConfig resolve_config(Experiment kind, const std::map<std::string, std::string>& values) {
  SimConfig cfg;
  cfg.kind = kind;
  if (kind == Experiment::noise) cfg.snr_db = {0.0};
  const auto& keys = config_keys(kind);
  for (const auto& [key, text] : values) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown key '" + key + "' for the " + std::string(to_string(kind)) + " experiment");
    if (key == "W") cfg.num_states = parse_int<int>(key, text);
    else if (key == "A") cfg.impulsive_index = parse_reals(key, text);
    else if (key == "Lambda") cfg.power_ratio = parse_reals(key, text);
    else if (key == "r") cfg.correlation = parse_reals(key, text);
    else if (key == "snr_db") cfg.snr_db = parse_reals(key, text);
    else if (key == "order") cfg.order = parse_int<int>(key, text);
    else if (key == "rx_W") cfg.rx_num_states = parse_int<int>(key, text);
    else if (key == "rx_A") cfg.rx_impulsive_index = parse_real(key, text);
    else if (key == "rx_Lambda") cfg.rx_power_ratio = parse_real(key, text);
    else if (key == "rx_r") cfg.rx_correlation = parse_real(key, text);
    else if (key == "seq_length") cfg.seq_length = parse_int<std::size_t>(key, text);
    else if (key == "n_sequences") cfg.n_sequences = parse_int<std::size_t>(key, text);
    else if (key == "designs") {
      cfg.designs.clear();
      for (auto part : split_list(text)) {
        const auto d = parse_design(part);
        if (!d) bad_value(key, part);
        cfg.designs.push_back(*d);
      }
    } else if (key == "iterations") {
      if (kind == Experiment::complexity) {
        cfg.complexity_iterations.clear();
        for (auto part : split_list(text)) cfg.complexity_iterations.push_back(parse_int<int>(key, part));
      } else {
        cfg.iterations = parse_int<int>(key, text);
      }
    } else if (key == "genie_iterations") cfg.genie_iterations = parse_int<int>(key, text);
    else if (key == "info_bits") cfg.info_bits = parse_int<std::size_t>(key, text);
    else if (key == "depth") cfg.depth = parse_int<std::size_t>(key, text);
    else if (key == "min_errors") cfg.min_errors = parse_int<std::size_t>(key, text);
    else if (key == "max_frames") cfg.max_frames = parse_int<std::size_t>(key, text);
    else if (key == "clamp") cfg.clamp = parse_real(key, text);
    else if (key == "memory") cfg.code.memory = parse_int<int>(key, text);
    else if (key == "generators") {
      cfg.code.generators.clear();
      for (auto part : split_list(text)) cfg.code.generators.push_back(parse_int<unsigned>(key, part, 8));
    } else if (key == "length") cfg.length = parse_int<std::size_t>(key, text);
    else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, text);
    else if (key == "threads") cfg.threads = parse_int<unsigned>(key, text);
  }

  try {
    if (kind == Experiment::complexity) {
      if (cfg.order < 1 || cfg.num_states < 1 || cfg.code.memory < 1)
        throw ConfigError("order, W and memory must be positive");
      if (cfg.complexity_iterations.empty()) throw ConfigError("iterations list is empty");
      for (int i : cfg.complexity_iterations)
        if (i < 0) throw ConfigError("iteration counts must be non-negative");
      return cfg;
    }
    if (cfg.impulsive_index.empty() || cfg.power_ratio.empty() || cfg.correlation.empty() || cfg.snr_db.empty())
      throw ConfigError("parameter grids must be non-empty");
    for (double a : cfg.impulsive_index)
      for (double l : cfg.power_ratio)
        for (double r : cfg.correlation)
          for (double s : cfg.snr_db) {
            const auto ch = cfg.channel(a, l, r, s);
            ch.validate();
            if (kind != Experiment::noise) cfg.receiver(ch).validate();
          }
    if (kind == Experiment::noise) {
      if (cfg.impulsive_index.size() * cfg.power_ratio.size() * cfg.correlation.size() * cfg.snr_db.size() != 1)
        throw ConfigError("the noise experiment takes a single parameter point");
      if (cfg.length == 0) throw ConfigError("length must be positive");
      return cfg;
    }
    PskMapSpec::gray(cfg.order).validate();
    if (kind == Experiment::air) {
      if (cfg.seq_length == 0 || cfg.n_sequences == 0) throw ConfigError("seq_length and n_sequences must be positive");
      return cfg;
    }
    if (cfg.designs.empty()) throw ConfigError("designs list is empty");
    if (cfg.iterations < 0 || cfg.genie_iterations < 0) throw ConfigError("iteration counts must be non-negative");
    if (cfg.min_errors == 0 || cfg.max_frames == 0) throw ConfigError("min_errors and max_frames must be positive");
    if (!(cfg.clamp > 0)) throw ConfigError("clamp must be positive");
    FrameGeometry::make(cfg.info_bits, cfg.code, PskMapSpec::gray(cfg.order));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::string render_config(const SimConfig& c) {
  std::ostringstream out;
  out << "# resolved " << to_string(c.kind) << " configuration\n";
  auto line = [&](const std::string& key, const std::string& value) { out << key << " = " << value << "\n"; };
  for (const auto& key : config_keys(c.kind)) {
    if (key == "W") line(key, std::to_string(c.num_states));
    else if (key == "A") line(key, join(c.impulsive_index));
    else if (key == "Lambda") line(key, join(c.power_ratio));
    else if (key == "r") line(key, join(c.correlation));
    else if (key == "snr_db") line(key, join(c.snr_db));
    else if (key == "order") line(key, std::to_string(c.order));
    else if (key == "rx_W") line(key, c.rx_num_states ? std::to_string(*c.rx_num_states) : "channel");
    else if (key == "rx_A") line(key, c.rx_impulsive_index ? format_double(*c.rx_impulsive_index) : "channel");
    else if (key == "rx_Lambda") line(key, c.rx_power_ratio ? format_double(*c.rx_power_ratio) : "channel");
    else if (key == "rx_r") line(key, c.rx_correlation ? format_double(*c.rx_correlation) : "channel");
    else if (key == "seq_length") line(key, std::to_string(c.seq_length));
    else if (key == "n_sequences") line(key, std::to_string(c.n_sequences));
    else if (key == "designs") {
      std::string names;
      for (std::size_t k = 0; k < c.designs.size(); ++k) names += (k ? "," : "") + std::string(to_string(c.designs[k]));
      line(key, names);
    } else if (key == "iterations")
      line(key, c.kind == Experiment::complexity ? join_ints(c.complexity_iterations) : std::to_string(c.iterations));
    else if (key == "genie_iterations") line(key, std::to_string(c.genie_iterations));
    else if (key == "info_bits") line(key, std::to_string(c.info_bits));
    else if (key == "depth") line(key, std::to_string(c.depth));
    else if (key == "min_errors") line(key, std::to_string(c.min_errors));
    else if (key == "max_frames") line(key, std::to_string(c.max_frames));
    else if (key == "clamp") line(key, format_double(c.clamp));
    else if (key == "memory") line(key, std::to_string(c.code.memory));
    else if (key == "generators") {
      std::string g;
      for (std::size_t k = 0; k < c.code.generators.size(); ++k) g += (k ? "," : "") + octal(c.code.generators[k]);
      line(key, g);
    } else if (key == "length") line(key, std::to_string(c.length));
    else if (key == "seed") line(key, std::to_string(c.seed));
    else if (key == "threads") line(key, std::to_string(c.threads));
  }
  if (c.kind == Experiment::air || c.kind == Experiment::ber)
    out << "# receiver sigma0^2 is frozen to the channel value at every SNR\n";
  return out.str();
}

}  // namespace mmturbo
