#include "dsic/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dsic {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::order_sweep: return "order_sweep";
    case ExperimentKind::pilot_length: return "pilot_length";
    case ExperimentKind::pilot_compare: return "pilot_compare";
    case ExperimentKind::mimo: return "mimo";
    case ExperimentKind::iq: return "iq";
    case ExperimentKind::bound_check: return "bound_check";
    case ExperimentKind::select_pilot: return "select_pilot";
  }
  return "?";
}

std::string to_string(Profile p) {
  return p == Profile::desk ? "desk" : "paper";
}

std::string to_string(PilotDistribution d) {
  switch (d) {
    case PilotDistribution::gaussian: return "gaussian";
    case PilotDistribution::chisq: return "chisq";
    case PilotDistribution::multitone: return "multitone";
  }
  return "?";
}

ExperimentKind experiment_from_string(const std::string& s) {
  for (ExperimentKind k : {ExperimentKind::order_sweep, ExperimentKind::pilot_length,
                           ExperimentKind::pilot_compare, ExperimentKind::mimo,
                           ExperimentKind::iq, ExperimentKind::bound_check,
                           ExperimentKind::select_pilot})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment: " + s);
}

Profile profile_from_string(const std::string& s) {
  if (s == "desk") return Profile::desk;
  if (s == "paper") return Profile::paper;
  throw ConfigError("unknown profile: " + s + " (expected desk or paper)");
}

PilotDistribution distribution_from_string(const std::string& s) {
  for (PilotDistribution d : {PilotDistribution::gaussian, PilotDistribution::chisq,
                              PilotDistribution::multitone})
    if (to_string(d) == s) return d;
  throw ConfigError("unknown pilot_distribution: " + s);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

long long parse_ll(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* begin = v.data();
  const auto* end = v.data() + v.size();
  auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("bad unsigned integer for " + key + ": '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(v);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!v.empty() && v.back() == ',') out.push_back("");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& tok : split_commas(v))
    out.push_back(static_cast<int>(parse_ll(key, tok)));
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& tok : split_commas(v))
    out.push_back(parse_double(key, tok));
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

std::string fmt_double(double d) {
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(17);
  ss << d;
  return ss.str();
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != 1)
    throw ConfigError("unsupported schema_version (expected 1)");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (orders.empty()) throw ConfigError("orders must be nonempty");
  for (int p : orders)
    if (p < 1 || p % 2 == 0)
      throw ConfigError("orders must all be odd and >= 1");
  if (fixed_order < 1 || fixed_order % 2 == 0)
    throw ConfigError("fixed_order must be odd and >= 1");
  if (memory < 0) throw ConfigError("memory must be >= 0");
  if (symbol_len < 1) throw ConfigError("symbol_len must be >= 1");
  if (pilot_symbols.empty()) throw ConfigError("pilot_symbols must be nonempty");
  for (int s : pilot_symbols)
    if (s < 1) throw ConfigError("pilot_symbols entries must be >= 1");
  if (pilot_symbols_fixed < 1) throw ConfigError("pilot_symbols_fixed must be >= 1");
  if (data_symbols < 1) throw ConfigError("data_symbols must be >= 1");
  if (ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
  if (antennas.empty()) throw ConfigError("antennas must be nonempty");
  for (int m : antennas)
    if (m < 1 || m > 16) throw ConfigError("antennas entries must be in [1,16]");
  if (irr_list_db.empty()) throw ConfigError("irr_list_db must be nonempty");
  for (double v : irr_list_db)
    if (std::isnan(v) || v < 0.0) throw ConfigError("irr_list_db entries must be >= 0");
  if (instances < 1) throw ConfigError("instances must be >= 1");
  if (truth_order < 1 || truth_order % 2 == 0)
    throw ConfigError("truth_order must be odd and >= 1");
  if (pa_fit_samples < static_cast<std::size_t>(5 * (truth_order + 1)))
    throw ConfigError("pa_fit_samples must be >= 5 * (truth_order + 1)");
  if (isolation_db < 0 || asic_db < 0)
    throw ConfigError("isolation_db and asic_db must be >= 0");
  if (!(delay_spread_taps > 0))
    throw ConfigError("delay_spread_taps must be > 0");
  try {
    budget.validate();
    pa.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream ss;
  ss << "schema_version = " << schema_version << '\n'
     << "experiment = " << to_string(experiment) << '\n'
     << "profile = " << to_string(profile) << '\n'
     << "trials = " << trials << '\n'
     << "master_seed = " << master_seed << '\n'
     << "orders = " << join(orders, [](int v) { return std::to_string(v); }) << '\n'
     << "fixed_order = " << fixed_order << '\n'
     << "memory = " << memory << '\n'
     << "symbol_len = " << symbol_len << '\n'
     << "pilot_symbols = "
     << join(pilot_symbols, [](int v) { return std::to_string(v); }) << '\n'
     << "pilot_symbols_fixed = " << pilot_symbols_fixed << '\n'
     << "data_symbols = " << data_symbols << '\n'
     << "pilot_distribution = " << to_string(pilot_distribution) << '\n'
     << "ensemble_size = " << ensemble_size << '\n'
     << "multitone_tones = " << multitone_tones << '\n'
     << "antennas = " << join(antennas, [](int v) { return std::to_string(v); }) << '\n'
     << "irr_list_db = " << join(irr_list_db, fmt_double) << '\n'
     << "instances = " << instances << '\n'
     << "tx_power_dbm = " << fmt_double(budget.tx_power_dbm) << '\n'
     << "tx_snr_db = " << fmt_double(budget.tx_snr_db) << '\n'
     << "rx_noise_dbm = " << fmt_double(budget.rx_noise_dbm) << '\n'
     << "adc_bits = " << budget.adc_bits << '\n'
     << "pa_gain_db = " << fmt_double(pa.linear_gain_db) << '\n'
     << "pa_sat_dbm = " << fmt_double(pa.sat_power_dbm) << '\n'
     << "pa_smooth = " << fmt_double(pa.smooth) << '\n'
     << "pa_phase_gain = " << fmt_double(pa.phase_gain) << '\n'
     << "pa_phase_sat = " << fmt_double(pa.phase_sat) << '\n'
     << "pa_phase_smooth = " << fmt_double(pa.phase_smooth) << '\n'
     << "isolation_db = " << fmt_double(isolation_db) << '\n'
     << "asic_db = " << fmt_double(asic_db) << '\n'
     << "delay_spread_taps = " << fmt_double(delay_spread_taps) << '\n'
     << "truth_order = " << truth_order << '\n'
     << "pa_fit_samples = " << pa_fit_samples << '\n';
  return ss.str();
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string text = serialize();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ExperimentConfig default_config(ExperimentKind kind, Profile profile) {
  ExperimentConfig cfg;  // member initializers are the desk preset
  cfg.experiment = kind;
  cfg.profile = profile;
  if (profile == Profile::paper) {
    cfg.memory = 99;  // 100 channel taps
    cfg.symbol_len = 1280;
    cfg.trials = 1000;
    cfg.ensemble_size = 1000;
    cfg.data_symbols = 10;
    cfg.pilot_symbols_fixed = 1;
    cfg.isolation_db = 0.0;
    cfg.pa_fit_samples = std::size_t{1} << 22;
  }
  switch (kind) {
    case ExperimentKind::pilot_length:
      // One notch below the full order: enough unmodeled content remains for
      // the heavy-amplitude pilot's mismatch bias to show at long pilots,
      // while estimation error still dominates the Gaussian pilot's curve
      // across the whole sweep.
      cfg.fixed_order = 7;
      break;
    case ExperimentKind::iq:
      cfg.trials = profile == Profile::paper ? 200 : 60;
      // The image-aware basis squares the per-tap regressor count, so the
      // full default order would drown the short pilot in estimation noise
      // for both cancellers; the comparison is about the image terms, not
      // the order budget.
      cfg.fixed_order = 5;
      break;
    case ExperimentKind::mimo:
      cfg.trials = profile == Profile::paper ? 200 : 50;
      break;
    default:
      break;
  }
  return cfg;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw ConfigError("duplicate config key: " + key);
    kv[key] = val;
  }
  return kv;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv_text(ss.str());
}

namespace {

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& val) {
  if (key == "schema_version") {
    cfg.schema_version = static_cast<int>(parse_ll(key, val));
  } else if (key == "experiment" || key == "profile") {
    // consumed by build_config before this point
  } else if (key == "trials") {
    cfg.trials = static_cast<int>(parse_ll(key, val));
  } else if (key == "master_seed") {
    cfg.master_seed = parse_u64(key, val);
  } else if (key == "orders") {
    cfg.orders = parse_int_list(key, val);
  } else if (key == "fixed_order") {
    cfg.fixed_order = static_cast<int>(parse_ll(key, val));
  } else if (key == "memory") {
    cfg.memory = static_cast<int>(parse_ll(key, val));
  } else if (key == "symbol_len") {
    cfg.symbol_len = static_cast<int>(parse_ll(key, val));
  } else if (key == "pilot_symbols") {
    cfg.pilot_symbols = parse_int_list(key, val);
  } else if (key == "pilot_symbols_fixed") {
    cfg.pilot_symbols_fixed = static_cast<int>(parse_ll(key, val));
  } else if (key == "data_symbols") {
    cfg.data_symbols = static_cast<int>(parse_ll(key, val));
  } else if (key == "pilot_distribution") {
    cfg.pilot_distribution = distribution_from_string(val);
  } else if (key == "ensemble_size") {
    cfg.ensemble_size = static_cast<int>(parse_ll(key, val));
  } else if (key == "multitone_tones") {
    cfg.multitone_tones = static_cast<std::size_t>(parse_u64(key, val));
  } else if (key == "antennas") {
    cfg.antennas = parse_int_list(key, val);
  } else if (key == "irr_list_db") {
    cfg.irr_list_db = parse_double_list(key, val);
  } else if (key == "instances") {
    cfg.instances = static_cast<int>(parse_ll(key, val));
  } else if (key == "tx_power_dbm") {
    cfg.budget.tx_power_dbm = parse_double(key, val);
  } else if (key == "tx_snr_db") {
    cfg.budget.tx_snr_db = parse_double(key, val);
  } else if (key == "rx_noise_dbm") {
    cfg.budget.rx_noise_dbm = parse_double(key, val);
  } else if (key == "adc_bits") {
    cfg.budget.adc_bits = static_cast<int>(parse_ll(key, val));
  } else if (key == "pa_gain_db") {
    cfg.pa.linear_gain_db = parse_double(key, val);
  } else if (key == "pa_sat_dbm") {
    cfg.pa.sat_power_dbm = parse_double(key, val);
  } else if (key == "pa_smooth") {
    cfg.pa.smooth = parse_double(key, val);
  } else if (key == "pa_phase_gain") {
    cfg.pa.phase_gain = parse_double(key, val);
  } else if (key == "pa_phase_sat") {
    cfg.pa.phase_sat = parse_double(key, val);
  } else if (key == "pa_phase_smooth") {
    cfg.pa.phase_smooth = parse_double(key, val);
  } else if (key == "isolation_db") {
    cfg.isolation_db = parse_double(key, val);
  } else if (key == "asic_db") {
    cfg.asic_db = parse_double(key, val);
  } else if (key == "delay_spread_taps") {
    cfg.delay_spread_taps = parse_double(key, val);
  } else if (key == "truth_order") {
    cfg.truth_order = static_cast<int>(parse_ll(key, val));
  } else if (key == "pa_fit_samples") {
    cfg.pa_fit_samples = static_cast<std::size_t>(parse_u64(key, val));
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

}  // namespace

ExperimentConfig build_config(std::optional<ExperimentKind> cli_kind,
                              std::optional<Profile> cli_profile,
                              const std::map<std::string, std::string>& kv) {
  Profile profile = Profile::desk;
  if (auto it = kv.find("profile"); it != kv.end())
    profile = profile_from_string(it->second);
  if (cli_profile) profile = *cli_profile;

  ExperimentKind kind = ExperimentKind::order_sweep;
  if (auto it = kv.find("experiment"); it != kv.end())
    kind = experiment_from_string(it->second);
  if (cli_kind) kind = *cli_kind;

  if (!kv.empty() && !kv.count("schema_version"))
    throw ConfigError("config file must declare schema_version = 1");

  ExperimentConfig cfg = default_config(kind, profile);
  for (const auto& [key, val] : kv) apply_key(cfg, key, val);
  cfg.experiment = kind;
  cfg.profile = profile;
  cfg.validate();
  return cfg;
}

}  // namespace dsic
