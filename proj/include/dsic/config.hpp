#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsic/frontend.hpp"
#include "dsic/pilot_opt.hpp"
#include "dsic/types.hpp"

namespace dsic {

enum class ExperimentKind {
  order_sweep,
  pilot_length,
  pilot_compare,
  mimo,
  iq,
  bound_check,
  select_pilot,
};

/// desk: small dimensions that finish in seconds-to-minutes on a laptop.
/// paper: full-scale dimensions; hours of compute, not run in CI.
enum class Profile { desk, paper };

std::string to_string(ExperimentKind k);
std::string to_string(Profile p);
std::string to_string(PilotDistribution d);
ExperimentKind experiment_from_string(const std::string& s);
Profile profile_from_string(const std::string& s);
PilotDistribution distribution_from_string(const std::string& s);

/// Every tunable of every experiment, flat. Unused keys are simply ignored
/// by experiments that don't sweep them, so one config can drive several
/// subcommands. All members participate in equality and serialization.
struct ExperimentConfig {
  int schema_version = 1;
  ExperimentKind experiment = ExperimentKind::order_sweep;
  Profile profile = Profile::desk;
  int trials = 200;
  std::uint64_t master_seed = 1;

  std::vector<int> orders = {1, 3, 5, 7, 9, 11};
  int fixed_order = 9;
  int memory = 7;  // 8 channel taps
  int symbol_len = 256;
  std::vector<int> pilot_symbols = {1, 2, 4, 8};
  int pilot_symbols_fixed = 2;
  int data_symbols = 8;
  PilotDistribution pilot_distribution = PilotDistribution::gaussian;
  int ensemble_size = 200;
  std::size_t multitone_tones = 0;  // 0 = pick from pilot length
  std::vector<int> antennas = {1, 2, 4};
  std::vector<double> irr_list_db = {20, 30, 40, 50, 60};
  int instances = 1000;  // bound-check sample count

  LinkBudget budget;
  RappParams pa;
  double isolation_db = 10.0;
  double asic_db = 60.0;
  double delay_spread_taps = 3.0;
  int truth_order = 13;
  // Probe block length for the truth-model polynomial fit. The estimation
  // noise on a fitted coefficient falls as 1/sqrt(samples); the default keeps
  // it well below the smallest tail coefficient at truth_order 13.
  std::size_t pa_fit_samples = std::size_t{1} << 20;

  int pilot_len() const { return pilot_symbols_fixed * symbol_len; }
  int data_len() const { return data_symbols * symbol_len; }

  /// Throws ConfigError on out-of-range or inconsistent values.
  void validate() const;

  /// Canonical key=value text; parsing it back yields an equal config.
  std::string serialize() const;

  /// FNV-1a hash of the canonical text, recorded in run manifests.
  std::uint64_t hash() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Profile presets, with per-experiment default tweaks applied.
ExperimentConfig default_config(ExperimentKind kind, Profile profile);

/// Parse a flat key=value file ('#' starts a comment). Throws ConfigError
/// on malformed lines or duplicate keys.
std::map<std::string, std::string> read_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

/// Assemble a config: profile preset first (CLI flag wins over the file's
/// profile key, which wins over desk), then every file key on top. A file,
/// when given, must carry schema_version = 1. The CLI subcommand, when
/// given, overrides the file's experiment key. Throws ConfigError on
/// unknown keys or bad values.
ExperimentConfig build_config(std::optional<ExperimentKind> cli_kind,
                              std::optional<Profile> cli_profile,
                              const std::map<std::string, std::string>& kv);

}  // namespace dsic
