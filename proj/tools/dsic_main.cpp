// Command-line front end for the self-interference cancellation simulator.
//
// One subcommand per experiment; all take the same flags. Results land in
// --out as CSV tables plus a config snapshot and a manifest.
//
// Exit codes: 0 success, 2 configuration error, 3 invariant violation
// (bound-check found a broken inequality), 1 anything else.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsic/config.hpp"
#include "dsic/experiments.hpp"
#include "dsic/pilot_opt.hpp"
#include "dsic/signals.hpp"

namespace {

int run_select_pilot(const dsic::ExperimentConfig& cfg, const std::string& out_dir) {
  dsic::BasisConfig bc;
  bc.order = cfg.fixed_order;
  bc.memory = cfg.memory;
  bc.kind = dsic::BasisKind::GLP;

  std::vector<dsic::EnsembleRow> rows;
  const dsic::PilotCandidate best = dsic::select_pilot(
      cfg.ensemble_size, static_cast<std::size_t>(cfg.pilot_len()),
      cfg.pilot_distribution, bc,
      {cfg.master_seed, dsic::streams::ensemble, 0}, cfg.multitone_tones, &rows);

  std::filesystem::create_directories(out_dir);
  dsic::write_sequence_csv(best.sequence, out_dir + "/pilot.csv");

  std::ofstream ens(out_dir + "/ensemble.csv");
  if (!ens) throw std::runtime_error("cannot open for writing: " + out_dir + "/ensemble.csv");
  ens << dsic::EnsembleRow::csv_header() << '\n';
  for (const dsic::EnsembleRow& r : rows) ens << r.csv_row() << '\n';

  std::ofstream cfg_out(out_dir + "/config.txt");
  cfg_out << cfg.serialize();
  dsic::write_manifest(
      cfg, out_dir,
      {{"selected_index", std::to_string(best.ensemble_index)},
       {"criterion", std::to_string(best.criterion_value)},
       {"papr_db", std::to_string(best.papr_db)}});

  std::cout << "selected pilot " << best.ensemble_index << " of "
            << cfg.ensemble_size << ": criterion " << best.criterion_value
            << ", papr " << best.papr_db << " dB\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digital self-interference cancellation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string profile_name;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;

  const std::pair<const char*, dsic::ExperimentKind> kinds[] = {
      {"order-sweep", dsic::ExperimentKind::order_sweep},
      {"pilot-length", dsic::ExperimentKind::pilot_length},
      {"pilot-compare", dsic::ExperimentKind::pilot_compare},
      {"mimo", dsic::ExperimentKind::mimo},
      {"iq", dsic::ExperimentKind::iq},
      {"bound-check", dsic::ExperimentKind::bound_check},
      {"select-pilot", dsic::ExperimentKind::select_pilot},
  };
  const char* descriptions[] = {
      "residual power vs canceller order, several pilot kinds",
      "residual power vs pilot length, optimized pilots",
      "all pilot kinds at one operating point",
      "residual power vs antenna count and order",
      "IQ-imbalance study: plain vs image-aware canceller",
      "audit the closed-form bounds on random instances",
      "pick the best pilot from a candidate ensemble and dump it",
  };

  std::map<std::string, dsic::ExperimentKind> chosen_map;
  int i = 0;
  for (const auto& [name, kind] : kinds) {
    CLI::App* sub = app.add_subcommand(name, descriptions[i++]);
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--profile", profile_name, "desk or paper preset")
        ->check(CLI::IsMember({"desk", "paper"}));
    sub->add_option("--trials", trials, "trial count override");
    chosen_map[name] = kind;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string sub_name = app.get_subcommands().front()->get_name();
  const dsic::ExperimentKind kind = chosen_map.at(sub_name);

  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = dsic::read_kv_file(config_path);
    std::optional<dsic::Profile> profile;
    if (!profile_name.empty()) profile = dsic::profile_from_string(profile_name);

    dsic::ExperimentConfig cfg = dsic::build_config(kind, profile, kv);
    if (seed) cfg.master_seed = *seed;
    if (trials) cfg.trials = *trials;
    cfg.validate();

    if (kind == dsic::ExperimentKind::select_pilot)
      return run_select_pilot(cfg, out_dir);

    const dsic::ExperimentResult result = dsic::run_experiment(cfg);
    dsic::write_outputs(result, out_dir);

    std::cout << dsic::to_string(cfg.experiment) << ": " << result.rows.size()
              << " sweep rows, " << result.bound_rows.size()
              << " audit rows written to " << out_dir << '\n';
    if (!result.bound_rows.empty()) {
      std::cout << "bound violations: " << result.bound_violations << '\n';
      if (result.bound_violations > 0) {
        std::cerr << "invariant violation: " << result.bound_violations
                  << " inequality failures in " << out_dir << "/bound_check.csv\n";
        return 3;
      }
    }
    return 0;
  } catch (const dsic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
