#pragma once

#include <string>
#include <vector>

#include "dsic/canceller.hpp"
#include "dsic/config.hpp"

namespace dsic {

/// How the pilot block of a trial is produced.
///  - multitone:          deterministic low-PAPR tone comb
///  - random_gaussian:    fresh Gaussian pilot every trial
///  - optimized_gaussian: best-of-ensemble Gaussian, chosen once per point
///  - optimized_chisq:    best-of-ensemble heavy-tailed pilot
///  - global_ls:          estimation on the data block itself (lower bound)
enum class PilotKind {
  multitone,
  random_gaussian,
  optimized_gaussian,
  optimized_chisq,
  global_ls,
};

std::string to_string(PilotKind k);
std::string to_string(BasisKind k);

/// Aggregates over the trials of one sweep point. Medians are taken across
/// trials; failed trials (rank-deficient pilot systems, counted in
/// failed_trials) contribute their uncancelled rx power to the rsi columns
/// and NaN to the decomposition columns.
struct SweepRow {
  int order = 0;
  int pilot_len = 0;
  int antennas = 1;
  double irr_db = 0.0;  // inf when IQ imbalance is off
  PilotKind pilot_kind = PilotKind::optimized_gaussian;
  BasisKind canceller = BasisKind::GLP;
  int trials = 0;
  int failed_trials = 0;
  double criterion_median = 0.0;
  double rsi_dbm_median = 0.0;
  double rsi_dbm_iqr = 0.0;
  double rsi_minus_noise_db_median = 0.0;
  double truncation_dbm_median = 0.0;
  double bire_dbm_median = 0.0;
  double nire_dbm_median = 0.0;
  double noise_dbm = 0.0;
  double analytic_dbm_median = 0.0;
  double bound_dbm_median = 0.0;
  double cancellation_db_median = 0.0;
};

/// One trial of one sweep point, for the per-trial dump.
struct TrialRecord {
  int order = 0;
  int pilot_len = 0;
  int antennas = 1;
  double irr_db = 0.0;
  PilotKind pilot_kind = PilotKind::optimized_gaussian;
  BasisKind canceller = BasisKind::GLP;
  int trial = 0;
  bool failed = false;
  double criterion = 0.0;
  RsiReport report;
};

/// One random instance of the bound audit. violations counts how many of
/// the checked inequalities failed for this instance (0 in a healthy run).
struct BoundRow {
  int instance = 0;
  int order_model = 0;
  int order_truth = 0;
  int memory = 0;
  int pilot_len = 0;
  double analytic_mw = 0.0;
  double bound_mw = 0.0;
  double bire_mw = 0.0;
  double bire_bound_mw = 0.0;
  double nire_tr = 0.0;
  double nire_lo = 0.0;
  double nire_hi = 0.0;
  double tr_inv = 0.0;
  double tr_inv_lo = 0.0;
  double tr_inv_hi = 0.0;
  double tr_inv_cap = 0.0;
  double theorem1_rel_err = 0.0;
  int violations = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> trial_records;
  std::vector<BoundRow> bound_rows;
  int bound_violations = 0;
};

ExperimentResult run_order_sweep(const ExperimentConfig& cfg);
ExperimentResult run_pilot_length_sweep(const ExperimentConfig& cfg);
ExperimentResult run_pilot_compare(const ExperimentConfig& cfg);
ExperimentResult run_mimo_sweep(const ExperimentConfig& cfg);
ExperimentResult run_iq_sweep(const ExperimentConfig& cfg);
ExperimentResult run_bound_check(const ExperimentConfig& cfg);

/// Dispatch on cfg.experiment (select_pilot is handled by the CLI, not here).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Write <out>/<experiment>.csv, <out>/trials.csv, <out>/config.txt and
/// <out>/manifest.txt. Creates the directory if needed.
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

/// Manifest alone (used by the pilot-selection subcommand too).
void write_manifest(const ExperimentConfig& cfg, const std::string& out_dir,
                    const std::vector<std::pair<std::string, std::string>>& extra);

const char* artifact_version();

/// Linear-interpolated percentile, NaN entries dropped; q in [0,1].
/// Returns NaN when nothing remains.
double percentile(std::vector<double> values, double q);

}  // namespace dsic
