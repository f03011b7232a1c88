#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dsic/basis.hpp"
#include "dsic/types.hpp"

namespace dsic {

/// Weights paired with the basis they live in.
struct WeightVector {
  Eigen::VectorXcd weights;
  BasisConfig basis;
};

/// Result of a pilot least-squares fit.
struct LsSolution {
  WeightVector weights;
  double residual_norm = 0.0;   // ||rhs - Phi w||
  double cond_estimate = 0.0;   // from the pivoted R diagonal
};

/// Condition-number ceiling above which a pilot system is treated as rank
/// deficient rather than silently solved.
constexpr double kCondLimit = 1e12;

/// Reusable factorization of one measurement matrix, for solving against
/// several right-hand sides (repeated noise realizations, truncation
/// vectors) without refactorizing.
class LsSolver {
public:
  explicit LsSolver(const MeasurementMatrix& m);

  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
  double cond_estimate() const { return cond_; }
  const BasisConfig& basis() const { return basis_; }
  Eigen::Index rows() const { return qr_.rows(); }
  Eigen::Index cols() const { return qr_.cols(); }

private:
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr_;
  BasisConfig basis_;
  double cond_ = 0.0;
};

/// One-shot pilot fit: orthogonal factorization, rank check, solve.
/// Throws RankDeficientError when the condition estimate exceeds kCondLimit,
/// std::invalid_argument on shape mismatch or underdetermined systems.
LsSolution ls_estimate(const MeasurementMatrix& pilot, const Eigen::VectorXcd& rx);
LsSolution ls_estimate(const MeasurementMatrix& pilot, const ComplexSequence& rx);

/// Subtract the modeled interference from the received data block.
ComplexSequence cancel(const MeasurementMatrix& data, const WeightVector& w,
                       const ComplexSequence& rx_data);

/// Horizontal concatenation of per-antenna regressor matrices, sharing one
/// BasisConfig. All blocks must have equal length.
MeasurementMatrix build_mimo_system(const std::vector<ComplexSequence>& blocks,
                                    const BasisConfig& per_antenna_cfg,
                                    SourceKind source);

/// Everything the error decomposition needs to know about the true system
/// of one trial: the model-order regressor matrices, the part of the clean
/// received signal the model cannot represent (on both blocks), and the
/// equivalent white-noise power at the receiver.
struct TruthBundle {
  Eigen::MatrixXcd psi_pilot;
  Eigen::MatrixXcd psi_data;
  Eigen::VectorXcd trunc_pilot;   // clean rx minus best in-model part, pilot
  Eigen::VectorXcd trunc_data;    // same on the data block
  double noise_power_mw = 0.0;    // equivalent receiver-referred white noise
  double rx_power_mw = 0.0;       // mean |r_d|^2 before cancellation
  std::uint64_t run_id = 0;
};

/// Weights and residual actually produced in the same trial.
struct CancelResult {
  WeightVector weights;
  ComplexSequence residual;
  std::uint64_t run_id = 0;
};

/// Per-trial error report. Power fields are per-sample averages in dBm.
/// analytic_expected_dbm is the closed-form expectation of the residual
/// power given the truth bundle; bound_dbm is the looser four-term bound
/// (twice truncation + twice basis-induced + noise-induced + floor), which
/// always dominates it.
struct RsiReport {
  double rsi_dbm = 0.0;               // measured residual power
  double truncation_dbm = 0.0;        // ||trunc_data||^2 / L
  double bire_dbm = 0.0;              // basis-induced term, measured
  double nire_dbm = 0.0;              // noise-induced term, expectation
  double noise_dbm = 0.0;             // equivalent noise floor
  double analytic_expected_dbm = 0.0;
  double bound_dbm = 0.0;
  double cancellation_db = 0.0;       // rx power over residual power

  static const char* csv_header();
  std::string csv_row() const;
};

/// Decompose one trial's residual. Throws std::invalid_argument when the
/// bundle and outcome carry different run ids or mismatched shapes.
RsiReport decompose_rsi(const TruthBundle& truth, const CancelResult& outcome);

}  // namespace dsic
