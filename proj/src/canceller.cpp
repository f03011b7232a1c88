#include "dsic/canceller.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dsic {

namespace {

// Condition estimate from the pivoted-QR R diagonal: with column pivoting
// the diagonal magnitudes are non-increasing, so their extreme ratio tracks
// the 2-norm condition number well enough for a deficiency gate.
double diag_cond(const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>& qr) {
  const Eigen::Index k = std::min(qr.rows(), qr.cols());
  if (k == 0) return std::numeric_limits<double>::infinity();
  const auto& r = qr.matrixR();
  const double hi = std::abs(r(0, 0));
  const double lo = std::abs(r(k - 1, k - 1));
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

LsSolver::LsSolver(const MeasurementMatrix& m) : basis_(m.basis) {
  if (m.rows() < m.cols())
    throw std::invalid_argument("LsSolver: underdetermined system (rows < cols)");
  qr_.compute(m.entries);
  cond_ = diag_cond(qr_);
  if (!(cond_ < kCondLimit)) {
    std::ostringstream msg;
    msg << "pilot system numerically rank deficient (cond ~ " << cond_ << ")";
    throw RankDeficientError(msg.str(), cond_);
  }
}

Eigen::VectorXcd LsSolver::solve(const Eigen::VectorXcd& rhs) const {
  if (rhs.size() != qr_.rows())
    throw std::invalid_argument("LsSolver: rhs length != matrix rows");
  return qr_.solve(rhs);
}

LsSolution ls_estimate(const MeasurementMatrix& pilot, const Eigen::VectorXcd& rx) {
  LsSolver solver(pilot);
  LsSolution sol;
  sol.weights.weights = solver.solve(rx);
  sol.weights.basis = pilot.basis;
  sol.residual_norm = (rx - pilot.entries * sol.weights.weights).norm();
  sol.cond_estimate = solver.cond_estimate();
  return sol;
}

LsSolution ls_estimate(const MeasurementMatrix& pilot, const ComplexSequence& rx) {
  Eigen::Map<const Eigen::VectorXcd> v(rx.samples.data(),
                                       static_cast<Eigen::Index>(rx.size()));
  return ls_estimate(pilot, Eigen::VectorXcd(v));
}

ComplexSequence cancel(const MeasurementMatrix& data, const WeightVector& w,
                       const ComplexSequence& rx_data) {
  if (!(data.basis == w.basis))
    throw std::invalid_argument("cancel: weight basis does not match matrix basis");
  if (data.cols() != w.weights.size())
    throw std::invalid_argument("cancel: weight length != matrix columns");
  if (data.rows() != static_cast<Eigen::Index>(rx_data.size()))
    throw std::invalid_argument("cancel: rx length != matrix rows");
  const Eigen::VectorXcd model = data.entries * w.weights;
  ComplexSequence out = rx_data;
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] -= model(static_cast<Eigen::Index>(n));
  out.refresh_power();
  return out;
}

MeasurementMatrix build_mimo_system(const std::vector<ComplexSequence>& blocks,
                                    const BasisConfig& per_antenna_cfg,
                                    SourceKind source) {
  if (blocks.empty())
    throw std::invalid_argument("build_mimo_system: no antenna blocks");
  BasisConfig one = per_antenna_cfg;
  one.antennas = 1;
  one.validate();
  const std::size_t len = blocks.front().size();
  for (const ComplexSequence& b : blocks)
    if (b.size() != len)
      throw std::invalid_argument("build_mimo_system: blocks must have equal length");

  const int m = static_cast<int>(blocks.size());
  const Eigen::Index per = one.weight_count();
  const Eigen::Index rows = static_cast<Eigen::Index>(len) - one.memory;
  if (rows < 1)
    throw std::invalid_argument("build_mimo_system: blocks shorter than memory span");

  Eigen::MatrixXcd entries(rows, per * m);
  for (int a = 0; a < m; ++a) {
    const MeasurementMatrix part =
        build_measurement_matrix(blocks[static_cast<std::size_t>(a)], one, source);
    entries.middleCols(static_cast<Eigen::Index>(a) * per, per) = part.entries;
  }
  BasisConfig joint = one;
  joint.antennas = m;
  return MeasurementMatrix{std::move(entries), joint, source};
}

const char* RsiReport::csv_header() {
  return "rsi_dbm,truncation_dbm,bire_dbm,nire_dbm,noise_dbm,"
         "analytic_expected_dbm,bound_dbm,cancellation_db";
}

std::string RsiReport::csv_row() const {
  std::ostringstream ss;
  ss.precision(10);
  ss << rsi_dbm << ',' << truncation_dbm << ',' << bire_dbm << ',' << nire_dbm
     << ',' << noise_dbm << ',' << analytic_expected_dbm << ',' << bound_dbm
     << ',' << cancellation_db;
  return ss.str();
}

RsiReport decompose_rsi(const TruthBundle& truth, const CancelResult& outcome) {
  if (truth.run_id != outcome.run_id)
    throw std::invalid_argument("decompose_rsi: truth bundle and outcome are from different runs");
  const Eigen::Index ld = truth.psi_data.rows();
  const Eigen::Index lp = truth.psi_pilot.rows();
  if (truth.psi_pilot.cols() != truth.psi_data.cols() ||
      truth.psi_pilot.cols() != outcome.weights.weights.size() ||
      truth.trunc_pilot.size() != lp || truth.trunc_data.size() != ld ||
      static_cast<Eigen::Index>(outcome.residual.size()) != ld)
    throw std::invalid_argument("decompose_rsi: mismatched shapes in truth bundle");

  const double dl = static_cast<double>(ld);

  // Pilot-projected truncation error: what the estimator mistakes for model
  // weights because the pilot block itself carries unmodelable content.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(truth.psi_pilot);
  const Eigen::VectorXcd leak = qr.solve(truth.trunc_pilot);
  const Eigen::VectorXcd bire_vec = truth.psi_data * leak;

  const Eigen::MatrixXcd gram_p = truth.psi_pilot.adjoint() * truth.psi_pilot;
  const Eigen::MatrixXcd gram_d = truth.psi_data.adjoint() * truth.psi_data;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram_p);
  if (ldlt.info() != Eigen::Success)
    throw RankDeficientError("decompose_rsi: pilot Gram matrix not positive definite",
                             std::numeric_limits<double>::infinity());
  const double tr_ratio = ldlt.solve(gram_d).trace().real();

  const double trunc_mw = truth.trunc_data.squaredNorm() / dl;
  const double bire_mw = bire_vec.squaredNorm() / dl;
  const double nire_mw = truth.noise_power_mw * tr_ratio / dl;
  const double noise_mw = truth.noise_power_mw;
  const double analytic_mw =
      (truth.trunc_data - bire_vec).squaredNorm() / dl + nire_mw + noise_mw;
  const double bound_mw = 2.0 * trunc_mw + 2.0 * bire_mw + nire_mw + noise_mw;
  const double rsi_mw = outcome.residual.mean_power();

  RsiReport rep;
  rep.rsi_dbm = mw_to_dbm(rsi_mw);
  rep.truncation_dbm = mw_to_dbm(trunc_mw);
  rep.bire_dbm = mw_to_dbm(bire_mw);
  rep.nire_dbm = mw_to_dbm(nire_mw);
  rep.noise_dbm = mw_to_dbm(noise_mw);
  rep.analytic_expected_dbm = mw_to_dbm(analytic_mw);
  rep.bound_dbm = mw_to_dbm(bound_mw);
  rep.cancellation_db = mw_to_dbm(truth.rx_power_mw) - rep.rsi_dbm;
  return rep;
}

}  // namespace dsic
