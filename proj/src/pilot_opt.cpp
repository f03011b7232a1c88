#include "dsic/pilot_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dsic/signals.hpp"

namespace dsic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GramSpectrum spectrum_from_eigs(Eigen::VectorXd evals, double trace) {
  // Solver returns ascending order; store descending.
  std::reverse(evals.data(), evals.data() + evals.size());

  const double lmax = evals(0);
  if (!(lmax >= 0.0))
    throw std::invalid_argument("gram_spectrum: matrix is not positive semidefinite");
  const double floor = -1e-10 * lmax;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) < floor)
      throw std::invalid_argument("gram_spectrum: markedly negative eigenvalue");
    if (evals(i) < 0.0) evals(i) = 0.0;
  }

  GramSpectrum s;
  s.lambda_max = lmax;
  s.lambda_min = evals(evals.size() - 1);
  s.trace = trace;
  s.cond2 = s.lambda_min > 0.0 ? s.lambda_max / s.lambda_min : kInf;
  s.trace_inverse = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) > 0.0)
      s.trace_inverse += 1.0 / evals(i);
    else
      s.trace_inverse = kInf;
  }
  s.shannon_rank = shannon_rank(evals);
  s.eigenvalues = std::move(evals);
  return s;
}

}  // namespace

GramSpectrum gram_spectrum(const Eigen::MatrixXcd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0)
    throw std::invalid_argument("gram_spectrum: need a nonempty square matrix");
  if (!gram.allFinite())
    throw std::invalid_argument("gram_spectrum: non-finite entries");
  if ((gram - gram.adjoint()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, gram.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("gram_spectrum: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gram_spectrum: eigensolver failed");
  return spectrum_from_eigs(es.eigenvalues(), gram.trace().real());
}

GramSpectrum gram_spectrum(const MeasurementMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw std::invalid_argument("gram_spectrum: empty measurement matrix");
  return gram_spectrum(Eigen::MatrixXcd(m.entries.adjoint() * m.entries));
}

double shannon_rank(const Eigen::VectorXd& eigenvalues) {
  if (eigenvalues.size() == 0)
    throw std::invalid_argument("shannon_rank: empty spectrum");
  double total = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues(i) >= 0.0))
      throw std::invalid_argument("shannon_rank: eigenvalues must be >= 0");
    total += eigenvalues(i);
  }
  if (total <= 0.0)
    throw std::invalid_argument("shannon_rank: zero spectrum");
  double h = 0.0;  // entropy in bits, 0 log 0 = 0
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double p = eigenvalues(i) / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return std::exp2(h);
}

double pilot_criterion(const GramSpectrum& s) {
  return s.shannon_rank * s.lambda_min;
}

const char* EnsembleRow::csv_header() {
  return "index,criterion,rank_s,lambda_min,cond2,papr_db";
}

std::string EnsembleRow::csv_row() const {
  std::ostringstream ss;
  ss.precision(10);
  ss << index << ',' << criterion << ',' << rank_s << ',' << lambda_min << ','
     << cond2 << ',' << papr_db;
  return ss.str();
}

namespace {

ComplexSequence draw_candidate(PilotDistribution dist, std::size_t length,
                               StreamSeed seed, int index, std::size_t tones) {
  const StreamSeed s = seed.with_trial(static_cast<std::uint64_t>(index));
  switch (dist) {
    case PilotDistribution::gaussian:
      return gen_gaussian_sequence(length, s);
    case PilotDistribution::chisq:
      return gen_chisq_amplitude_sequence(length, s);
    case PilotDistribution::multitone:
      return gen_multitone_pilot(length, tones ? tones : default_tone_count(length), s);
  }
  throw std::invalid_argument("draw_candidate: unknown distribution");
}

struct Scored {
  ComplexSequence seq;
  GramSpectrum spec;
  double criterion = -kInf;
  double papr_db = 0.0;
};

Scored score_candidate(PilotDistribution dist, std::size_t length, StreamSeed seed,
                       int index, std::size_t tones, const BasisConfig& cfg) {
  Scored sc;
  sc.seq = draw_candidate(dist, length, seed, index, tones);
  const MeasurementMatrix m = build_measurement_matrix_serial(sc.seq, cfg, SourceKind::pilot);
  sc.spec = gram_spectrum(m);
  sc.criterion = pilot_criterion(sc.spec);
  sc.papr_db = stats(sc.seq).papr_db;
  return sc;
}

// Strict ordering: higher criterion wins, then lower PAPR, then lower index.
bool better(const Scored& a, int ia, const Scored& b, int ib) {
  if (a.criterion != b.criterion) return a.criterion > b.criterion;
  if (a.papr_db != b.papr_db) return a.papr_db < b.papr_db;
  return ia < ib;
}

PilotCandidate pick(std::vector<Scored>& scored, std::vector<EnsembleRow>* rows) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scored.size()); ++i)
    if (better(scored[static_cast<std::size_t>(i)], i,
               scored[static_cast<std::size_t>(best)], best))
      best = i;
  if (rows) {
    for (int i = 0; i < static_cast<int>(scored.size()); ++i) {
      const Scored& sc = scored[static_cast<std::size_t>(i)];
      rows->push_back(EnsembleRow{i, sc.criterion, sc.spec.shannon_rank,
                                  sc.spec.lambda_min, sc.spec.cond2, sc.papr_db});
    }
  }
  Scored& win = scored[static_cast<std::size_t>(best)];
  PilotCandidate out;
  out.sequence = std::move(win.seq);
  out.spectrum = std::move(win.spec);
  out.criterion_value = win.criterion;
  out.papr_db = win.papr_db;
  out.ensemble_index = best;
  return out;
}

void check_ensemble_args(int ensemble_size, const BasisConfig& cfg,
                         std::size_t length) {
  if (ensemble_size < 1)
    throw std::invalid_argument("select_pilot: ensemble_size must be >= 1");
  cfg.validate();
  if (length < static_cast<std::size_t>(cfg.weight_count() + cfg.memory))
    throw std::invalid_argument("select_pilot: pilot too short for the model order");
}

}  // namespace

PilotCandidate select_pilot(int ensemble_size, std::size_t length,
                            PilotDistribution dist, const BasisConfig& cfg,
                            StreamSeed seed, std::size_t multitone_tones,
                            std::vector<EnsembleRow>* rows) {
  check_ensemble_args(ensemble_size, cfg, length);
  std::vector<Scored> scored(static_cast<std::size_t>(ensemble_size));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < ensemble_size; ++i)
    scored[static_cast<std::size_t>(i)] =
        score_candidate(dist, length, seed, i, multitone_tones, cfg);
  return pick(scored, rows);
}

PilotCandidate select_pilot_serial(int ensemble_size, std::size_t length,
                                   PilotDistribution dist, const BasisConfig& cfg,
                                   StreamSeed seed, std::size_t multitone_tones,
                                   std::vector<EnsembleRow>* rows) {
  check_ensemble_args(ensemble_size, cfg, length);
  std::vector<Scored> scored(static_cast<std::size_t>(ensemble_size));
  for (int i = 0; i < ensemble_size; ++i)
    scored[static_cast<std::size_t>(i)] =
        score_candidate(dist, length, seed, i, multitone_tones, cfg);
  return pick(scored, rows);
}

double bire_bound(const GramSpectrum& pilot, const GramSpectrum& data,
                  double trunc_pilot_sq_norm) {
  if (trunc_pilot_sq_norm < 0.0)
    throw std::invalid_argument("bire_bound: negative squared norm");
  if (pilot.lambda_min <= 0.0) return kInf;
  return data.lambda_max * pilot.cond2 / pilot.lambda_min * trunc_pilot_sq_norm;
}

std::pair<double, double> nire_bounds(const GramSpectrum& pilot,
                                      const GramSpectrum& data) {
  const double lo = pilot.lambda_max > 0.0 ? data.trace / pilot.lambda_max : kInf;
  const double hi = pilot.lambda_min > 0.0 ? data.trace / pilot.lambda_min : kInf;
  return {lo, hi};
}

}  // namespace dsic
