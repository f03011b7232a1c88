#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dsic/basis.hpp"
#include "dsic/rng.hpp"
#include "dsic/types.hpp"

namespace dsic {

/// Eigenstructure of a pilot (or data) Gram matrix, plus the derived
/// scalars every bound and the selection criterion consume. Eigenvalues are
/// stored in descending order; tiny negative values from roundoff are
/// clamped to zero, anything markedly negative is rejected.
struct GramSpectrum {
  Eigen::VectorXd eigenvalues;
  double trace = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double cond2 = 0.0;          // inf when singular
  double shannon_rank = 0.0;
  double trace_inverse = 0.0;  // inf when singular
};

/// Spectrum of the Gram matrix A^H A of a regressor matrix.
GramSpectrum gram_spectrum(const MeasurementMatrix& m);

/// Spectrum of an explicitly given Hermitian positive-semidefinite matrix.
GramSpectrum gram_spectrum(const Eigen::MatrixXcd& gram);

/// Effective rank 2^H(lambda / sum lambda), entropy in bits, 0 log 0 = 0.
/// Ranges over [1, dim]; equals dim iff the spectrum is flat and 1 iff a
/// single eigenvalue carries all the energy.
double shannon_rank(const Eigen::VectorXd& eigenvalues);

/// Selection figure of merit: shannon_rank * lambda_min. Zero for singular
/// spectra, invariant under unitary conjugation, and maximal for spectra
/// that are simultaneously flat and strong.
double pilot_criterion(const GramSpectrum& s);

enum class PilotDistribution { gaussian, chisq, multitone };

/// One scored candidate from an ensemble draw.
struct EnsembleRow {
  int index = 0;
  double criterion = 0.0;
  double rank_s = 0.0;
  double lambda_min = 0.0;
  double cond2 = 0.0;
  double papr_db = 0.0;

  static const char* csv_header();
  std::string csv_row() const;
};

/// The winning pilot with its score and diagnostics.
struct PilotCandidate {
  ComplexSequence sequence;
  GramSpectrum spectrum;
  double criterion_value = 0.0;
  double papr_db = 0.0;
  int ensemble_index = 0;
};

/// Draw ensemble_size candidate pilots from the given distribution, score
/// each by pilot_criterion of its model-order Gram matrix, and return the
/// best. Ties resolve to the lower PAPR, then the lower ensemble index, so
/// the choice is deterministic for a fixed seed regardless of thread count.
/// Candidate i is drawn from stream trial index i of the seed. If rows is
/// non-null, every candidate's score row is appended to it in index order.
/// OpenMP-parallel across candidates.
PilotCandidate select_pilot(int ensemble_size, std::size_t length,
                            PilotDistribution dist, const BasisConfig& cfg,
                            StreamSeed seed, std::size_t multitone_tones = 0,
                            std::vector<EnsembleRow>* rows = nullptr);

/// Serial reference for the parallel ensemble scan.
PilotCandidate select_pilot_serial(int ensemble_size, std::size_t length,
                                   PilotDistribution dist, const BasisConfig& cfg,
                                   StreamSeed seed, std::size_t multitone_tones = 0,
                                   std::vector<EnsembleRow>* rows = nullptr);

/// Worst-case power of the basis-induced term given only spectra:
/// lambda_max(G_d) * cond2(G_p) / lambda_min(G_p) * ||trunc_pilot||^2.
double bire_bound(const GramSpectrum& pilot, const GramSpectrum& data,
                  double trunc_pilot_sq_norm);

/// Decoupled bracket for tr(inv(G_p) G_d):
/// [tr(G_d)/lambda_max(G_p), tr(G_d)/lambda_min(G_p)].
std::pair<double, double> nire_bounds(const GramSpectrum& pilot,
                                      const GramSpectrum& data);

}  // namespace dsic
