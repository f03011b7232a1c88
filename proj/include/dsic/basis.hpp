#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "dsic/types.hpp"

namespace dsic {

/// Which nonlinear basis spans the canceller model.
///  - PH:    odd-order memory-polynomial regressors |x|^{p-1} x
///  - GLP:   Laguerre-based regressors, orthonormal for CN(0,1) input
///  - PH_IQ: full odd-degree bivariate monomials x^q conj(x)^{p-q},
///           which absorb IQ-imbalance images
enum class BasisKind { PH, GLP, PH_IQ };

/// Whether a measurement matrix was built from the pilot or the data block.
enum class SourceKind { pilot, data };

/// Model order, memory depth and basis family for one canceller.
struct BasisConfig {
  int order = 1;       // max odd order P
  int memory = 0;      // FIR taps per order = memory + 1
  BasisKind kind = BasisKind::PH;
  int antennas = 1;

  void validate() const;

  /// Regressor count per delay tap: (P+1)/2 for PH/GLP,
  /// (P+1)(P+3)/4 for PH_IQ (orders p=1,3..P each contribute p+1 monomials).
  int orders_per_delay() const;

  /// Columns of a single-antenna measurement matrix.
  int weights_per_antenna() const { return orders_per_delay() * (memory + 1); }

  /// Total columns including antenna concatenation.
  int weight_count() const { return weights_per_antenna() * antennas; }

  bool operator==(const BasisConfig&) const = default;
};

/// Odd-order memory-polynomial regressor |x|^{p-1} x.
cplx ph_monomial(cplx x, int p);

/// Generalized Laguerre polynomial L_i^{(1)}(t). Explicit Horner form for
/// i <= 8, three-term recurrence above that.
double laguerre_assoc1(int i, double t);

/// Coefficient of |x|^{q-1} x in the order-p Laguerre regressor (p, q odd,
/// q <= p). Evaluated from exact integer factorials/binomials.
double ph_to_glp_coeff(int p, int q);

/// Laguerre regressor sqrt(2/(p+1)) L_{(p-1)/2}^{(1)}(|x|^2) x.
cplx glp_basis(cplx x, int p);

/// Same regressor evaluated through its monomial expansion
/// sum_q ph_to_glp_coeff(p,q) |x|^{q-1} x. Kept public so tests can check
/// the two routes agree; prefer glp_basis() elsewhere.
cplx glp_basis_via_coeffs(cplx x, int p);

/// Invertible map T between PH and Laguerre weight coordinates for one
/// antenna: stacking regressors order-fastest / delay-slowest, the Laguerre
/// regressor row-vector equals the PH row-vector times T. Block diagonal
/// with one upper-triangular (P+1)/2 block per delay tap. Throws for PH_IQ,
/// which has no such square change of basis.
Eigen::MatrixXcd glp_transform(const BasisConfig& cfg);

/// Regressor matrix for one source block. Row r corresponds to output sample
/// r + memory of the block (the valid region where every delayed regressor
/// exists); columns run order-fastest within each delay tap, delay taps in
/// increasing order, antennas outermost.
struct MeasurementMatrix {
  Eigen::MatrixXcd entries;
  BasisConfig basis;
  SourceKind source = SourceKind::pilot;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// Build the single-antenna regressor matrix for one block. OpenMP-parallel
/// across rows; bit-identical to build_measurement_matrix_serial.
MeasurementMatrix build_measurement_matrix(const ComplexSequence& block,
                                           const BasisConfig& cfg,
                                           SourceKind source);

/// Plain scalar reference implementation, kept for testing the parallel
/// kernel against and for benchmarking.
MeasurementMatrix build_measurement_matrix_serial(const ComplexSequence& block,
                                                  const BasisConfig& cfg,
                                                  SourceKind source);

}  // namespace dsic
