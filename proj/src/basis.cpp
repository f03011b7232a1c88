#include "dsic/basis.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dsic {

namespace {

void require_odd_order(int p, const char* where) {
  if (p < 1 || p % 2 == 0)
    throw std::invalid_argument(std::string(where) + ": order must be odd and >= 1");
}

// Exact small-integer binomial; the classic running-product form keeps every
// intermediate an integer.
unsigned long long binomial_ull(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned long long r = 1;
  for (int j = 1; j <= k; ++j)
    r = r * static_cast<unsigned long long>(n - k + j) / static_cast<unsigned long long>(j);
  return r;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

// Power-series coefficients of L_i^{(1)}(t): c_k = (-1)^k / k! * C(i+1, k+1).
std::vector<double> laguerre1_coeffs(int i) {
  std::vector<double> c(static_cast<std::size_t>(i) + 1);
  for (int k = 0; k <= i; ++k) {
    const double mag = static_cast<double>(binomial_ull(i + 1, k + 1)) / factorial(k);
    c[static_cast<std::size_t>(k)] = (k % 2 == 0) ? mag : -mag;
  }
  return c;
}

double horner(const std::vector<double>& c, double t) {
  double acc = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;)
    acc = acc * t + c[k];
  return acc;
}

// |x|^2 to an integer power without libm pow.
double ipow(double base, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

}  // namespace

void BasisConfig::validate() const {
  require_odd_order(order, "BasisConfig");
  if (memory < 0)
    throw std::invalid_argument("BasisConfig: memory must be >= 0");
  if (antennas < 1)
    throw std::invalid_argument("BasisConfig: antennas must be >= 1");
}

int BasisConfig::orders_per_delay() const {
  if (kind == BasisKind::PH_IQ)
    return (order + 1) * (order + 3) / 4;
  return (order + 1) / 2;
}

cplx ph_monomial(cplx x, int p) {
  require_odd_order(p, "ph_monomial");
  return ipow(std::norm(x), (p - 1) / 2) * x;
}

double laguerre_assoc1(int i, double t) {
  if (i < 0)
    throw std::invalid_argument("laguerre_assoc1: index must be >= 0");
  if (i <= 8) {
    // Closed-form Horner evaluation from the exact power-series coefficients.
    static const std::array<std::vector<double>, 9> low = [] {
      std::array<std::vector<double>, 9> a;
      for (int n = 0; n <= 8; ++n) a[static_cast<std::size_t>(n)] = laguerre1_coeffs(n);
      return a;
    }();
    return horner(low[static_cast<std::size_t>(i)], t);
  }
  // (k+1) L_{k+1} = (2k+2-t) L_k - (k+1) L_{k-1}, seeded from the Horner range.
  double lm1 = laguerre_assoc1(7, t);
  double l = laguerre_assoc1(8, t);
  for (int k = 8; k < i; ++k) {
    const double next = ((2.0 * k + 2.0 - t) * l - (k + 1.0) * lm1) / (k + 1.0);
    lm1 = l;
    l = next;
  }
  return l;
}

double ph_to_glp_coeff(int p, int q) {
  require_odd_order(p, "ph_to_glp_coeff");
  require_odd_order(q, "ph_to_glp_coeff");
  if (q > p)
    throw std::invalid_argument("ph_to_glp_coeff: need q <= p");
  const int m = (q - 1) / 2;
  const int half = (p + 1) / 2;
  const double mag = static_cast<double>(binomial_ull(half, m + 1)) / factorial(m);
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return std::sqrt(2.0 / (p + 1.0)) * sign * mag;
}

cplx glp_basis(cplx x, int p) {
  require_odd_order(p, "glp_basis");
  const int i = (p - 1) / 2;
  return std::sqrt(2.0 / (p + 1.0)) * laguerre_assoc1(i, std::norm(x)) * x;
}

cplx glp_basis_via_coeffs(cplx x, int p) {
  require_odd_order(p, "glp_basis_via_coeffs");
  const double t = std::norm(x);
  // Horner over the odd-order monomial expansion, highest power first.
  double acc = 0.0;
  for (int q = p; q >= 1; q -= 2)
    acc = acc * t + ph_to_glp_coeff(p, q);
  return acc * x;
}

Eigen::MatrixXcd glp_transform(const BasisConfig& cfg) {
  cfg.validate();
  if (cfg.kind == BasisKind::PH_IQ)
    throw std::invalid_argument("glp_transform: no square change of basis for PH_IQ");
  const int m = (cfg.order + 1) / 2;
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    const int pj = 2 * j + 1;
    for (int i = 0; i <= j; ++i) {
      const int pi = 2 * i + 1;
      block(i, j) = ph_to_glp_coeff(pj, pi);
    }
  }
  const int taps = cfg.memory + 1;
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(m * taps, m * taps);
  for (int l = 0; l < taps; ++l)
    t.block(l * m, l * m, m, m) = block;
  return t;
}

namespace {

// Fill one output row of the regressor matrix. Row r uses input samples
// block[r + memory - l] for delay taps l = 0..memory.
void fill_row(Eigen::MatrixXcd& mat, const std::vector<cplx>& x,
              const BasisConfig& cfg, Eigen::Index r) {
  const int opd = cfg.orders_per_delay();
  const std::size_t n = static_cast<std::size_t>(r) + static_cast<std::size_t>(cfg.memory);
  for (int l = 0; l <= cfg.memory; ++l) {
    const cplx v = x[n - static_cast<std::size_t>(l)];
    Eigen::Index col = static_cast<Eigen::Index>(l) * opd;
    switch (cfg.kind) {
      case BasisKind::PH:
        for (int p = 1; p <= cfg.order; p += 2)
          mat(r, col++) = ph_monomial(v, p);
        break;
      case BasisKind::GLP:
        for (int p = 1; p <= cfg.order; p += 2)
          mat(r, col++) = glp_basis(v, p);
        break;
      case BasisKind::PH_IQ: {
        // x^q conj(x)^{p-q} for each odd p and q = 0..p; powers built
        // incrementally to keep every entry a product of exact repeats.
        std::vector<cplx> pow_x(static_cast<std::size_t>(cfg.order) + 1);
        std::vector<cplx> pow_c(static_cast<std::size_t>(cfg.order) + 1);
        pow_x[0] = pow_c[0] = cplx(1.0, 0.0);
        const cplx vc = std::conj(v);
        for (int k = 1; k <= cfg.order; ++k) {
          pow_x[static_cast<std::size_t>(k)] = pow_x[static_cast<std::size_t>(k - 1)] * v;
          pow_c[static_cast<std::size_t>(k)] = pow_c[static_cast<std::size_t>(k - 1)] * vc;
        }
        for (int p = 1; p <= cfg.order; p += 2)
          for (int q = 0; q <= p; ++q)
            mat(r, col++) = pow_x[static_cast<std::size_t>(q)] *
                            pow_c[static_cast<std::size_t>(p - q)];
        break;
      }
    }
  }
}

Eigen::MatrixXcd alloc_checked(const ComplexSequence& block, const BasisConfig& cfg) {
  cfg.validate();
  if (cfg.antennas != 1)
    throw std::invalid_argument(
        "build_measurement_matrix: builds one antenna at a time (see build_mimo_system)");
  const std::size_t need = static_cast<std::size_t>(cfg.memory) + 1;
  if (block.size() < need)
    throw std::invalid_argument("build_measurement_matrix: block shorter than memory span");
  const Eigen::Index rows = static_cast<Eigen::Index>(block.size() - need + 1);
  return Eigen::MatrixXcd(rows, cfg.weight_count());
}

}  // namespace

MeasurementMatrix build_measurement_matrix(const ComplexSequence& block,
                                           const BasisConfig& cfg,
                                           SourceKind source) {
  Eigen::MatrixXcd mat = alloc_checked(block, cfg);
  const Eigen::Index rows = mat.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < rows; ++r)
    fill_row(mat, block.samples, cfg, r);
  return MeasurementMatrix{std::move(mat), cfg, source};
}

MeasurementMatrix build_measurement_matrix_serial(const ComplexSequence& block,
                                                  const BasisConfig& cfg,
                                                  SourceKind source) {
  Eigen::MatrixXcd mat = alloc_checked(block, cfg);
  for (Eigen::Index r = 0; r < mat.rows(); ++r)
    fill_row(mat, block.samples, cfg, r);
  return MeasurementMatrix{std::move(mat), cfg, source};
}

}  // namespace dsic
