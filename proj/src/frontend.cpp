#include "dsic/frontend.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dsic/basis.hpp"
#include "dsic/canceller.hpp"
#include "dsic/signals.hpp"

namespace dsic {

void RappParams::validate() const {
  if (!(smooth > 0.0) || !(phase_smooth > 0.0))
    throw std::invalid_argument("RappParams: smoothness exponents must be > 0");
  if (!(phase_sat > 0.0))
    throw std::invalid_argument("RappParams: phase_sat must be > 0");
  if (!std::isfinite(linear_gain_db) || !std::isfinite(sat_power_dbm))
    throw std::invalid_argument("RappParams: gain and saturation must be finite");
}

cplx rapp_apply(cplx x, const RappParams& pa) {
  const double a = std::abs(x);
  if (a == 0.0) return cplx(0.0, 0.0);
  const double gain = std::pow(10.0, pa.linear_gain_db / 20.0);
  const double a_sat = std::sqrt(dbm_to_mw(pa.sat_power_dbm));
  const double driven = gain * a;
  const double am = driven /
      std::pow(1.0 + std::pow(driven / a_sat, 2.0 * pa.smooth), 1.0 / (2.0 * pa.smooth));
  const double theta = pa.phase_gain * std::pow(a, pa.phase_smooth) /
      (1.0 + std::pow(a / pa.phase_sat, pa.phase_smooth));
  const cplx rot(std::cos(theta), std::sin(theta));
  return (x / a) * am * rot;
}

PolyPaFit fit_polynomial_pa(const RappParams& pa, double drive_power_dbm,
                            int order, std::size_t num_samples, StreamSeed seed) {
  pa.validate();
  if (order < 1 || order % 2 == 0)
    throw std::invalid_argument("fit_polynomial_pa: order must be odd and >= 1");
  const std::size_t half = static_cast<std::size_t>(order + 1) / 2;
  if (num_samples < 4 * half)
    throw std::invalid_argument("fit_polynomial_pa: too few probe samples");

  const double drive = std::sqrt(dbm_to_mw(drive_power_dbm));

  // Same probe block as gen_gaussian_sequence(num_samples, seed), regenerated
  // chunk by chunk so that probes large enough to pin the highest-order
  // coefficients never materialize an N x (P+1)/2 regressor matrix. Pass one
  // reproduces the unit-mean-power scale, pass two streams the normal
  // equations; the fixed chunk walk keeps the accumulation order (and hence
  // the result) exactly reproducible.
  CounterRng rng(seed);
  double raw_energy = 0.0;
  for (std::size_t n = 0; n < num_samples; ++n)
    raw_energy += std::norm(rng.gaussian(n));
  const double scale = std::sqrt(static_cast<double>(num_samples) / raw_energy);

  // Accumulate in Laguerre coordinates, where the Gram matrix concentrates
  // near the identity; the PH-coordinate Gram of raw moments is far too ill
  // conditioned at high orders for normal equations.
  BasisConfig cfg;
  cfg.order = order;
  cfg.memory = 0;
  cfg.kind = BasisKind::GLP;

  const auto cols = static_cast<Eigen::Index>(half);
  constexpr std::size_t kChunk = std::size_t{1} << 16;
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(cols, cols);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(cols);
  double y_energy = 0.0;
  for (std::size_t base = 0; base < num_samples; base += kChunk) {
    const std::size_t count = std::min(kChunk, num_samples - base);
    ComplexSequence probe;
    probe.samples.resize(count);
    for (std::size_t n = 0; n < count; ++n)
      probe.samples[n] = scale * rng.gaussian(base + n);
    const MeasurementMatrix psi =
        build_measurement_matrix(probe, cfg, SourceKind::pilot);
    Eigen::VectorXcd y(static_cast<Eigen::Index>(count));
    for (std::size_t n = 0; n < count; ++n)
      y(static_cast<Eigen::Index>(n)) = rapp_apply(drive * probe[n], pa);
    gram.noalias() += psi.entries.adjoint() * psi.entries;
    rhs.noalias() += psi.entries.adjoint() * y;
    y_energy += y.squaredNorm();
  }

  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  const Eigen::VectorXd diag = ldlt.vectorD().real();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 0.0))
    throw RankDeficientError("fit_polynomial_pa: singular fit",
                             std::numeric_limits<double>::infinity());
  const Eigen::VectorXcd w_glp = ldlt.solve(rhs);
  // Laguerre rows are PH rows times T, so PH weights are T times Laguerre's.
  const Eigen::VectorXcd w_ph = glp_transform(cfg) * w_glp;

  PolyPaFit fit;
  fit.order = order;
  fit.drive_power_dbm = drive_power_dbm;
  fit.coeffs.assign(w_ph.data(), w_ph.data() + w_ph.size());
  // At the optimum ||y - Psi w||^2 = ||y||^2 - rhs^H w; clamp the roundoff.
  fit.residual_power = std::max(0.0, y_energy - rhs.dot(w_glp).real()) /
                       static_cast<double>(num_samples);
  return fit;
}

cplx poly_pa_apply(const PolyPaFit& fit, cplx x) {
  // Horner in |x|^2 over the odd-order coefficients.
  const double t = std::norm(x);
  cplx acc(0.0, 0.0);
  for (std::size_t k = fit.coeffs.size(); k-- > 0;)
    acc = acc * t + fit.coeffs[k];
  return acc * x;
}

double ChannelModel::energy() const {
  double acc = 0.0;
  for (const cplx& g : taps) acc += std::norm(g);
  return acc;
}

ChannelModel gen_channel(int memory, double delay_spread_taps,
                         double isolation_db, double asic_db, StreamSeed seed) {
  if (memory < 0)
    throw std::invalid_argument("gen_channel: memory must be >= 0");
  if (!(delay_spread_taps > 0.0))
    throw std::invalid_argument("gen_channel: delay spread must be > 0");
  if (isolation_db < 0.0 || asic_db < 0.0)
    throw std::invalid_argument("gen_channel: losses must be >= 0 dB");

  CounterRng rng(seed);
  const int taps = memory + 1;
  ChannelModel ch;
  ch.taps.resize(static_cast<std::size_t>(taps));
  for (int l = 0; l < taps; ++l) {
    const double profile = std::exp(-static_cast<double>(l) / delay_spread_taps);
    ch.taps[static_cast<std::size_t>(l)] =
        std::sqrt(profile) * rng.gaussian(static_cast<std::uint64_t>(l));
  }

  // Normalize the raw draw to the passive isolation level.
  const double iso = db_to_lin(-isolation_db);
  const double raw = ch.energy();
  const double pre = std::sqrt(iso / raw);
  for (cplx& g : ch.taps) g *= pre;

  // Analog cancellation removes energy preferentially from the first taps
  // (the strong direct reflections it can track); later taps survive. If
  // the late-tap energy already exceeds the post-cancellation budget, the
  // late taps are compressed too, leaving 1% of the budget up front.
  const double target = iso * db_to_lin(-asic_db);
  const int short_span = std::min(memory, 2);
  double e_short = 0.0, e_long = 0.0;
  for (int l = 0; l < taps; ++l) {
    const double e = std::norm(ch.taps[static_cast<std::size_t>(l)]);
    (l <= short_span ? e_short : e_long) += e;
  }
  if (e_long < target) {
    const double beta = std::sqrt((target - e_long) / e_short);
    for (int l = 0; l <= short_span; ++l)
      ch.taps[static_cast<std::size_t>(l)] *= beta;
  } else {
    const double bs = std::sqrt(0.01 * target / e_short);
    const double bl = std::sqrt(0.99 * target / e_long);
    for (int l = 0; l < taps; ++l)
      ch.taps[static_cast<std::size_t>(l)] *= (l <= short_span ? bs : bl);
  }
  return ch;
}

ComplexSequence apply_channel(const ComplexSequence& block, const ChannelModel& ch) {
  if (ch.taps.empty())
    throw std::invalid_argument("apply_channel: empty channel");
  const std::size_t memory = ch.taps.size() - 1;
  if (block.size() <= memory)
    throw std::invalid_argument("apply_channel: block shorter than channel span");
  const std::size_t out_len = block.size() - memory;
  ComplexSequence out;
  out.samples.resize(out_len);
  for (std::size_t r = 0; r < out_len; ++r) {
    cplx acc(0.0, 0.0);
    for (std::size_t l = 0; l < ch.taps.size(); ++l)
      acc += ch.taps[l] * block[r + memory - l];
    out.samples[r] = acc;
  }
  out.refresh_power();
  return out;
}

void LinkBudget::validate() const {
  if (!std::isfinite(tx_power_dbm) || !std::isfinite(rx_noise_dbm))
    throw std::invalid_argument("LinkBudget: powers must be finite");
  if (std::isnan(tx_snr_db))
    throw std::invalid_argument("LinkBudget: tx_snr_db must not be NaN");
  if (adc_bits < 1)
    throw std::invalid_argument("LinkBudget: adc_bits must be >= 1");
}

double LinkBudget::tx_noise_mw() const {
  return std::isinf(tx_snr_db) ? 0.0 : dbm_to_mw(tx_power_dbm - tx_snr_db);
}

double LinkBudget::rx_noise_mw() const { return dbm_to_mw(rx_noise_dbm); }

ComplexSequence add_noise(const ComplexSequence& block, const LinkBudget& budget,
                          NoiseStage stage, StreamSeed seed) {
  budget.validate();
  const double power = stage == NoiseStage::tx ? budget.tx_noise_mw()
                                               : budget.rx_noise_mw();
  if (power == 0.0) return block;
  const double sigma = std::sqrt(power);
  CounterRng rng(seed);
  ComplexSequence out = block;
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] += sigma * rng.gaussian(n);
  out.refresh_power();
  return out;
}

ComplexSequence apply_iq_imbalance(const ComplexSequence& block, double irr_db) {
  if (std::isnan(irr_db) || irr_db < 0.0)
    throw std::invalid_argument("apply_iq_imbalance: irr_db must be >= 0");
  if (std::isinf(irr_db)) return block;
  const double ratio = db_to_lin(irr_db);
  const double g2 = std::sqrt(1.0 / (1.0 + ratio));
  const double g1 = std::sqrt(ratio / (1.0 + ratio));
  ComplexSequence out = block;
  for (cplx& v : out.samples) v = g1 * v + g2 * std::conj(v);
  out.refresh_power();
  return out;
}

double dsic_upper_bound_db(double rho_r_dbm, double rho_floor_dbm, int adc_bits,
                           double papr_db) {
  const double headroom = rho_r_dbm - rho_floor_dbm;
  const double dynamic_range = 6.02 * adc_bits + 1.76 - papr_db;
  return std::min(headroom, dynamic_range);
}

}  // namespace dsic
