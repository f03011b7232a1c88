#pragma once

#include <cstdint>
#include <vector>

#include "dsic/rng.hpp"
#include "dsic/types.hpp"

namespace dsic {

/// Solid-state PA model: smooth AM-AM saturation plus an AM-PM rotation.
/// Amplitudes are in sqrt(mW), so sat_power_dbm converts directly to the
/// clipping amplitude. phase_* drives the AM-PM curve
/// theta(a) = phase_gain * a^phase_smooth / (1 + (a/phase_sat)^phase_smooth),
/// applied as a unit-modulus rotation of the AM-AM output.
struct RappParams {
  double linear_gain_db = 30.0;
  double sat_power_dbm = 30.0;
  double smooth = 2.0;
  double phase_gain = -0.15;
  double phase_sat = 0.88;
  double phase_smooth = 2.0;

  void validate() const;

  bool operator==(const RappParams&) const = default;
};

/// Memoryless PA response for one baseband sample.
cplx rapp_apply(cplx x, const RappParams& pa);

/// Odd-order polynomial fitted to the PA response at a given drive level.
/// coeffs[k] multiplies |x|^{2k} x for a unit-average-power input x, i.e.
/// the drive scaling is folded in, so the truth model composes directly
/// with normalized transmit blocks.
struct PolyPaFit {
  std::vector<cplx> coeffs;     // orders 1,3,..,order
  int order = 1;
  double drive_power_dbm = 0.0;
  double residual_power = 0.0;  // mean squared fit error, mW
};

/// Least-squares fit of rapp_apply(drive * x) over a Gaussian probe block.
PolyPaFit fit_polynomial_pa(const RappParams& pa, double drive_power_dbm,
                            int order, std::size_t num_samples, StreamSeed seed);

/// Evaluate the fitted polynomial on a unit-power sample.
cplx poly_pa_apply(const PolyPaFit& fit, cplx x);

/// Residual self-interference channel after antenna isolation and analog
/// cancellation: FIR taps with an exponential power profile. The analog
/// stage mostly removes the strongest early reflections, so suppression is
/// taken from the first taps when the budget allows.
struct ChannelModel {
  std::vector<cplx> taps;
  double energy() const;  // sum |tap|^2, linear
};

/// Draw a residual channel. isolation_db is the passive Tx->Rx loss,
/// asic_db the analog-cancellation gain on top of it; the tap energy sums
/// to 10^-(isolation_db+asic_db)/10 exactly. delay_spread_taps sets the
/// exponential decay constant of the power profile.
ChannelModel gen_channel(int memory, double delay_spread_taps,
                         double isolation_db, double asic_db, StreamSeed seed);

/// FIR convolution restricted to the valid region: output sample r uses
/// input samples r .. r+memory, so the result aligns row-for-row with a
/// measurement matrix built from the same block. Output length is
/// input length - memory.
ComplexSequence apply_channel(const ComplexSequence& block, const ChannelModel& ch);

/// Transmit power, noise levels and ADC resolution for a run.
struct LinkBudget {
  double tx_power_dbm = 23.0;
  double tx_snr_db = 50.0;     // transmitter-side noise floor below signal
  double rx_noise_dbm = -90.0;
  int adc_bits = 12;

  void validate() const;
  double tx_noise_mw() const;  // per-sample, at the PA output scale of 1 mW
  double rx_noise_mw() const;

  bool operator==(const LinkBudget&) const = default;
};

enum class NoiseStage { tx, rx };

/// Add white circular Gaussian noise at the given stage's power. The tx
/// stage models transmitter impairments injected before the channel; rx is
/// the receiver floor. An infinite tx_snr_db yields the input unchanged.
ComplexSequence add_noise(const ComplexSequence& block, const LinkBudget& budget,
                          NoiseStage stage, StreamSeed seed);

/// Frequency-independent IQ imbalance y = g1 x + g2 conj(x) with real gains,
/// |g1|^2 + |g2|^2 = 1 and image rejection |g1|^2/|g2|^2 = 10^(irr_db/10).
/// Infinite irr_db returns the input unchanged.
ComplexSequence apply_iq_imbalance(const ComplexSequence& block, double irr_db);

/// Best digital cancellation the receive chain supports: the smaller of the
/// residual-vs-floor gap and the ADC dynamic range 6.02 b + 1.76 less PAPR.
double dsic_upper_bound_db(double rho_r_dbm, double rho_floor_dbm, int adc_bits,
                           double papr_db);

}  // namespace dsic
