#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsic {

using cplx = std::complex<double>;

/// Thrown when a least-squares system is numerically rank deficient.
/// Carries the condition-number estimate that tripped the check so callers
/// can log it or fall back to a different pilot.
class RankDeficientError : public std::runtime_error {
public:
  RankDeficientError(const std::string& msg, double cond_estimate)
      : std::runtime_error(msg), cond_(cond_estimate) {}
  double cond_estimate() const { return cond_; }

private:
  double cond_;
};

/// Thrown on malformed configuration (bad keys, out-of-range values).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Power-unit helpers. All internal arithmetic tracks linear power in mW;
// dB / dBm appear only at configuration and report boundaries.
inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// A finite block of complex baseband samples plus its average power.
/// nominal_power is refreshed by normalize() and by the generators; it is
/// the arithmetic mean of |samples[n]|^2.
struct ComplexSequence {
  std::vector<cplx> samples;
  double nominal_power = 0.0;

  ComplexSequence() = default;
  explicit ComplexSequence(std::vector<cplx> s) : samples(std::move(s)) {
    refresh_power();
  }

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  cplx& operator[](std::size_t i) { return samples[i]; }
  const cplx& operator[](std::size_t i) const { return samples[i]; }

  double mean_power() const {
    if (samples.empty())
      throw std::invalid_argument("mean_power: empty sequence");
    double acc = 0.0;
    for (const cplx& v : samples) acc += std::norm(v);
    return acc / static_cast<double>(samples.size());
  }

  void refresh_power() { nominal_power = samples.empty() ? 0.0 : mean_power(); }

  /// Scale to unit average power. Throws if the sequence is empty, has zero
  /// energy, or contains non-finite samples.
  ComplexSequence& normalize();
};

/// Summary statistics of a sample block.
struct SequenceStats {
  double papr_db = 0.0;
  double peak_power = 0.0;
  double mean_power = 0.0;
  std::size_t length = 0;
};

}  // namespace dsic
