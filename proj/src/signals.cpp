#include "dsic/signals.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dsic {

ComplexSequence& ComplexSequence::normalize() {
  if (samples.empty())
    throw std::invalid_argument("normalize: empty sequence");
  double acc = 0.0;
  for (const cplx& v : samples) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("normalize: non-finite sample");
    acc += std::norm(v);
  }
  if (acc <= 0.0)
    throw std::invalid_argument("normalize: zero-energy sequence");
  const double scale = std::sqrt(static_cast<double>(samples.size()) / acc);
  for (cplx& v : samples) v *= scale;
  refresh_power();
  return *this;
}

ComplexSequence gen_gaussian_sequence(std::size_t length, StreamSeed seed) {
  if (length == 0)
    throw std::invalid_argument("gen_gaussian_sequence: length must be positive");
  CounterRng rng(seed);
  ComplexSequence out;
  out.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n)
    out.samples[n] = rng.gaussian(n);
  out.normalize();
  return out;
}

ComplexSequence gen_chisq_amplitude_sequence(std::size_t length, StreamSeed seed) {
  if (length == 0)
    throw std::invalid_argument("gen_chisq_amplitude_sequence: length must be positive");
  CounterRng rng(seed);
  ComplexSequence out;
  out.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) {
    // Gamma(2,2) amplitude as a sum of two Exp(2) variates; independent
    // uniform phase. Two blocks per sample.
    double u0, u1, u2, u3;
    rng.uniform_pair(2 * n, u0, u1);
    rng.uniform_pair(2 * n + 1, u2, u3);
    const double amp = -2.0 * (std::log(u0) + std::log(u1));
    const double ph = 2.0 * std::numbers::pi * u2;
    out.samples[n] = cplx(amp * std::cos(ph), amp * std::sin(ph));
  }
  out.normalize();
  return out;
}

std::size_t default_tone_count(std::size_t length) {
  std::size_t k = length / 5;
  if (k < 16) k = 16;
  if (k > length) k = length;
  return k;
}

ComplexSequence gen_multitone_pilot(std::size_t length, std::size_t num_tones,
                                    [[maybe_unused]] StreamSeed seed) {
  if (length == 0)
    throw std::invalid_argument("gen_multitone_pilot: length must be positive");
  if (num_tones == 0 || num_tones > length)
    throw std::invalid_argument("gen_multitone_pilot: need 1 <= num_tones <= length");
  const double K = static_cast<double>(num_tones);
  const double N = static_cast<double>(length);
  ComplexSequence out;
  out.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) {
    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < num_tones; ++k) {
      const double kk = static_cast<double>(k);
      const double ph = 2.0 * std::numbers::pi * kk * static_cast<double>(n) / N +
                        std::numbers::pi * kk * kk / K;
      acc += cplx(std::cos(ph), std::sin(ph));
    }
    out.samples[n] = acc;
  }
  out.normalize();
  return out;
}

SequenceStats stats(const ComplexSequence& seq) {
  if (seq.empty())
    throw std::invalid_argument("stats: empty sequence");
  double peak = 0.0;
  double acc = 0.0;
  for (const cplx& v : seq.samples) {
    const double p = std::norm(v);
    if (p > peak) peak = p;
    acc += p;
  }
  const double mean = acc / static_cast<double>(seq.size());
  if (mean <= 0.0)
    throw std::invalid_argument("stats: zero mean power");
  SequenceStats s;
  s.peak_power = peak;
  s.mean_power = mean;
  s.papr_db = lin_to_db(peak / mean);
  s.length = seq.size();
  return s;
}

void write_sequence_csv(const ComplexSequence& seq, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_sequence_csv: cannot open " + path);
  out << "re,im\n";
  out.precision(17);
  for (const cplx& v : seq.samples)
    out << v.real() << ',' << v.imag() << '\n';
  if (!out)
    throw std::runtime_error("write_sequence_csv: write failed for " + path);
}

ComplexSequence read_sequence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("read_sequence_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("re,im", 0) != 0)
    throw std::runtime_error("read_sequence_csv: missing re,im header in " + path);
  ComplexSequence out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double re, im;
    char comma;
    if (!(ss >> re >> comma >> im) || comma != ',')
      throw std::runtime_error("read_sequence_csv: malformed row in " + path);
    out.samples.emplace_back(re, im);
  }
  out.refresh_power();
  return out;
}

}  // namespace dsic
