#pragma once

#include <cstddef>
#include <string>

#include "dsic/rng.hpp"
#include "dsic/types.hpp"

namespace dsic {

/// i.i.d. circular complex Gaussian block, normalized to unit average power.
ComplexSequence gen_gaussian_sequence(std::size_t length, StreamSeed seed);

/// Random-phase block whose amplitude density is f(a) = (a/4) e^{-a/2},
/// a >= 0 (a Gamma(2, 2) amplitude), normalized to unit average power.
/// Heavier amplitude tail than Gaussian at the same mean power.
ComplexSequence gen_chisq_amplitude_sequence(std::size_t length, StreamSeed seed);

/// Deterministic low-PAPR multitone block: num_tones unit tones at integer
/// frequencies 0..num_tones-1 with quadratic (Newman) phases pi*k^2/K,
/// normalized to unit average power. The seed parameter is accepted for
/// interface uniformity with the random generators and ignored.
ComplexSequence gen_multitone_pilot(std::size_t length, std::size_t num_tones,
                                    StreamSeed seed);

/// Tone count used for multitone pilots when the caller does not pick one.
std::size_t default_tone_count(std::size_t length);

/// Peak power, mean power and PAPR of a block. Throws on empty input or
/// zero mean power.
SequenceStats stats(const ComplexSequence& seq);

/// Two-column CSV (re,im with header) for debugging and cross-checks.
void write_sequence_csv(const ComplexSequence& seq, const std::string& path);
ComplexSequence read_sequence_csv(const std::string& path);

}  // namespace dsic
