// Seeded synthetic source signals for self-contained scenes.

#ifndef BF3D_SIGNALS_H_
#define BF3D_SIGNALS_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "bf3d/types.h"

namespace bf3d {

// Speech-like excitation: pink noise band-limited to 100-7000 Hz under a
// 4 Hz syllabic envelope with random syllable levels and pauses. RMS 0.1.
Signal SyntheticSpeech(std::size_t num_samples, double fs, std::uint64_t seed);

// Full-band 1/f noise above 20 Hz. RMS 0.1.
Signal PinkNoise(std::size_t num_samples, double fs, std::uint64_t seed);

// Resolves "synth:speech:<seed>" and "synth:pink:<seed>". Returns false for
// any other reference.
bool SynthesizeSignalRef(const std::string& ref, std::size_t num_samples,
                         double fs, Signal* out);

}  // namespace bf3d

#endif  // BF3D_SIGNALS_H_
