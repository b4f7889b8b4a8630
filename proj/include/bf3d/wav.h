// 16 kHz 16-bit PCM RIFF/WAVE reading and writing.

#ifndef BF3D_WAV_H_
#define BF3D_WAV_H_

#include <filesystem>

#include "bf3d/types.h"

namespace bf3d {

inline constexpr int kWavSampleRate = 16000;

// Samples scaled by 1/32768 into [-1, 1). Throws IoError for missing or
// malformed files and for any encoding other than 16 kHz 16-bit PCM.
MultiSignal ReadWav(const std::filesystem::path& path);

// Quantises round(x * 32768) into int16; values outside the representable
// range are clipped and reported once through LogWarning. Throws IoError
// for a rate other than 16 kHz or an unwritable path.
void WriteWav(const std::filesystem::path& path, const MultiSignal& channels,
              int sample_rate = kWavSampleRate);

}  // namespace bf3d

#endif  // BF3D_WAV_H_
