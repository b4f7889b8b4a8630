#include "bf3d/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "bf3d/error.h"
#include "bf3d/log.h"

namespace bf3d {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T Read(const std::vector<char>& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void Put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

MultiSignal ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw IoError(name + ": not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = Read<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    // Streaming writers may leave the data size at 0 or 0xFFFFFFFF.
    const bool open_ended = id == "data" && (size == 0 || size == 0xFFFFFFFFu);
    if (body + size > buf.size() && !open_ended) {
      throw IoError(name + ": truncated '" + id + "' chunk");
    }
    if (id == "fmt ") {
      if (size < 16) throw IoError(name + ": short fmt chunk");
      format = Read<std::uint16_t>(buf, body);
      channels = Read<std::uint16_t>(buf, body + 2);
      rate = Read<std::uint32_t>(buf, body + 4);
      bits = Read<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && size >= 40) {
        format = Read<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError(name + ": data chunk before fmt chunk");
      if (format != kFormatPcm || bits != 16) {
        throw IoError(name + ": unsupported encoding (need 16-bit PCM)");
      }
      if (rate != static_cast<std::uint32_t>(kWavSampleRate)) {
        std::ostringstream os;
        os << name << ": unsupported sample rate " << rate << " Hz (need "
           << kWavSampleRate << " Hz; no resampling is performed)";
        throw IoError(os.str());
      }
      if (channels == 0) throw IoError(name + ": zero channels");
      const std::size_t avail = open_ended ? buf.size() - body : size;
      const std::size_t frames = avail / (2u * channels);
      MultiSignal out(channels, Signal(frames));
      for (std::size_t n = 0; n < frames; ++n) {
        for (std::size_t m = 0; m < channels; ++m) {
          const auto s = Read<std::int16_t>(buf, body + 2 * (n * channels + m));
          out[m][n] = static_cast<double>(s) / 32768.0;
        }
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw IoError(name + ": no data chunk");
}

void WriteWav(const std::filesystem::path& path, const MultiSignal& channels,
              int sample_rate) {
  if (channels.empty()) throw ArgumentError("WriteWav: no channels");
  if (sample_rate != kWavSampleRate) {
    throw IoError(path.string() + ": unsupported sample rate " +
                  std::to_string(sample_rate) + " Hz");
  }
  const std::size_t frames = channels[0].size();
  for (const Signal& ch : channels) {
    if (ch.size() != frames) throw ShapeError("WriteWav: ragged channels");
  }
  const auto num_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(frames * num_ch * 2u);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write WAV file " + path.string());
  out.write("RIFF", 4);
  Put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  Put<std::uint32_t>(out, 16);
  Put<std::uint16_t>(out, kFormatPcm);
  Put<std::uint16_t>(out, num_ch);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * num_ch * 2u);
  Put<std::uint16_t>(out, static_cast<std::uint16_t>(num_ch * 2u));
  Put<std::uint16_t>(out, 16);
  out.write("data", 4);
  Put<std::uint32_t>(out, data_bytes);

  std::size_t clipped = 0;
  std::vector<std::int16_t> pcm(frames * num_ch);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 0; m < num_ch; ++m) {
      double v = std::round(channels[m][n] * 32768.0);
      if (!(v >= -32768.0 && v <= 32767.0)) {
        ++clipped;
        v = std::isnan(v) ? 0.0 : std::clamp(v, -32768.0, 32767.0);
      }
      pcm[n * num_ch + m] = static_cast<std::int16_t>(v);
    }
  }
  out.write(reinterpret_cast<const char*>(pcm.data()),
            static_cast<std::streamsize>(pcm.size() * sizeof(std::int16_t)));
  if (!out) throw IoError("write failed for " + path.string());
  if (clipped > 0) {
    std::ostringstream os;
    os << path.string() << ": clipped " << clipped << " sample(s)";
    LogWarning(os.str());
  }
}

}  // namespace bf3d
