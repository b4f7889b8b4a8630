#include <cmath>
#include <cstdint>
#include <fstream>

#include <doctest.h>

#include "bf3d/error.h"
#include "bf3d/wav.h"
#include "test_util.h"

using namespace bf3d;
using namespace bf3d::testing;

namespace {

void PutU32(std::ofstream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::ofstream& out, std::uint16_t v) {
  out.put(static_cast<char>(v & 0xff));
  out.put(static_cast<char>(v >> 8));
}

void WriteHeader(const std::filesystem::path& path, std::uint16_t format,
                 std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                 std::uint32_t data_bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write("RIFF", 4);
  PutU32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  PutU32(out, 16);
  PutU16(out, format);
  PutU16(out, channels);
  PutU32(out, rate);
  PutU32(out, rate * channels * bits / 8);
  PutU16(out, static_cast<std::uint16_t>(channels * bits / 8));
  PutU16(out, bits);
  out.write("data", 4);
  PutU32(out, data_bytes);
  for (std::uint32_t i = 0; i < data_bytes; ++i) out.put(0);
}

}  // namespace

TEST_CASE("wav round trip within quantisation") {
  const auto dir = TempDir("wav");
  MultiSignal x = RandomSignal(3, 5000, 2);
  for (Signal& ch : x)
    for (double& v : ch) v = std::clamp(v, -0.99, 0.99);
  WriteWav(dir / "x.wav", x);
  const MultiSignal y = ReadWav(dir / "x.wav");
  REQUIRE(y.size() == 3);
  REQUIRE(y[0].size() == 5000);
  double err = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < 5000; ++n) err = std::max(err, std::abs(x[c][n] - y[c][n]));
  CHECK(err <= std::ldexp(1.0, -15));
}

TEST_CASE("stereo channel order is preserved") {
  const auto dir = TempDir("wav_stereo");
  MultiSignal x(2, Signal(100, 0.0));
  for (std::size_t n = 0; n < 100; ++n) {
    x[0][n] = 0.25;
    x[1][n] = -0.5;
  }
  WriteWav(dir / "s.wav", x);
  const MultiSignal y = ReadWav(dir / "s.wav");
  REQUIRE(y.size() == 2);
  CHECK(y[0][10] == 0.25);
  CHECK(y[1][10] == -0.5);
}

TEST_CASE("clipping is reported") {
  const auto dir = TempDir("wav_clip");
  WarningCapture warnings;
  WriteWav(dir / "c.wav", MultiSignal{Signal{0.5, 1.5, -2.0}});
  CHECK(warnings.messages.size() == 1);
  const MultiSignal y = ReadWav(dir / "c.wav");
  CHECK(y[0][1] == doctest::Approx(32767.0 / 32768.0));
  CHECK(y[0][2] == -1.0);
}

TEST_CASE("unsupported and malformed files") {
  const auto dir = TempDir("wav_bad");
  WriteHeader(dir / "8k.wav", 1, 1, 8000, 16, 200);
  CHECK_THROWS_AS(ReadWav(dir / "8k.wav"), IoError);
  WriteHeader(dir / "24bit.wav", 1, 1, 16000, 24, 300);
  CHECK_THROWS_AS(ReadWav(dir / "24bit.wav"), IoError);
  WriteHeader(dir / "float.wav", 3, 1, 16000, 32, 400);
  CHECK_THROWS_AS(ReadWav(dir / "float.wav"), IoError);
  WriteHeader(dir / "ok.wav", 1, 2, 16000, 16, 400);
  CHECK(ReadWav(dir / "ok.wav")[1].size() == 100);
  {
    std::ofstream junk(dir / "junk.wav", std::ios::binary);
    junk << "not a wave file at all";
  }
  CHECK_THROWS_AS(ReadWav(dir / "junk.wav"), IoError);
  CHECK_THROWS_AS(ReadWav(dir / "missing.wav"), IoError);
  std::filesystem::resize_file(dir / "ok.wav", 50);
  CHECK_THROWS_AS(ReadWav(dir / "ok.wav"), IoError);
  CHECK_THROWS_AS(WriteWav(dir / "rate.wav", MultiSignal{Signal(10)}, 8000), IoError);
  CHECK_THROWS_AS(WriteWav(dir / "none" / "x.wav", MultiSignal{Signal(10)}), IoError);
}
