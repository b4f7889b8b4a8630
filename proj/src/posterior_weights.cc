#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bf3d/error.h"
#include "bf3d/features.h"

namespace bf3d {
namespace {

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; add byte swapping for this host");

constexpr char kMagic[4] = {'B', 'W', '3', 'D'};

void CheckDims(std::size_t num_l, std::size_t num_f, std::size_t h,
               std::size_t w1, std::size_t b1, std::size_t w2,
               std::size_t b2) {
  if (num_l == 0 || num_f == 0 || h == 0) {
    throw ShapeError("PosteriorWeights: L, F and H must be positive");
  }
  if (w1 != h * num_l * num_f || b1 != h || w2 != num_l * h || b2 != num_l) {
    throw ShapeError("PosteriorWeights: parameter sizes inconsistent with L, F, H");
  }
}

void CheckFinite(const std::vector<float>& v) {
  for (float x : v) {
    if (!std::isfinite(x)) throw ArgumentError("PosteriorWeights: non-finite value");
  }
}

std::vector<float> ReadFloats(std::istream& in, std::size_t n,
                              const std::filesystem::path& path) {
  std::vector<float> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw IoError("PosteriorWeights: truncated file " + path.string());
  return v;
}

}  // namespace

PosteriorWeights::PosteriorWeights(std::size_t num_candidates,
                                   std::size_t num_bins, std::size_t hidden,
                                   std::vector<float> w1, std::vector<float> b1,
                                   std::vector<float> w2, std::vector<float> b2)
    : num_candidates_(num_candidates),
      num_bins_(num_bins),
      hidden_(hidden),
      w1_(std::move(w1)),
      b1_(std::move(b1)),
      w2_(std::move(w2)),
      b2_(std::move(b2)) {
  CheckDims(num_candidates_, num_bins_, hidden_, w1_.size(), b1_.size(),
            w2_.size(), b2_.size());
  CheckFinite(w1_);
  CheckFinite(b1_);
  CheckFinite(w2_);
  CheckFinite(b2_);
}

PosteriorWeights PosteriorWeights::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("PosteriorWeights: cannot open " + path.string());
  char magic[4];
  std::uint32_t dims[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("PosteriorWeights: bad header in " + path.string());
  }
  const std::size_t num_l = dims[0], num_f = dims[1], h = dims[2];
  if (num_l == 0 || num_f == 0 || h == 0) {
    throw IoError("PosteriorWeights: zero dimension in " + path.string());
  }
  auto w1 = ReadFloats(in, h * num_l * num_f, path);
  auto b1 = ReadFloats(in, h, path);
  auto w2 = ReadFloats(in, num_l * h, path);
  auto b2 = ReadFloats(in, num_l, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("PosteriorWeights: trailing bytes in " + path.string());
  }
  try {
    return PosteriorWeights(num_l, num_f, h, std::move(w1), std::move(b1),
                            std::move(w2), std::move(b2));
  } catch (const Error& e) {
    throw IoError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

void PosteriorWeights::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("PosteriorWeights: cannot write " + path.string());
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(num_candidates_),
                                 static_cast<std::uint32_t>(num_bins_),
                                 static_cast<std::uint32_t>(hidden_)};
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (const auto* v : {&w1_, &b1_, &w2_, &b2_}) {
    out.write(reinterpret_cast<const char*>(v->data()),
              static_cast<std::streamsize>(v->size() * sizeof(float)));
  }
  if (!out) throw IoError("PosteriorWeights: write failed for " + path.string());
}

}  // namespace bf3d
