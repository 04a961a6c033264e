#include "entropic/rng.hpp"

#include <cmath>
#include <numbers>

namespace entropic {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint64_t bits) {
  // 53 random bits mapped to (0, 1)
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t stream, StreamTag tag) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream),
      tag_(static_cast<std::uint32_t>(tag)) {}

std::array<std::uint64_t, 2> PathStream::words(std::uint64_t block) noexcept {
  if (block != cached_block_) {
    // the high half of the block index is folded into the tag word
    const Philox4x32::Counter counter{static_cast<std::uint32_t>(block),
                                      tag_ ^ (static_cast<std::uint32_t>(block >> 32) << 8),
                                      static_cast<std::uint32_t>(stream_),
                                      static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = Philox4x32::generate(counter, key_);
    cached_words_ = {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
                     (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
    cached_block_ = block;
  }
  return cached_words_;
}

double PathStream::normal(std::uint64_t index) noexcept {
  const std::uint64_t block = index >> 1;
  if (block != normal_block_) {
    const auto w = words(block);
    const double radius = std::sqrt(-2.0 * std::log(to_open_unit(w[0])));
    const double angle = 2.0 * std::numbers::pi * to_open_unit(w[1]);
    cached_normals_ = {radius * std::cos(angle), radius * std::sin(angle)};
    normal_block_ = block;
  }
  return cached_normals_[index & 1u];
}

double PathStream::uniform(std::uint64_t index) noexcept {
  // uniforms live in a disjoint block range from the normals of the same stream; bit 55 of the
  // block index lands in the top bit of the tag word
  const auto w = words((index >> 1) | (std::uint64_t{1} << 55));
  return to_open_unit(w[index & 1u]);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace entropic
