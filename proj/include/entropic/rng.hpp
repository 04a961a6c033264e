#pragma once

#include <array>
#include <cstdint>

namespace entropic {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A block is a pure function of (key, counter); streams are addressed by
/// (seed, stream id, tag, index) so any draw can be recomputed without replaying others.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

// Distinct tags keep independent uses of one (seed, stream) pair apart.
enum class StreamTag : std::uint32_t {
  brownian = 1,
  bridge_max = 2,
  jumps = 3,
  inner = 4,
  instance = 5,
};

/// Random-access normal/uniform draws for a single stream (one path, one replica, ...).
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t stream, StreamTag tag) noexcept;

  // index-th standard normal of this stream (Box-Muller, two per block)
  double normal(std::uint64_t index) noexcept;
  // index-th uniform on the open interval (0, 1)
  double uniform(std::uint64_t index) noexcept;

  // sequential helpers over a private cursor, independent of the random-access indices
  double next_uniform() noexcept { return uniform(cursor_++); }
  double next_normal() noexcept { return normal(cursor_++); }

 private:
  std::array<std::uint64_t, 2> words(std::uint64_t block) noexcept;

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint32_t tag_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint64_t, 2> cached_words_{};
  std::uint64_t normal_block_ = ~std::uint64_t{0};
  std::array<double, 2> cached_normals_{};
  std::uint64_t cursor_ = 0;
};

// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace entropic
