#pragma once

// Counter-based random streams: each path index owns a Philox4x32-10 stream
// derived from the master seed, so draws depend only on (seed, path, position)
// and never on scheduling.  Uniforms carry 53 bits and avoid the endpoints;
// normals come from the Marsaglia polar transform with the spare cached.

#include <array>
#include <cmath>
#include <cstdint>

namespace striplab {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> c,
                                                 std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

}  // namespace detail

class PathRng {
 public:
  // stream selects an independent substream of the same (seed, path) pair by
  // partitioning the block-counter space; draws never collide across streams.
  PathRng(std::uint64_t seed, std::uint64_t path, std::uint32_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_{static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)},
        block_(static_cast<std::uint64_t>(stream) << 56) {}

  // strictly inside (0, 1) with 53-bit resolution
  double uniform() {
    if (have_ == 0) refill();
    const std::uint64_t bits = buf_[--have_];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (spare_ok_) {
      spare_ok_ = false;
      return spare_;
    }
    double v1, v2, s;
    do {
      v1 = 2.0 * uniform() - 1.0;
      v2 = 2.0 * uniform() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v2 * f;
    spare_ok_ = true;
    return v1 * f;
  }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> out = detail::philox_block(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), path_[0],
         path_[1]},
        key_);
    ++block_;
    buf_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buf_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    have_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> path_;
  std::uint64_t block_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
  double spare_ = 0.0;
  bool spare_ok_ = false;
};

}  // namespace striplab
