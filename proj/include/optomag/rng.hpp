#pragma once
// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// identified by (seed, stream id), so every trajectory owns an independent,
// reproducible sequence regardless of which thread runs it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace optomag {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  /// The raw bijection, exposed for known-answer tests.
  static Block encrypt(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  Block next_block() {
    const Block out = encrypt(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    return out;
  }

  /// Two uniforms in (0, 1) with 53-bit resolution.
  std::array<double, 2> uniform2() {
    const Block b = next_block();
    auto to_unit = [](std::uint32_t hi, std::uint32_t lo) {
      const std::uint64_t bits = (std::uint64_t{hi} << 21) ^ (lo >> 11);  // 53 bits
      return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    };
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const auto [u1, u2] = uniform2();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

 private:
  Key key_;
  Block ctr_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace optomag
