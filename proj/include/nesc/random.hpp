#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace nesc {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// fixed by (key, stream id); draws walk the block counter, so path k of a run
// sees the same numbers whatever thread simulates it.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t key, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 4) {
      buffer_ = block(block_++);
      index_ = 0;
    }
    return buffer_[index_++];
  }

  // Block number b of this stream, independent of the draw position.
  Block block(std::uint64_t b) const {
    return bijection({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), stream_[0], stream_[1]},
                     key_);
  }

  // Uniform on (0, 1).
  double uniform() { return (static_cast<double>((*this)()) + 0.5) * 0x1p-32; }

  static Block bijection(const Block& ctr, const Key& key) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
      c0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      c2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      c1 = static_cast<std::uint32_t>(p1);
      c3 = static_cast<std::uint32_t>(p0);
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {c0, c1, c2, c3};
  }

 private:
  Key key_;
  Key stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int index_ = 4;
};

// Marsaglia-Tsang ziggurat (128 layers) turning one 32-bit word into a
// standard normal: low 7 bits pick the layer, the upper 25 bits are a signed
// abscissa. The rare rejections draw from `fallback`.
class Ziggurat {
 public:
  static const Ziggurat& instance() {
    static const Ziggurat z;
    return z;
  }

  template <typename Uniform32>
  double operator()(std::uint32_t word, Uniform32& fallback) const {
    for (;;) {
      const int i = static_cast<int>(word & 127u);
      const std::int32_t j = static_cast<std::int32_t>(word) >> 7;
      const double x = j * w_[i];
      if (static_cast<std::uint32_t>(std::abs(j)) < k_[i]) return x;
      if (i == 0) {
        double xt, y;
        do {
          xt = -std::log(fallback.uniform()) / kR;
          y = -std::log(fallback.uniform());
        } while (y + y < xt * xt);
        return j > 0 ? kR + xt : -kR - xt;
      }
      if (f_[i] + fallback.uniform() * (f_[i - 1] - f_[i]) < std::exp(-0.5 * x * x)) return x;
      word = fallback();
    }
  }

 private:
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  static constexpr double kM = 16777216.0;  // 2^24

  Ziggurat() {
    double dn = kR, tn = kR;
    const double q = kV / std::exp(-0.5 * dn * dn);
    k_[0] = static_cast<std::uint32_t>((dn / q) * kM);
    k_[1] = 0;
    w_[0] = q / kM;
    w_[127] = dn / kM;
    f_[0] = 1.0;
    f_[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(kV / dn + std::exp(-0.5 * dn * dn)));
      k_[i + 1] = static_cast<std::uint32_t>((dn / tn) * kM);
      tn = dn;
      f_[i] = std::exp(-0.5 * dn * dn);
      w_[i] = dn / kM;
    }
  }

  std::array<std::uint32_t, 128> k_{};
  std::array<double, 128> w_{}, f_{};
};

}  // namespace nesc
