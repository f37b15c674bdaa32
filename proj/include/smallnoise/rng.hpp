#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace smallnoise {

// Philox4x32-10 counter-based generator (Salmon et al. constants).
// A block is a pure function of (counter, key), which is what makes every
// Monte Carlo replication addressable: no generator state is ever shared
// between threads or carried across loop iterations.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }
};

// Random-access stream of i.i.d. variates addressed by (seed, stream, index).
// The counter holds (index, stream), the key holds the seed, so the i-th
// draw of a stream is independent of evaluation order and thread count.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform(std::uint64_t i) const {
        const auto out = block_at(i);
        return to_unit(out[0], out[1]);
    }

    // i-th standard normal via Box-Muller on one Philox block.
    double normal(std::uint64_t i) const {
        const auto out = block_at(i);
        const double u1 = to_unit(out[0], out[1]);
        const double u2 = to_unit(out[2], out[3]);
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

  private:
    std::array<std::uint32_t, 4> block_at(std::uint64_t i) const {
        return Philox4x32::block({static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(i >> 32), stream_lo_, stream_hi_},
                                 key_);
    }

    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

// Stream layout shared by all Monte Carlo loops: replication k, channel c
// (channel 0 = main driving noise, 1 = secondary noise, ...).
inline RandomStream replication_stream(std::uint64_t seed, std::uint64_t replication,
                                       std::uint64_t channel = 0) {
    return RandomStream(seed, replication * 8 + channel);
}

}  // namespace smallnoise
