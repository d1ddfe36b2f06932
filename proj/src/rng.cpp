#include "qrng/rng.hpp"

#include <cmath>
#include <numbers>

namespace qrng {

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

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    // 53 random bits, offset by half an ulp so 0 is never produced.
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
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

CounterRng CounterRng::split(std::uint64_t child) const noexcept {
    const auto key = std::array<std::uint32_t, 2>{static_cast<std::uint32_t>(seed_),
                                                  static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32_10({static_cast<std::uint32_t>(child),
                                    static_cast<std::uint32_t>(child >> 32),
                                    static_cast<std::uint32_t>(stream_) ^ 0x5EED5EEDu,
                                    static_cast<std::uint32_t>(stream_ >> 32) ^ 0xC0FFEEu},
                                   key);
    return CounterRng((static_cast<std::uint64_t>(out[1]) << 32) | out[0], 0);
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index) const noexcept {
    return philox4x32_10({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)},
                         {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::uint64_t CounterRng::bits64(std::uint64_t index) const noexcept {
    const auto b = block(index);
    return (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
}

double CounterRng::uniform(std::uint64_t index) const noexcept {
    const auto b = block(index);
    return to_unit_open(b[1], b[0]);
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t index) const noexcept {
    const auto b = block(index);
    const double u1 = to_unit_open(b[1], b[0]);
    const double u2 = to_unit_open(b[3], b[2]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

double CounterRng::normal(std::uint64_t index) const noexcept {
    const auto [z0, z1] = normal_pair(index >> 1);
    return (index & 1u) ? z1 : z0;
}

}  // namespace qrng
