#include "qrng/toeplitz.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "qrng/errors.hpp"
#include "qrng/rng.hpp"

namespace qrng {

using detail::require;

ToeplitzDims derive_params(double rate, std::size_t n, double epsilon, ExtractionMode mode) {
    require(std::isfinite(rate) && rate > 0.0 && rate <= 1.0, "min-entropy rate must lie in (0, 1]");
    require(n >= 1, "input block size must be >= 1");
    require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
    double x = static_cast<double>(n) * rate;
    if (mode == ExtractionMode::lemma) x -= 2.0 * std::log2(1.0 / epsilon);
    // 4000 * 0.98 is 3919.9999999999995 in binary floating point.
    const double m = std::floor(x + 1e-9);
    if (!(m >= 1.0)) {
        throw InsufficientEntropyError("min-entropy rate " + std::to_string(rate) + " with n = " +
                                       std::to_string(n) + " leaves no output bits");
    }
    return {n, static_cast<std::size_t>(m)};
}

ToeplitzSpec::ToeplitzSpec(std::size_t n, std::size_t m, BitStream seed)
    : n_(n), m_(m), seed_(std::move(seed)) {
    require(m_ >= 1 && m_ <= n_, "Toeplitz dimensions need 1 <= m <= n");
    require(seed_.size() == n_ + m_ - 1, "Toeplitz seed must hold exactly n + m - 1 bits");
}

namespace {

constexpr std::array<std::uint8_t, 256> make_reverse_table() {
    std::array<std::uint8_t, 256> t{};
    for (unsigned v = 0; v < 256; ++v) {
        unsigned r = 0;
        for (unsigned b = 0; b < 8; ++b) r |= ((v >> b) & 1u) << (7 - b);
        t[v] = static_cast<std::uint8_t>(r);
    }
    return t;
}

constexpr auto kReverse = make_reverse_table();

// The seed packed LSB-first, plus 64 copies shifted right by 0..63 bits so
// any m-bit window is a run of aligned words.
class ShiftedSeed {
public:
    explicit ShiftedSeed(const BitStream& seed) {
        const std::size_t words = (seed.size() + 63) / 64 + 2;
        std::vector<std::uint64_t> base(words, 0);
        for (std::size_t k = 0; k < seed.size(); ++k) {
            if (seed[k]) base[k / 64] |= std::uint64_t{1} << (k % 64);
        }
        stride_ = words;
        table_.assign(64 * words, 0);
        for (unsigned r = 0; r < 64; ++r) {
            std::uint64_t* row = &table_[r * words];
            for (std::size_t w = 0; w + 1 < words; ++w) {
                row[w] = r == 0 ? base[w] : (base[w] >> r) | (base[w + 1] << (64 - r));
            }
        }
    }

    const std::uint64_t* window(std::size_t offset) const {
        return &table_[(offset % 64) * stride_ + offset / 64];
    }

private:
    std::vector<std::uint64_t> table_;
    std::size_t stride_ = 0;
};

}  // namespace

ExtractionResult extract(const BitStream& input, const ToeplitzSpec& spec) {
    const std::size_t n = spec.n();
    const std::size_t m = spec.m();
    if (input.size() < n) {
        throw InsufficientInputError("extractor input has " + std::to_string(input.size()) +
                                     " bits, fewer than one block of " + std::to_string(n));
    }
    const std::size_t blocks = input.size() / n;
    const std::size_t out_words = (m + 63) / 64;
    const std::size_t out_bytes = (m + 7) / 8;
    const ShiftedSeed seed(spec.seed());

    std::vector<std::uint8_t> packed(blocks * out_bytes);
    const auto nb = static_cast<std::int64_t>(blocks);
#pragma omp parallel
    {
        std::vector<std::uint64_t> y(out_words);
#pragma omp for schedule(static)
        for (std::int64_t b = 0; b < nb; ++b) {
            std::fill(y.begin(), y.end(), 0);
            const std::size_t base = static_cast<std::size_t>(b) * n;
            for (std::size_t j = 0; j < n; ++j) {
                if (!input[base + j]) continue;
                // Column j of T is the seed window starting at n - 1 - j.
                const std::uint64_t* col = seed.window(n - 1 - j);
                for (std::size_t w = 0; w < out_words; ++w) y[w] ^= col[w];
            }
            std::uint8_t* dst = &packed[static_cast<std::size_t>(b) * out_bytes];
            for (std::size_t k = 0; k < out_bytes; ++k) {
                dst[k] = kReverse[(y[k / 8] >> (8 * (k % 8))) & 0xFFu];
            }
            if (m % 8 != 0) dst[out_bytes - 1] &= static_cast<std::uint8_t>(0xFFu << (8 - m % 8));
        }
    }

    ExtractionResult out;
    out.blocks = blocks;
    out.discarded_bits = input.size() - blocks * n;
    if (m % 8 == 0) {
        out.bits = BitStream(std::move(packed), blocks * m);
    } else {
        out.bits.reserve(blocks * m);
        for (std::size_t b = 0; b < blocks; ++b) {
            std::vector<std::uint8_t> one(packed.begin() + static_cast<std::ptrdiff_t>(b * out_bytes),
                                          packed.begin() + static_cast<std::ptrdiff_t>((b + 1) * out_bytes));
            out.bits.append(BitStream(std::move(one), m));
        }
    }
    return out;
}

BitStream symbols_to_bits(const SymbolStream& symbols) {
    require(symbols.bits_per_symbol >= 1 && symbols.bits_per_symbol <= 16,
            "bits per symbol must lie in [1, 16]");
    const auto width = static_cast<unsigned>(symbols.bits_per_symbol);
    BitStream out;
    out.reserve(symbols.size() * width);
    for (std::uint16_t s : symbols.symbols) out.append_msb(s, width);
    return out;
}

BitStream deterministic_seed(std::size_t n, std::size_t m, std::uint64_t seed) {
    require(m >= 1 && m <= n, "Toeplitz dimensions need 1 <= m <= n");
    const std::size_t bits = n + m - 1;
    const CounterRng rng(seed, Stream::extractor_seed);
    std::vector<std::uint8_t> bytes((bits + 7) / 8);
    for (std::size_t k = 0; k < bytes.size(); ++k) {
        bytes[k] = static_cast<std::uint8_t>(rng.bits64(k / 8) >> (8 * (k % 8)));
    }
    return BitStream(std::move(bytes), bits);
}

BitStream read_seed_file(const std::filesystem::path& path, std::size_t n, std::size_t m) {
    require(m >= 1 && m <= n, "Toeplitz dimensions need 1 <= m <= n");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open seed file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t bits = n + m - 1;
    const std::size_t expected = (bits + 7) / 8;
    if (bytes.size() != expected) {
        throw FormatError("seed file " + path.string() + " has " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(expected) + " for n = " +
                          std::to_string(n) + ", m = " + std::to_string(m));
    }
    return BitStream(std::move(bytes), bits);
}

void write_seed_file(const std::filesystem::path& path, const BitStream& seed) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write seed file " + path.string());
    out.write(reinterpret_cast<const char*>(seed.bytes().data()),
              static_cast<std::streamsize>(seed.bytes().size()));
}

}  // namespace qrng
