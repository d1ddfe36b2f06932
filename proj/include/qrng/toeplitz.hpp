#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "qrng/bitstream.hpp"
#include "qrng/reconstruction.hpp"

namespace qrng {

enum class ExtractionMode { lemma, rate_only };

inline constexpr double kDefaultEpsilon = 0x1.0p-50;

struct ToeplitzDims {
    std::size_t n = 0;  // input block bits
    std::size_t m = 0;  // output block bits

    double ratio() const { return static_cast<double>(m) / static_cast<double>(n); }
};

/// Output length from the leftover hash lemma, m = floor(n h - 2 log2(1/eps)),
/// or m = floor(n h) in rate_only mode. Throws InsufficientEntropyError when
/// m would be <= 0.
ToeplitzDims derive_params(double min_entropy_rate, std::size_t n, double epsilon = kDefaultEpsilon,
                           ExtractionMode mode = ExtractionMode::lemma);

/// Toeplitz matrix of size m x n defined by n + m - 1 seed bits with
/// T(i, j) = seed[i - j + n - 1].
class ToeplitzSpec {
public:
    ToeplitzSpec(std::size_t n, std::size_t m, BitStream seed);

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    const BitStream& seed() const noexcept { return seed_; }
    ToeplitzDims dims() const noexcept { return {n_, m_}; }

    bool entry(std::size_t i, std::size_t j) const { return seed_[i + n_ - 1 - j]; }

private:
    std::size_t n_;
    std::size_t m_;
    BitStream seed_;
};

struct ExtractionResult {
    BitStream bits;
    std::size_t blocks = 0;
    std::size_t discarded_bits = 0;  // trailing partial block
};

/// y = T x over GF(2) for each full n-bit block of `input`. Word-parallel
/// column XOR, blocks spread over OpenMP threads; equals
/// reference::toeplitz_extract bit for bit.
ExtractionResult extract(const BitStream& input, const ToeplitzSpec& spec);

/// Each symbol as `bits_per_symbol` bits, most significant first.
BitStream symbols_to_bits(const SymbolStream& symbols);

/// Seed bits from the deterministic test generator (Philox, extractor stream).
BitStream deterministic_seed(std::size_t n, std::size_t m, std::uint64_t seed);

/// Seed file: raw bytes, MSB first, exactly ceil((n + m - 1) / 8) bytes.
BitStream read_seed_file(const std::filesystem::path& path, std::size_t n, std::size_t m);
void write_seed_file(const std::filesystem::path& path, const BitStream& seed);

}  // namespace qrng
