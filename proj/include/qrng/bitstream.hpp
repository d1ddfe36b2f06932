#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qrng {

/// Packed bits, most-significant-bit first within each byte. Pad bits past
/// `bit_length()` in the last byte are kept zero.
class BitStream {
public:
    BitStream() = default;
    BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_length);

    /// One bit per element (nonzero = 1).
    static BitStream from_bits(std::span<const std::uint8_t> bits);

    std::size_t size() const noexcept { return bit_length_; }
    bool empty() const noexcept { return bit_length_ == 0; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

    bool operator[](std::size_t i) const noexcept {
        return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
    }

    void push_back(bool bit);
    /// Append the low `count` bits of `value`, most significant of them first.
    void append_msb(std::uint64_t value, unsigned count);
    void append(const BitStream& other);
    void reserve(std::size_t bits) { bytes_.reserve((bits + 7) / 8); }

    /// Bits [first, first + count) as a new stream.
    BitStream slice(std::size_t first, std::size_t count) const;

    std::vector<std::uint8_t> to_bits() const;
    std::size_t popcount() const noexcept;

    friend bool operator==(const BitStream&, const BitStream&) = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bit_length_ = 0;
};

BitStream operator^(const BitStream& a, const BitStream& b);

}  // namespace qrng
