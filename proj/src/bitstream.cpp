#include "qrng/bitstream.hpp"

#include <bit>

#include "qrng/errors.hpp"

namespace qrng {

BitStream::BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_length)
    : bytes_(std::move(bytes)), bit_length_(bit_length) {
    detail::require(bit_length_ <= 8 * bytes_.size() && 8 * bytes_.size() < bit_length_ + 8,
                     "byte count does not match bit length");
    if (bit_length_ % 8 != 0) {
        bytes_.back() &= static_cast<std::uint8_t>(0xFFu << (8 - bit_length_ % 8));
    }
}

BitStream BitStream::from_bits(std::span<const std::uint8_t> bits) {
    BitStream out;
    out.reserve(bits.size());
    for (std::uint8_t b : bits) out.push_back(b != 0);
    return out;
}

void BitStream::push_back(bool bit) {
    if (bit_length_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_length_ % 8));
    ++bit_length_;
}

void BitStream::append_msb(std::uint64_t value, unsigned count) {
    for (unsigned k = count; k-- > 0;) push_back((value >> k) & 1u);
}

void BitStream::append(const BitStream& other) {
    if (bit_length_ % 8 == 0) {
        bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
        bit_length_ += other.bit_length_;
        return;
    }
    reserve(bit_length_ + other.bit_length_);
    for (std::size_t i = 0; i < other.size(); ++i) push_back(other[i]);
}

BitStream BitStream::slice(std::size_t first, std::size_t count) const {
    detail::require(first + count <= bit_length_, "slice exceeds stream length");
    if (first % 8 == 0) {
        std::vector<std::uint8_t> b(bytes_.begin() + static_cast<std::ptrdiff_t>(first / 8),
                                    bytes_.begin() + static_cast<std::ptrdiff_t>((first + count + 7) / 8));
        return BitStream(std::move(b), count);
    }
    BitStream out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back((*this)[first + i]);
    return out;
}

std::vector<std::uint8_t> BitStream::to_bits() const {
    std::vector<std::uint8_t> bits(bit_length_);
    for (std::size_t i = 0; i < bit_length_; ++i) bits[i] = (*this)[i] ? 1 : 0;
    return bits;
}

std::size_t BitStream::popcount() const noexcept {
    std::size_t n = 0;
    for (std::uint8_t b : bytes_) n += static_cast<std::size_t>(std::popcount(b));
    return n;
}

BitStream operator^(const BitStream& a, const BitStream& b) {
    detail::require(a.size() == b.size(), "XOR needs streams of equal length");
    std::vector<std::uint8_t> bytes(a.bytes().size());
    for (std::size_t k = 0; k < bytes.size(); ++k) bytes[k] = a.bytes()[k] ^ b.bytes()[k];
    return BitStream(std::move(bytes), a.size());
}

}  // namespace qrng
