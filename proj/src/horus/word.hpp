// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace horus {

using Bytes = std::vector<std::uint8_t>;

/// Arbitrary-precision signed integer, used wherever a value may leave the
/// 256-bit range (wide arithmetic results, aggregated transfer values).
using BigInt = boost::multiprecision::cpp_int;

/// A 256-bit EVM word. Limbs are little-endian; arithmetic wraps mod 2^256.
class Word {
public:
    constexpr Word() = default;
    constexpr Word(std::uint64_t v) : limbs_{v, 0, 0, 0} {}  // NOLINT(implicit)

    static Word from_limbs(const std::array<std::uint64_t, 4>& limbs);
    /// Accepts "0x"-prefixed or bare hex, 0..64 digits, any case.
    static Word from_hex(std::string_view hex);
    /// Big-endian bytes, at most 32; shorter input is left-padded.
    static Word from_bytes(std::span<const std::uint8_t> bytes);
    static Word from_decimal(std::string_view dec);
    static Word max();

    const std::array<std::uint64_t, 4>& limbs() const { return limbs_; }
    std::array<std::uint8_t, 32> to_bytes() const;
    /// Minimal lowercase hex with 0x prefix ("0x0" for zero).
    std::string to_hex() const;
    std::string to_padded_hex() const;
    std::string to_decimal() const;
    BigInt to_bigint() const;

    bool is_zero() const { return (limbs_[0] | limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    bool fits_u64() const { return (limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    std::uint64_t low64() const { return limbs_[0]; }

    friend Word operator+(const Word& a, const Word& b);
    friend Word operator-(const Word& a, const Word& b);
    friend Word operator*(const Word& a, const Word& b);

    friend bool operator==(const Word&, const Word&) = default;
    friend std::strong_ordering operator<=>(const Word& a, const Word& b);

private:
    std::array<std::uint64_t, 4> limbs_{};
};

/// Reduces a (possibly negative or oversized) integer mod 2^256.
Word wrap_to_word(const BigInt& value);

template <std::size_t N>
class FixedBytes {
public:
    constexpr FixedBytes() = default;
    explicit FixedBytes(const std::array<std::uint8_t, N>& b) : bytes_(b) {}

    /// Requires exactly 2*N hex digits, optional 0x prefix.
    static FixedBytes parse(std::string_view hex);
    static bool valid(std::string_view hex);

    const std::array<std::uint8_t, N>& bytes() const { return bytes_; }
    std::string to_hex() const;
    bool is_zero() const;

    friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;

private:
    std::array<std::uint8_t, N> bytes_{};
};

using Address = FixedBytes<20>;
using Hash32 = FixedBytes<32>;

/// Low 20 bytes of a word, as the EVM does for address operands.
Address address_from_word(const Word& w);
Word word_from_address(const Address& a);

std::string to_hex(std::span<const std::uint8_t> bytes, bool prefix = true);
/// Even-length hex, optional 0x prefix. Throws Error(Parse) otherwise.
Bytes bytes_from_hex(std::string_view hex);
std::string to_lower(std::string_view s);

/// Decimal string of an unbounded integer.
std::string to_decimal(const BigInt& v);
/// Accepts decimal or 0x-hex; rejects signs and empty strings.
BigInt parse_unsigned(std::string_view text);

extern template class FixedBytes<20>;
extern template class FixedBytes<32>;

}  // namespace horus
