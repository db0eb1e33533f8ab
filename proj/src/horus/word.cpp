// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/word.hpp"

#include <algorithm>
#include <cctype>

#include "horus/errors.hpp"

namespace horus {

namespace {

using u128 = unsigned __int128;

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string_view strip_0x(std::string_view s) {
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
    return s;
}

const BigInt& two_pow_256() {
    static const BigInt v = BigInt(1) << 256;
    return v;
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::Integrity: return "integrity error";
        case ErrorKind::Io: return "I/O error";
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::Provider: return "provider error";
        case ErrorKind::Partial: return "partial result";
        case ErrorKind::Processing: return "processing error";
    }
    return "error";
}

Word Word::from_limbs(const std::array<std::uint64_t, 4>& limbs) {
    Word w;
    w.limbs_ = limbs;
    return w;
}

Word Word::from_hex(std::string_view hex) {
    hex = strip_0x(hex);
    if (hex.size() > 64) throw parse_error("hex word longer than 256 bits: " + std::string(hex));
    Word w;
    int bit = 0;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4) {
        const int v = hex_value(*it);
        if (v < 0) throw parse_error("invalid hex digit in word: " + std::string(hex));
        w.limbs_[bit / 64] |= static_cast<std::uint64_t>(v) << (bit % 64);
    }
    return w;
}

Word Word::from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > 32) throw parse_error("word longer than 32 bytes");
    Word w;
    std::size_t i = 0;
    for (auto it = bytes.rbegin(); it != bytes.rend(); ++it, ++i)
        w.limbs_[i / 8] |= static_cast<std::uint64_t>(*it) << (8 * (i % 8));
    return w;
}

Word Word::from_decimal(std::string_view dec) {
    if (dec.empty() || dec.size() > 78 ||
        !std::all_of(dec.begin(), dec.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw parse_error("invalid decimal word: " + std::string(dec));
    const BigInt v(std::string{dec});
    if (v >= two_pow_256()) throw parse_error("decimal word exceeds 256 bits: " + std::string(dec));
    return wrap_to_word(v);
}

Word Word::max() {
    return from_limbs({~0ULL, ~0ULL, ~0ULL, ~0ULL});
}

std::array<std::uint8_t, 32> Word::to_bytes() const {
    std::array<std::uint8_t, 32> out{};
    for (std::size_t i = 0; i < 32; ++i)
        out[31 - i] = static_cast<std::uint8_t>(limbs_[i / 8] >> (8 * (i % 8)));
    return out;
}

std::string Word::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (int nib = 63; nib >= 0; --nib) {
        const auto v = (limbs_[nib / 16] >> (4 * (nib % 16))) & 0xF;
        if (out.empty() && v == 0) continue;
        out.push_back(digits[v]);
    }
    if (out.empty()) out = "0";
    return "0x" + out;
}

std::string Word::to_padded_hex() const {
    const auto b = to_bytes();
    return horus::to_hex(b);
}

BigInt Word::to_bigint() const {
    BigInt v = 0;
    for (int i = 3; i >= 0; --i) {
        v <<= 64;
        v += limbs_[i];
    }
    return v;
}

std::string Word::to_decimal() const {
    return to_bigint().str();
}

Word operator+(const Word& a, const Word& b) {
    Word r;
    u128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        const u128 s = static_cast<u128>(a.limbs_[i]) + b.limbs_[i] + carry;
        r.limbs_[i] = static_cast<std::uint64_t>(s);
        carry = s >> 64;
    }
    return r;
}

Word operator-(const Word& a, const Word& b) {
    Word r;
    std::uint64_t borrow = 0;
    for (int i = 0; i < 4; ++i) {
        const std::uint64_t ai = a.limbs_[i];
        const std::uint64_t bi = b.limbs_[i];
        const std::uint64_t d = ai - bi - borrow;
        borrow = (ai < bi || (ai == bi && borrow)) ? 1 : 0;
        r.limbs_[i] = d;
    }
    return r;
}

Word operator*(const Word& a, const Word& b) {
    Word r;
    for (int i = 0; i < 4; ++i) {
        u128 carry = 0;
        for (int j = 0; i + j < 4; ++j) {
            const u128 cur = static_cast<u128>(a.limbs_[i]) * b.limbs_[j] + r.limbs_[i + j] + carry;
            r.limbs_[i + j] = static_cast<std::uint64_t>(cur);
            carry = cur >> 64;
        }
    }
    return r;
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
    for (int i = 3; i >= 0; --i)
        if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] <=> b.limbs_[i];
    return std::strong_ordering::equal;
}

Word wrap_to_word(const BigInt& value) {
    BigInt v = value % two_pow_256();
    if (v < 0) v += two_pow_256();
    std::array<std::uint64_t, 4> limbs{};
    for (auto& limb : limbs) {
        limb = static_cast<std::uint64_t>(v & BigInt(~0ULL));
        v >>= 64;
    }
    return Word::from_limbs(limbs);
}

template <std::size_t N>
FixedBytes<N> FixedBytes<N>::parse(std::string_view hex) {
    if (!valid(hex))
        throw parse_error("expected " + std::to_string(N) + "-byte hex value, got '" + std::string(hex) + "'");
    const auto bytes = bytes_from_hex(hex);
    std::array<std::uint8_t, N> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return FixedBytes(out);
}

template <std::size_t N>
bool FixedBytes<N>::valid(std::string_view hex) {
    hex = strip_0x(hex);
    return hex.size() == 2 * N &&
           std::all_of(hex.begin(), hex.end(), [](char c) { return hex_value(c) >= 0; });
}

template <std::size_t N>
std::string FixedBytes<N>::to_hex() const {
    return horus::to_hex(bytes_);
}

template <std::size_t N>
bool FixedBytes<N>::is_zero() const {
    return std::all_of(bytes_.begin(), bytes_.end(), [](auto b) { return b == 0; });
}

template class FixedBytes<20>;
template class FixedBytes<32>;

Address address_from_word(const Word& w) {
    const auto b = w.to_bytes();
    std::array<std::uint8_t, 20> a{};
    std::copy(b.begin() + 12, b.end(), a.begin());
    return Address(a);
}

Word word_from_address(const Address& a) {
    return Word::from_bytes(a.bytes());
}

std::string to_hex(std::span<const std::uint8_t> bytes, bool prefix) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = prefix ? "0x" : "";
    out.reserve(out.size() + 2 * bytes.size());
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

Bytes bytes_from_hex(std::string_view hex) {
    hex = strip_0x(hex);
    if (hex.size() % 2 != 0) throw parse_error("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw parse_error("invalid hex digit");
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_decimal(const BigInt& v) {
    return v.str();
}

BigInt parse_unsigned(std::string_view text) {
    if (text.empty()) throw parse_error("empty integer");
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        BigInt v = 0;
        for (char c : text.substr(2)) {
            const int d = hex_value(c);
            if (d < 0) throw parse_error("invalid hex integer: " + std::string(text));
            v = (v << 4) + d;
        }
        return v;
    }
    if (!std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw parse_error("invalid decimal integer: " + std::string(text));
    return BigInt(std::string(text));
}

}  // namespace horus
