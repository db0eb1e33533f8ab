// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "horus/errors.hpp"
#include "horus/taint.hpp"
#include "horus/trace_model.hpp"
#include "horus/word.hpp"
#include "support/test_util.hpp"

namespace horus {
namespace {

using testing::mod256;
using testing::to_mpz;

Word random_word(std::mt19937_64& rng) {
    switch (rng() % 6) {
        case 0: return Word(rng() % 4);
        case 1: return Word::max() - Word(rng() % 4);
        case 2: return Word(rng());
        case 3: return Word::from_limbs({0, 0, 0, 1ULL << 63});
        default: return Word::from_limbs({rng(), rng(), rng(), rng()});
    }
}

TEST(Word, HexRoundTrip) {
    EXPECT_EQ(Word().to_hex(), "0x0");
    EXPECT_EQ(Word(255).to_hex(), "0xff");
    EXPECT_EQ(Word::from_hex("0x00ff").to_hex(), "0xff");
    EXPECT_EQ(Word::from_hex("FF"), Word(255));
    EXPECT_EQ(Word::max().to_hex(), "0x" + std::string(64, 'f'));
    EXPECT_EQ(Word(1).to_padded_hex(), "0x" + std::string(63, '0') + "1");
    EXPECT_THROW(Word::from_hex("0x" + std::string(65, '1')), Error);
    EXPECT_THROW(Word::from_hex("0xzz"), Error);
}

TEST(Word, Decimal) {
    EXPECT_EQ(Word().to_decimal(), "0");
    EXPECT_EQ(Word::max().to_decimal(),
              "115792089237316195423570985008687907853269984665640564039457584007913129639935");
    EXPECT_EQ(Word::from_decimal("1000000000000000000"), Word(1000000000000000000ULL));
    EXPECT_EQ(to_decimal(BigInt(-1)), "-1");
}

TEST(Word, BytesAndAddresses) {
    std::array<std::uint8_t, 32> b{};
    b[31] = 7;
    b[0] = 1;
    const auto w = Word::from_bytes(b);
    EXPECT_EQ(w.to_bytes(), b);
    const auto a = Address::parse("0x00000000000000000000000000000000000000AA");
    EXPECT_EQ(a.to_hex(), "0x00000000000000000000000000000000000000aa");
    EXPECT_TRUE(Address::valid("0x" + std::string(40, 'a')));
    EXPECT_FALSE(Address::valid("0x" + std::string(38, 'a')));
    EXPECT_FALSE(Address::valid("0x" + std::string(42, 'a')));
    EXPECT_EQ(address_from_word(Word::max() - Word(0)).to_hex(), "0x" + std::string(40, 'f'));
    EXPECT_EQ(word_from_address(a), Word(0xaa));
}

TEST(Word, ParseUnsigned) {
    EXPECT_EQ(parse_unsigned("0x10"), BigInt(16));
    EXPECT_EQ(parse_unsigned("16"), BigInt(16));
    EXPECT_THROW(parse_unsigned("-1"), Error);
    EXPECT_THROW(parse_unsigned(""), Error);
    EXPECT_THROW(parse_unsigned("12a"), Error);
}

TEST(Word, WrapToWord) {
    EXPECT_EQ(wrap_to_word(BigInt(-1)), Word::max());
    EXPECT_EQ(wrap_to_word(BigInt(1) << 256), Word());
    EXPECT_EQ(wrap_to_word((BigInt(1) << 256) + 5), Word(5));
}

TEST(CheckedArith, Examples) {
    const auto add = checked_arith(Opcode::ADD, Word::max(), Word(1));
    EXPECT_EQ(add.wide_result, BigInt(1) << 256);
    EXPECT_EQ(add.evm_result, Word());
    EXPECT_TRUE(add.overflowed());

    const auto sub = checked_arith(Opcode::SUB, Word(0), Word(1));
    EXPECT_EQ(sub.wide_result, BigInt(-1));
    EXPECT_EQ(sub.evm_result, Word::max());
    EXPECT_TRUE(sub.overflowed());

    const auto mul = checked_arith(Opcode::MUL, Word(3), Word(4));
    EXPECT_EQ(mul.wide_result, BigInt(12));
    EXPECT_EQ(mul.evm_result, Word(12));
    EXPECT_FALSE(mul.overflowed());

    EXPECT_THROW(checked_arith(Opcode::LT, Word(1), Word(2)), Error);
}

// evm_result == wide_result mod 2^256 and the differ flag, against GMP.
TEST(CheckedArith, MatchesGmpOracle) {
    std::mt19937_64 rng(0x5eed0001);
    for (const auto op : {Opcode::ADD, Opcode::SUB, Opcode::MUL}) {
        for (int i = 0; i < 100000; ++i) {
            const auto a = random_word(rng), b = random_word(rng);
            const auto obs = checked_arith(op, a, b);
            const mpz_class x = to_mpz(a), y = to_mpz(b);
            const mpz_class wide = op == Opcode::ADD ? mpz_class(x + y) : op == Opcode::SUB ? mpz_class(x - y) : mpz_class(x * y);
            ASSERT_EQ(to_mpz(obs.wide_result), wide) << mnemonic(op) << " " << a.to_hex() << " " << b.to_hex();
            ASSERT_EQ(to_mpz(obs.evm_result), mod256(wide));
            ASSERT_EQ(obs.overflowed(), wide != mod256(wide));
        }
    }
}

TEST(OrderKey, Examples) {
    EXPECT_EQ(compare_order({1, 0, 0}, {1, 0, 1}), -1);
    EXPECT_EQ(compare_order({1, 5, 99}, {2, 0, 0}), -1);
    EXPECT_EQ(compare_order({7, 3, 2}, {7, 3, 2}), 0);
    EXPECT_EQ(compare_order({2, 0, 0}, {1, 9, 9}), 1);
}

TEST(OrderKey, StrictTotalOrder) {
    std::mt19937_64 rng(0x5eed0002);
    auto key = [&] { return OrderKey{rng() % 3, rng() % 3, rng() % 3}; };
    for (int i = 0; i < 20000; ++i) {
        const auto a = key(), b = key(), c = key();
        ASSERT_EQ(compare_order(a, b), -compare_order(b, a));
        ASSERT_EQ(compare_order(a, b) == 0, a.block_number == b.block_number && a.tx_index == b.tx_index && a.step == b.step);
        if (compare_order(a, b) < 0 && compare_order(b, c) < 0) {
            ASSERT_LT(compare_order(a, c), 0);
        }
        const auto lex = std::tie(a.block_number, a.tx_index, a.step) < std::tie(b.block_number, b.tx_index, b.step);
        ASSERT_EQ(compare_order(a, b) < 0, lex);
    }
}

}  // namespace
}  // namespace horus
