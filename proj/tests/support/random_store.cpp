// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "random_store.hpp"

#include <string>
#include <vector>

#include "evm_sim.hpp"

namespace horus::testing {

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::uint64_t upto(std::mt19937_64& rng, std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n)(rng);
}

FactStore generate(std::mt19937_64& rng, const std::string& prefix) {
    std::vector<std::string> hashes, addrs;
    for (int k = 0; k < 3; ++k) hashes.push_back(tagged_hash(prefix + "tx" + std::to_string(k)).to_hex());
    for (int k = 0; k < 2; ++k) addrs.push_back(tagged_address(prefix + "a" + std::to_string(k)).to_hex());
    const std::vector<std::string> values{"0", "1", "5", "115792089237316195423570985008687907853269984665640564039457584007913129639935"};
    const std::vector<std::string> signed_values{"0", "1", "5", "-1"};
    const std::vector<std::string> inputs{
        "",
        // The wallet signatures are repeated so that ordered pairs are common.
        "e46dcfeb" + std::string(64, '0'),
        "e46dcfeb" + std::string(64, '0'),
        "e46dcfeb" + std::string(64, '0'),
        "b61d27f6" + std::string(128, '1'),
        "b61d27f6" + std::string(128, '1'),
        "cbf0b0c0" + std::string(64, '2'),
        "cbf0b0c0" + std::string(64, '2'),
        "a9059cbb" + std::string(118, '3'),  // 63 bytes
        "a9059cbb" + std::string(128, '3'),  // 68 bytes
        "23b872dd" + std::string(190, '4'),  // 99 bytes
        "23b872dd" + std::string(192, '4'),  // 100 bytes
    };
    const std::vector<std::string> opcodes{"CALLDATALOAD", "CALLDATACOPY", "ADD", "SUB", "MUL", "SSTORE", "JUMPI", "CALL"};
    constexpr std::uint64_t kSteps = 7;

    FactStore s;
    for (const auto& h : hashes) {
        if (upto(rng, 5) == 0) continue;  // occasionally a transaction without a row
        TransactionFact t;
        t.tx_hash = h;
        t.tx_index = upto(rng, 2);
        t.block_number = 1 + upto(rng, 1);
        t.from = pick(rng, addrs);
        t.to = pick(rng, addrs);
        t.input = pick(rng, inputs);
        t.gas_used = 21000;
        t.gas_limit = 30000;
        t.status = upto(rng, 3) == 0 ? 0 : 1;
        s.transaction.push_back(t);
    }
    for (std::uint64_t b = 1; b <= 2; ++b) s.block.push_back({b, 21000, 30000, 1500000000 + b});

    auto n = [&] { return upto(rng, 8); };
    for (auto k = 2 * n(); k > 0; --k) s.opcode.push_back({upto(rng, kSteps), pick(rng, opcodes), pick(rng, hashes)});
    for (auto k = 3 * n(); k > 0; --k) s.data_flow.push_back({upto(rng, kSteps), upto(rng, kSteps), pick(rng, hashes)});
    for (auto k = n(); k > 0; --k) {
        ArithmeticFact a;
        a.step = upto(rng, kSteps);
        a.op = pick(rng, std::vector<std::string>{"ADD", "SUB", "MUL"});
        a.operand1 = pick(rng, values);
        a.operand2 = pick(rng, values);
        a.arithmetic_result = pick(rng, signed_values);
        a.evm_result = pick(rng, values);
        a.tx_hash = pick(rng, hashes);
        s.arithmetic.push_back(a);
    }
    for (auto k = 2 * n(); k > 0; --k) {
        StorageFact st;
        st.step = upto(rng, kSteps);
        st.op = upto(rng, 1) ? "SLOAD" : "SSTORE";
        st.tx_hash = pick(rng, hashes);
        st.caller = pick(rng, addrs);
        st.contract = pick(rng, addrs);
        st.index = pick(rng, std::vector<std::string>{"0", "1"});
        st.value = pick(rng, values);
        st.depth = 1 + upto(rng, 1);
        s.storage.push_back(st);
    }
    for (auto k = n(); k > 0; --k) s.condition.push_back({upto(rng, kSteps), pick(rng, hashes)});
    for (auto k = n(); k > 0; --k)
        s.erc20_transfer.push_back({upto(rng, kSteps), pick(rng, hashes), pick(rng, addrs), pick(rng, addrs),
                                    pick(rng, addrs), pick(rng, values)});
    for (auto k = 2 * n(); k > 0; --k) {
        CallFact c;
        c.step = upto(rng, kSteps);
        c.tx_hash = pick(rng, hashes);
        c.op = pick(rng, std::vector<std::string>{"CALL", "CALL", "DELEGATECALL"});
        c.caller = pick(rng, addrs);
        c.callee = pick(rng, addrs);
        c.input = "";
        c.value = pick(rng, values);
        c.depth = 1 + upto(rng, 1);
        c.call_id = upto(rng, 1);
        c.call_branch = upto(rng, 1);
        c.result = upto(rng, 3) == 0 ? 0 : 1;
        s.call.push_back(c);
    }
    for (auto k = upto(rng, 2); k > 0; --k)
        s.selfdestruct.push_back({upto(rng, kSteps), pick(rng, hashes), pick(rng, addrs), pick(rng, addrs),
                                  pick(rng, addrs), pick(rng, values)});
    s.canonicalize();
    return s;
}

}  // namespace

FactStore random_store(std::mt19937_64& rng) {
    return generate(rng, "random/");
}

FactStore random_unrelated_store(std::mt19937_64& rng) {
    return generate(rng, "unrelated/");
}

}  // namespace horus::testing
