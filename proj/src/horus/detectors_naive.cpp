// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

// Reference evaluation of the detection rules: every body atom is a full scan
// of its relation and every join is a nested loop. Used to cross-check the
// indexed plans in detectors.cpp.

#include "horus/detectors.hpp"
#include "horus/detectors_internal.hpp"

namespace horus {

namespace {

using detail::HeadTable;
using detail::OrderIndex;

bool starts_with(const std::string& s, const std::string& p) { return s.size() >= p.size() && s.substr(0, p.size()) == p; }

bool before(const TransactionFact& a, const TransactionFact& b) {
    if (a.block_number < b.block_number) return true;
    return a.block_number == b.block_number && a.tx_index < b.tx_index;
}

void reentrancy(const FactStore& s, const OrderIndex& order, HeadTable& heads) {
    for (const auto& s1 : s.storage) {
        if (s1.op != "SLOAD") continue;
        for (const auto& c2 : s.call) {
            if (c2.tx_hash != s1.tx_hash || c2.caller != s1.contract || c2.depth != s1.depth || c2.result != 1) continue;
            if (!(s1.step < c2.step)) continue;
            for (const auto& c3 : s.call) {
                if (c3.tx_hash != s1.tx_hash || c3.caller != c2.caller || c3.callee != c2.callee ||
                    c3.call_id != c2.call_id || c3.call_branch != c2.call_branch || c3.result != 1)
                    continue;
                if (!(s1.depth < c3.depth) || c3.value == "0") continue;
                for (const auto& s4 : s.storage) {
                    if (s4.op != "SSTORE" || s4.tx_hash != s1.tx_hash || s4.contract != s1.contract ||
                        s4.index != s1.index || s4.depth != s1.depth)
                        continue;
                    if (!(c3.step < s4.step)) continue;
                    Finding f;
                    f.rule = Rule::Reentrancy;
                    f.tx_hashes = {s1.tx_hash};
                    f.parties = {{"caller", c2.caller}, {"callee", c2.callee}};
                    f.amount = c3.value;
                    f.depth = c3.depth;
                    f.evidence = {order.key(s1.tx_hash, s1.step), order.key(s1.tx_hash, c2.step),
                                  order.key(s1.tx_hash, c3.step), order.key(s1.tx_hash, s4.step)};
                    heads.offer(std::move(f));
                }
            }
        }
    }
}

template <class Emit>
void parity_pairs(const FactStore& s, const std::string& first_sig, const std::string& second_sig, Emit emit) {
    for (const auto& t1 : s.transaction) {
        if (t1.status != 1 || !starts_with(t1.input, first_sig)) continue;
        for (const auto& t2 : s.transaction) {
            if (t2.status != 1 || !starts_with(t2.input, second_sig)) continue;
            if (t1.from != t2.from || t1.to != t2.to || !before(t1, t2)) continue;
            emit(t1, t2);
        }
    }
}

void parity_1(const FactStore& s, const RuleSet& rules, const OrderIndex& order, HeadTable& heads) {
    parity_pairs(s, rules.init_wallet_signature, rules.execute_signature,
                 [&](const TransactionFact& t1, const TransactionFact& t2) {
                     for (const auto& c : s.call) {
                         if (c.tx_hash != t2.tx_hash || c.op != "CALL" || c.depth != 1) continue;
                         Finding f;
                         f.rule = Rule::ParityWalletHack1;
                         f.tx_hashes = {t1.tx_hash, t2.tx_hash};
                         f.parties = {{"caller", c.caller}, {"callee", c.callee}};
                         f.amount = c.value;
                         f.evidence = {order.key(t1.tx_hash, 0), order.key(t2.tx_hash, 0), order.key(t2.tx_hash, c.step)};
                         heads.offer(std::move(f));
                     }
                 });
}

void parity_2(const FactStore& s, const RuleSet& rules, const OrderIndex& order, HeadTable& heads) {
    parity_pairs(s, rules.init_wallet_signature, rules.kill_signature,
                 [&](const TransactionFact& t1, const TransactionFact& t2) {
                     for (const auto& d : s.selfdestruct) {
                         if (d.tx_hash != t2.tx_hash) continue;
                         Finding f;
                         f.rule = Rule::ParityWalletHack2;
                         f.tx_hashes = {t1.tx_hash, t2.tx_hash};
                         f.parties = {{"contract", d.contract}, {"destination", d.destination}};
                         f.amount = d.value;
                         f.evidence = {order.key(t1.tx_hash, 0), order.key(t2.tx_hash, 0), order.key(t2.tx_hash, d.step)};
                         heads.offer(std::move(f));
                     }
                 });
}

bool flows(const FactStore& s, const std::string& hash, std::uint64_t from, std::uint64_t to) {
    for (const auto& f : s.data_flow)
        if (f.tx_hash == hash && f.step1 == from && f.step2 == to) return true;
    return false;
}

void integer_overflow(const FactStore& s, const RuleSet& rules, const OrderIndex& order, HeadTable& heads) {
    for (const auto& o : s.opcode) {
        if (!rules.overflow_sources.count(o.op)) continue;
        for (const auto& a : s.arithmetic) {
            if (a.tx_hash != o.tx_hash || a.arithmetic_result == a.evm_result) continue;
            if (!flows(s, o.tx_hash, o.step, a.step)) continue;
            for (const auto& st : s.storage) {
                if (st.tx_hash != o.tx_hash || st.op != "SSTORE" || st.depth != 1) continue;
                if (!flows(s, o.tx_hash, a.step, st.step)) continue;
                for (const auto& e : s.erc20_transfer) {
                    if (e.tx_hash != o.tx_hash || e.value == "0") continue;
                    if (a.operand1 != e.value && a.operand2 != e.value) continue;
                    Finding f;
                    f.rule = Rule::IntegerOverflow;
                    f.tx_hashes = {o.tx_hash};
                    f.parties = {{"from", e.from}, {"to", e.to}, {"contract", e.contract}};
                    f.amount = e.value;
                    f.evidence = {order.key(o.tx_hash, o.step), order.key(o.tx_hash, a.step),
                                  order.key(o.tx_hash, st.step), order.key(o.tx_hash, e.step)};
                    heads.offer(std::move(f));
                }
            }
        }
    }
}

void unhandled_exception(const FactStore& s, const OrderIndex& order, HeadTable& heads) {
    // Lower stratum: used_in_condition is complete before the negation is read.
    std::vector<std::pair<std::string, std::uint64_t>> used;
    for (const auto& c : s.condition)
        for (const auto& f : s.data_flow)
            if (f.tx_hash == c.tx_hash && f.step2 == c.step) used.emplace_back(f.tx_hash, f.step1);

    for (const auto& c : s.call) {
        if (c.op != "CALL" || c.result != 0 || c.value == "0") continue;
        bool handled = false;
        for (const auto& u : used)
            if (u.first == c.tx_hash && u.second == c.step) handled = true;
        if (handled) continue;
        Finding f;
        f.rule = Rule::UnhandledException;
        f.tx_hashes = {c.tx_hash};
        f.parties = {{"caller", c.caller}, {"callee", c.callee}};
        f.amount = c.value;
        f.evidence = {order.key(c.tx_hash, c.step)};
        heads.offer(std::move(f));
    }
}

void short_address(const FactStore& s, const RuleSet& rules, const OrderIndex& order, HeadTable& heads) {
    for (const auto& t : s.transaction) {
        if (t.status != 1) continue;
        const auto bytes = t.input.size() / 2;
        if (!((starts_with(t.input, rules.transfer_signature) && bytes < rules.transfer_min_length) ||
              (starts_with(t.input, rules.transfer_from_signature) && bytes < rules.transfer_from_min_length)))
            continue;
        for (const auto& e : s.erc20_transfer) {
            if (e.tx_hash != t.tx_hash || e.value == "0") continue;
            Finding f;
            f.rule = Rule::ShortAddress;
            f.tx_hashes = {t.tx_hash};
            f.parties = {{"from", e.from}, {"to", e.to}, {"contract", e.contract}};
            f.amount = e.value;
            f.evidence = {order.key(t.tx_hash, 0), order.key(t.tx_hash, e.step)};
            heads.offer(std::move(f));
        }
    }
}

}  // namespace

std::vector<Finding> naive_eval(const RuleSet& rules, const FactStore& store) {
    const OrderIndex order(store);
    HeadTable heads;
    if (rules.on(Rule::Reentrancy)) reentrancy(store, order, heads);
    if (rules.on(Rule::ParityWalletHack1)) parity_1(store, rules, order, heads);
    if (rules.on(Rule::ParityWalletHack2)) parity_2(store, rules, order, heads);
    if (rules.on(Rule::IntegerOverflow)) integer_overflow(store, rules, order, heads);
    if (rules.on(Rule::UnhandledException)) unhandled_exception(store, order, heads);
    if (rules.on(Rule::ShortAddress)) short_address(store, rules, order, heads);
    auto out = heads.take();
    finalize_findings(out, store);
    return out;
}

}  // namespace horus
