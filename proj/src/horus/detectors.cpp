// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/detectors.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <json.hpp>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "horus/errors.hpp"
#include "horus/detectors_internal.hpp"

namespace horus {

using json = nlohmann::ordered_json;

std::string_view rule_name(Rule rule) {
    switch (rule) {
        case Rule::Reentrancy: return "Reentrancy";
        case Rule::ParityWalletHack1: return "ParityWalletHack1";
        case Rule::ParityWalletHack2: return "ParityWalletHack2";
        case Rule::IntegerOverflow: return "IntegerOverflow";
        case Rule::UnhandledException: return "UnhandledException";
        case Rule::ShortAddress: return "ShortAddress";
    }
    return "?";
}

std::optional<Rule> rule_from_name(std::string_view name) {
    for (auto r : kAllRules)
        if (rule_name(r) == name) return r;
    return std::nullopt;
}

std::string Finding::party(std::string_view role) const {
    for (const auto& p : parties)
        if (p.role == role) return p.address;
    return {};
}

std::string Finding::attacked_contract() const {
    switch (rule) {
        case Rule::Reentrancy:
        case Rule::ParityWalletHack1:
        case Rule::UnhandledException:
            return party("caller");
        case Rule::ParityWalletHack2:
        case Rule::IntegerOverflow:
        case Rule::ShortAddress:
            return party("contract");
    }
    return {};
}

RuleSet RuleSet::parse(std::string_view spec) {
    RuleSet rs;
    if (spec.empty() || spec == "all") return rs;
    rs.enabled.clear();
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        auto comma = spec.find(',', pos);
        if (comma == std::string_view::npos) comma = spec.size();
        const auto name = spec.substr(pos, comma - pos);
        const auto rule = rule_from_name(name);
        if (!rule) throw validation_error("unknown rule '" + std::string(name) + "'");
        rs.enabled.insert(*rule);
        pos = comma + 1;
    }
    return rs;
}

void RuleSet::validate() const {
    for (const auto* sig : {&init_wallet_signature, &execute_signature, &kill_signature, &transfer_signature,
                            &transfer_from_signature}) {
        const bool ok = sig->size() == 8 && std::all_of(sig->begin(), sig->end(), [](char c) {
                            return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                        });
        if (!ok) throw validation_error("signature '" + *sig + "' is not 8 lowercase hex digits");
    }
    if (transfer_min_length == 0 || transfer_from_min_length == 0)
        throw validation_error("input length thresholds must be positive");
}

namespace detail {

OrderIndex::OrderIndex(const FactStore& store) {
    for (const auto& t : store.transaction) txs.emplace(t.tx_hash, &t);
}

OrderKey OrderIndex::key(const std::string& hash, std::uint64_t step) const {
    auto it = txs.find(hash);
    if (it == txs.end()) return {~0ULL, ~0ULL, step};
    return {it->second->block_number, it->second->tx_index, step};
}

bool precedes(const TransactionFact& a, const TransactionFact& b) {
    return a.block_number < b.block_number || (a.block_number == b.block_number && a.tx_index < b.tx_index);
}

bool has_prefix(const std::string& input, const std::string& signature) {
    return input.size() >= 8 && input.compare(0, 8, signature) == 0;
}

void HeadTable::offer(Finding f) {
    auto key = std::make_tuple(f.rule, f.tx_hashes, f.amount, f.depth, f.parties);
    // The token contract of these two rules is not part of the head; it is
    // taken from the winning derivation.
    if (f.rule == Rule::IntegerOverflow || f.rule == Rule::ShortAddress)
        std::erase_if(std::get<4>(key), [](const Party& p) { return p.role == "contract"; });
    auto it = heads.find(key);
    if (it == heads.end())
        heads.emplace(std::move(key), std::move(f));
    else if (f.evidence < it->second.evidence)
        it->second = std::move(f);
}

std::vector<Finding> HeadTable::take() {
    std::vector<Finding> out;
    out.reserve(heads.size());
    for (auto& [k, f] : heads) out.push_back(std::move(f));
    return out;
}

}  // namespace detail

using detail::HeadTable;
using detail::OrderIndex;

ConditionUses used_in_condition(const FactStore& store) {
    std::set<std::pair<std::string, std::uint64_t>> conditions;
    for (const auto& c : store.condition) conditions.emplace(c.tx_hash, c.step);
    ConditionUses out;
    for (const auto& f : store.data_flow)
        if (conditions.count({f.tx_hash, f.step2})) out.emplace(f.tx_hash, f.step1);
    return out;
}

bool used_in_condition(std::uint64_t step, std::string_view tx_hash, const FactStore& store) {
    return used_in_condition(store).count({std::string(tx_hash), step}) != 0;
}

std::vector<Finding> detect_reentrancy(const FactStore& store) {
    using FrameKey = std::tuple<std::string, std::string, std::uint64_t>;  // hash, contract, depth
    std::map<FrameKey, std::vector<const StorageFact*>> loads, stores;
    for (const auto& s : store.storage) {
        if (s.op == "SLOAD") loads[{s.tx_hash, s.contract, s.depth}].push_back(&s);
        if (s.op == "SSTORE") stores[{s.tx_hash, s.contract, s.depth}].push_back(&s);
    }
    using SiteKey = std::tuple<std::string, std::string, std::string, std::uint64_t, std::uint64_t>;
    std::map<SiteKey, std::vector<const CallFact*>> sites;
    for (const auto& c : store.call)
        if (c.result == 1) sites[{c.tx_hash, c.caller, c.callee, c.call_id, c.call_branch}].push_back(&c);

    const OrderIndex order(store);
    HeadTable heads;
    for (const auto& [site, calls] : sites) {
        for (const auto* c2 : calls) {
            const FrameKey frame{c2->tx_hash, c2->caller, c2->depth};
            auto l = loads.find(frame);
            auto s = stores.find(frame);
            if (l == loads.end() || s == stores.end()) continue;
            for (const auto* c3 : calls) {
                if (c2->depth >= c3->depth || c3->value == "0") continue;
                std::map<std::string, std::uint64_t> first_store;  // index -> min step4 after c3
                for (const auto* st : s->second)
                    if (st->step > c3->step) {
                        auto [it, fresh] = first_store.emplace(st->index, st->step);
                        if (!fresh) it->second = std::min(it->second, st->step);
                    }
                std::optional<std::pair<std::uint64_t, std::uint64_t>> best;
                for (const auto* ld : l->second) {
                    if (ld->step >= c2->step) continue;
                    auto it = first_store.find(ld->index);
                    if (it == first_store.end()) continue;
                    std::pair<std::uint64_t, std::uint64_t> cand{ld->step, it->second};
                    if (!best || cand < *best) best = cand;
                }
                if (!best) continue;
                Finding f;
                f.rule = Rule::Reentrancy;
                f.tx_hashes = {c2->tx_hash};
                f.parties = {{"caller", c2->caller}, {"callee", c2->callee}};
                f.amount = c3->value;
                f.depth = c3->depth;
                f.evidence = {order.key(c2->tx_hash, best->first), order.key(c2->tx_hash, c2->step),
                              order.key(c2->tx_hash, c3->step), order.key(c2->tx_hash, best->second)};
                heads.offer(std::move(f));
            }
        }
    }
    return heads.take();
}

namespace {

using PairKey = std::pair<std::string, std::string>;

std::map<PairKey, std::vector<const TransactionFact*>> initializers(const FactStore& store, const RuleSet& rules) {
    std::map<PairKey, std::vector<const TransactionFact*>> out;
    for (const auto& t : store.transaction)
        if (t.status == 1 && detail::has_prefix(t.input, rules.init_wallet_signature))
            out[{t.from, t.to}].push_back(&t);
    return out;
}

}  // namespace

std::vector<Finding> detect_parity_1(const FactStore& store, const RuleSet& rules) {
    const auto inits = initializers(store, rules);
    std::map<std::string, std::vector<const CallFact*>> calls;
    for (const auto& c : store.call)
        if (c.op == "CALL" && c.depth == 1) calls[c.tx_hash].push_back(&c);
    const OrderIndex order(store);
    HeadTable heads;
    for (const auto& t2 : store.transaction) {
        if (t2.status != 1 || !detail::has_prefix(t2.input, rules.execute_signature)) continue;
        auto i = inits.find({t2.from, t2.to});
        auto c = calls.find(t2.tx_hash);
        if (i == inits.end() || c == calls.end()) continue;
        for (const auto* t1 : i->second) {
            if (!detail::precedes(*t1, t2)) continue;
            for (const auto* call : c->second) {
                Finding f;
                f.rule = Rule::ParityWalletHack1;
                f.tx_hashes = {t1->tx_hash, t2.tx_hash};
                f.parties = {{"caller", call->caller}, {"callee", call->callee}};
                f.amount = call->value;
                f.evidence = {order.key(t1->tx_hash, 0), order.key(t2.tx_hash, 0), order.key(t2.tx_hash, call->step)};
                heads.offer(std::move(f));
            }
        }
    }
    return heads.take();
}

std::vector<Finding> detect_parity_2(const FactStore& store, const RuleSet& rules) {
    const auto inits = initializers(store, rules);
    std::map<std::string, std::vector<const SelfdestructFact*>> kills;
    for (const auto& d : store.selfdestruct) kills[d.tx_hash].push_back(&d);
    const OrderIndex order(store);
    HeadTable heads;
    for (const auto& t2 : store.transaction) {
        if (t2.status != 1 || !detail::has_prefix(t2.input, rules.kill_signature)) continue;
        auto i = inits.find({t2.from, t2.to});
        auto k = kills.find(t2.tx_hash);
        if (i == inits.end() || k == kills.end()) continue;
        for (const auto* t1 : i->second) {
            if (!detail::precedes(*t1, t2)) continue;
            for (const auto* d : k->second) {
                Finding f;
                f.rule = Rule::ParityWalletHack2;
                f.tx_hashes = {t1->tx_hash, t2.tx_hash};
                f.parties = {{"contract", d->contract}, {"destination", d->destination}};
                f.amount = d->value;
                f.evidence = {order.key(t1->tx_hash, 0), order.key(t2.tx_hash, 0), order.key(t2.tx_hash, d->step)};
                heads.offer(std::move(f));
            }
        }
    }
    return heads.take();
}

std::vector<Finding> detect_integer_overflow(const FactStore& store, const RuleSet& rules) {
    using StepKey = std::pair<std::string, std::uint64_t>;
    std::set<StepKey> sources, sinks;
    for (const auto& o : store.opcode)
        if (rules.overflow_sources.count(o.op)) sources.emplace(o.tx_hash, o.step);
    for (const auto& s : store.storage)
        if (s.op == "SSTORE" && s.depth == 1) sinks.emplace(s.tx_hash, s.step);
    std::map<StepKey, std::vector<std::uint64_t>> into, out_of;
    for (const auto& f : store.data_flow) {
        into[{f.tx_hash, f.step2}].push_back(f.step1);
        out_of[{f.tx_hash, f.step1}].push_back(f.step2);
    }
    std::map<std::string, std::vector<const Erc20TransferFact*>> transfers;
    for (const auto& e : store.erc20_transfer)
        if (e.value != "0") transfers[e.tx_hash].push_back(&e);

    auto min_step = [](const std::map<StepKey, std::vector<std::uint64_t>>& edges, const StepKey& at,
                       const std::set<StepKey>& accept) -> std::optional<std::uint64_t> {
        auto it = edges.find(at);
        if (it == edges.end()) return std::nullopt;
        std::optional<std::uint64_t> best;
        for (auto s : it->second)
            if (accept.count({at.first, s}) && (!best || s < *best)) best = s;
        return best;
    };

    const OrderIndex order(store);
    HeadTable heads;
    for (const auto& a : store.arithmetic) {
        if (a.arithmetic_result == a.evm_result) continue;
        auto t = transfers.find(a.tx_hash);
        if (t == transfers.end()) continue;
        const StepKey at{a.tx_hash, a.step};
        const auto s1 = min_step(into, at, sources);
        if (!s1) continue;
        const auto s3 = min_step(out_of, at, sinks);
        if (!s3) continue;
        for (const auto* e : t->second) {
            if (e->value != a.operand1 && e->value != a.operand2) continue;
            Finding f;
            f.rule = Rule::IntegerOverflow;
            f.tx_hashes = {a.tx_hash};
            f.parties = {{"from", e->from}, {"to", e->to}, {"contract", e->contract}};
            f.amount = e->value;
            f.evidence = {order.key(a.tx_hash, *s1), order.key(a.tx_hash, a.step), order.key(a.tx_hash, *s3),
                          order.key(a.tx_hash, e->step)};
            heads.offer(std::move(f));
        }
    }
    return heads.take();
}

std::vector<Finding> detect_unhandled_exception(const FactStore& store) {
    const auto used = used_in_condition(store);
    const OrderIndex order(store);
    HeadTable heads;
    for (const auto& c : store.call) {
        if (c.op != "CALL" || c.result != 0 || c.value == "0") continue;
        if (used.count({c.tx_hash, c.step})) continue;
        Finding f;
        f.rule = Rule::UnhandledException;
        f.tx_hashes = {c.tx_hash};
        f.parties = {{"caller", c.caller}, {"callee", c.callee}};
        f.amount = c.value;
        f.evidence = {order.key(c.tx_hash, c.step)};
        heads.offer(std::move(f));
    }
    return heads.take();
}

std::vector<Finding> detect_short_address(const FactStore& store, const RuleSet& rules) {
    std::map<std::string, std::vector<const Erc20TransferFact*>> transfers;
    for (const auto& e : store.erc20_transfer)
        if (e.value != "0") transfers[e.tx_hash].push_back(&e);
    const OrderIndex order(store);
    HeadTable heads;
    for (const auto& t : store.transaction) {
        if (t.status != 1) continue;
        const auto length = t.input.size() / 2;
        const bool short_transfer = detail::has_prefix(t.input, rules.transfer_signature) && length < rules.transfer_min_length;
        const bool short_transfer_from =
            detail::has_prefix(t.input, rules.transfer_from_signature) && length < rules.transfer_from_min_length;
        if (!short_transfer && !short_transfer_from) continue;
        auto it = transfers.find(t.tx_hash);
        if (it == transfers.end()) continue;
        for (const auto* e : it->second) {
            Finding f;
            f.rule = Rule::ShortAddress;
            f.tx_hashes = {t.tx_hash};
            f.parties = {{"from", e->from}, {"to", e->to}, {"contract", e->contract}};
            f.amount = e->value;
            f.evidence = {order.key(t.tx_hash, 0), order.key(t.tx_hash, e->step)};
            heads.offer(std::move(f));
        }
    }
    return heads.take();
}

std::vector<Finding> detect_all(const FactStore& store, const RuleSet& rules, bool parallel) {
    rules.validate();
    auto run = [&](Rule r) -> std::vector<Finding> {
        switch (r) {
            case Rule::Reentrancy: return detect_reentrancy(store);
            case Rule::ParityWalletHack1: return detect_parity_1(store, rules);
            case Rule::ParityWalletHack2: return detect_parity_2(store, rules);
            case Rule::IntegerOverflow: return detect_integer_overflow(store, rules);
            case Rule::UnhandledException: return detect_unhandled_exception(store);
            case Rule::ShortAddress: return detect_short_address(store, rules);
        }
        return {};
    };
    std::vector<Finding> all;
    if (parallel) {
        std::vector<std::future<std::vector<Finding>>> jobs;
        for (auto r : rules.enabled) jobs.push_back(std::async(std::launch::async, run, r));
        for (auto& j : jobs) {
            auto part = j.get();
            std::move(part.begin(), part.end(), std::back_inserter(all));
        }
    } else {
        for (auto r : rules.enabled) {
            auto part = run(r);
            std::move(part.begin(), part.end(), std::back_inserter(all));
        }
    }
    finalize_findings(all, store);
    return all;
}

void finalize_findings(std::vector<Finding>& findings, const FactStore& store) {
    std::unordered_map<std::string, const TransactionFact*> txs;
    for (const auto& t : store.transaction) txs.emplace(t.tx_hash, &t);
    std::map<std::uint64_t, std::uint64_t> timestamps;
    for (const auto& b : store.block) timestamps.emplace(b.block_number, b.timestamp);
    for (auto& f : findings) {
        f.senders.clear();
        for (const auto& h : f.tx_hashes) {
            auto it = txs.find(h);
            if (it == txs.end()) continue;
            auto ts = timestamps.find(it->second->block_number);
            f.senders.push_back({it->second->from, ts == timestamps.end() ? 0 : ts->second, h});
        }
    }
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        const auto ka = a.evidence.empty() ? OrderKey{} : a.evidence.front();
        const auto kb = b.evidence.empty() ? OrderKey{} : b.evidence.front();
        return std::tie(a.rule, ka, a) < std::tie(b.rule, kb, b);
    });
}

std::string findings_to_json(const std::vector<Finding>& findings) {
    json arr = json::array();
    for (const auto& f : findings) {
        json j;
        j["rule"] = rule_name(f.rule);
        j["tx_hashes"] = f.tx_hashes;
        json parties = json::object();
        for (const auto& p : f.parties) parties[p.role] = p.address;
        j["parties"] = parties;
        j["amount"] = f.amount;
        if (f.depth) j["depth"] = *f.depth;
        json ev = json::array();
        for (const auto& k : f.evidence) ev.push_back(json::array({k.block_number, k.tx_index, k.step}));
        j["evidence"] = ev;
        json senders = json::array();
        for (const auto& s : f.senders)
            senders.push_back({{"address", s.address}, {"timestamp", s.timestamp}, {"tx_hash", s.tx_hash}});
        j["senders"] = senders;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<Finding> findings_from_json(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("findings: ") + e.what());
    }
    if (!doc.is_array()) throw schema_error("findings: expected a JSON array");
    std::vector<Finding> out;
    try {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const auto& j = doc[i];
            Finding f;
            const auto name = j.at("rule").get<std::string>();
            const auto rule = rule_from_name(name);
            if (!rule) throw schema_error("findings[" + std::to_string(i) + "]: unknown rule '" + name + "'");
            f.rule = *rule;
            f.tx_hashes = j.at("tx_hashes").get<std::vector<std::string>>();
            for (const auto& [role, addr] : j.at("parties").items()) f.parties.push_back({role, addr.get<std::string>()});
            f.amount = j.at("amount").get<std::string>();
            if (j.contains("depth")) f.depth = j["depth"].get<std::uint64_t>();
            for (const auto& k : j.at("evidence"))
                f.evidence.push_back({k.at(0).get<std::uint64_t>(), k.at(1).get<std::uint64_t>(),
                                      k.at(2).get<std::uint64_t>()});
            if (j.contains("senders"))
                for (const auto& s : j["senders"])
                    f.senders.push_back({s.at("address").get<std::string>(), s.at("timestamp").get<std::uint64_t>(),
                                         s.at("tx_hash").get<std::string>()});
            out.push_back(std::move(f));
        }
    } catch (const json::exception& e) {
        throw schema_error(std::string("findings: ") + e.what());
    }
    return out;
}

std::string findings_to_csv(const std::vector<Finding>& findings) {
    std::ostringstream out;
    out << "rule,tx_hashes,caller,callee,from,to,contract,destination,amount,depth,block_number,tx_index,step\n";
    for (const auto& f : findings) {
        std::string hashes;
        for (const auto& h : f.tx_hashes) hashes += (hashes.empty() ? "" : ";") + h;
        const auto first = f.evidence.empty() ? OrderKey{} : f.evidence.front();
        out << rule_name(f.rule) << ',' << hashes << ',' << f.party("caller") << ',' << f.party("callee") << ','
            << f.party("from") << ',' << f.party("to") << ',' << f.party("contract") << ','
            << f.party("destination") << ',' << f.amount << ',' << (f.depth ? std::to_string(*f.depth) : "") << ','
            << first.block_number << ',' << first.tx_index << ',' << first.step << '\n';
    }
    return out.str();
}

std::vector<RuleSummary> summarize(const std::vector<Finding>& findings, const RuleSet& rules) {
    std::vector<RuleSummary> rows;
    std::set<std::string> all_contracts, all_txs;
    for (auto r : kAllRules) {
        if (!rules.on(r)) continue;
        std::set<std::string> contracts, txs;
        for (const auto& f : findings) {
            if (f.rule != r) continue;
            contracts.insert(f.attacked_contract());
            txs.insert(f.tx_hashes.begin(), f.tx_hashes.end());
        }
        all_contracts.insert(contracts.begin(), contracts.end());
        all_txs.insert(txs.begin(), txs.end());
        rows.push_back({std::string(rule_name(r)), contracts.size(), txs.size()});
    }
    rows.push_back({"Total Unique", all_contracts.size(), all_txs.size()});
    return rows;
}

std::string format_summary(const std::vector<RuleSummary>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.rule + ": " + std::to_string(r.contracts) + (r.contracts == 1 ? " contract, " : " contracts, ") +
               std::to_string(r.transactions) + (r.transactions == 1 ? " transaction\n" : " transactions\n");
    }
    return out;
}

}  // namespace horus
