// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "horus/facts.hpp"

namespace horus {

enum class Rule {
    Reentrancy,
    ParityWalletHack1,
    ParityWalletHack2,
    IntegerOverflow,
    UnhandledException,
    ShortAddress,
};

inline constexpr Rule kAllRules[] = {Rule::Reentrancy,      Rule::ParityWalletHack1,  Rule::ParityWalletHack2,
                                     Rule::IntegerOverflow, Rule::UnhandledException, Rule::ShortAddress};

std::string_view rule_name(Rule rule);
std::optional<Rule> rule_from_name(std::string_view name);

struct Party {
    std::string role;  // caller, callee, from, to, contract, destination
    std::string address;
    friend auto operator<=>(const Party&, const Party&) = default;
};

/// Sender of an adversarial transaction, used to seed fund tracing.
struct Sender {
    std::string address;
    std::uint64_t timestamp = 0;
    std::string tx_hash;
    friend auto operator<=>(const Sender&, const Sender&) = default;
};

struct Finding {
    Rule rule = Rule::Reentrancy;
    std::vector<std::string> tx_hashes;
    std::vector<Party> parties;
    std::string amount;
    std::optional<std::uint64_t> depth;  // Reentrancy head only
    /// Order keys of the matched facts of the smallest derivation.
    std::vector<OrderKey> evidence;
    std::vector<Sender> senders;

    /// Address of a party by role, empty if absent.
    std::string party(std::string_view role) const;
    /// The victim contract counted in summaries.
    std::string attacked_contract() const;

    friend auto operator<=>(const Finding&, const Finding&) = default;
};

struct RuleSet {
    std::set<Rule> enabled{std::begin(kAllRules), std::end(kAllRules)};

    std::string init_wallet_signature = "e46dcfeb";
    std::string execute_signature = "b61d27f6";
    std::string kill_signature = "cbf0b0c0";
    std::string transfer_signature = "a9059cbb";
    std::string transfer_from_signature = "23b872dd";
    std::uint64_t transfer_min_length = 68;
    std::uint64_t transfer_from_min_length = 100;
    std::set<std::string> overflow_sources{"CALLDATALOAD", "CALLDATACOPY"};

    /// Parses "all" or a comma-separated list of rule names.
    static RuleSet parse(std::string_view spec);
    /// Throws Error(Validation) if a signature is not 8 lowercase hex digits.
    void validate() const;
    bool on(Rule r) const { return enabled.count(r) != 0; }
};

using ConditionUses = std::set<std::pair<std::string, std::uint64_t>>;

/// (tx_hash, step) pairs whose value flows into some JUMPI of the same
/// transaction.
ConditionUses used_in_condition(const FactStore& store);
bool used_in_condition(std::uint64_t step, std::string_view tx_hash, const FactStore& store);

std::vector<Finding> detect_reentrancy(const FactStore& store);
std::vector<Finding> detect_parity_1(const FactStore& store, const RuleSet& rules = {});
std::vector<Finding> detect_parity_2(const FactStore& store, const RuleSet& rules = {});
std::vector<Finding> detect_integer_overflow(const FactStore& store, const RuleSet& rules = {});
std::vector<Finding> detect_unhandled_exception(const FactStore& store);
std::vector<Finding> detect_short_address(const FactStore& store, const RuleSet& rules = {});

/// Runs every enabled rule; rules evaluate in parallel when `parallel`.
std::vector<Finding> detect_all(const FactStore& store, const RuleSet& rules = {}, bool parallel = true);

/// Nested-loop evaluation of the same rules without indexes.
std::vector<Finding> naive_eval(const RuleSet& rules, const FactStore& store);

/// Attaches senders and sorts by rule, first evidence key, then content.
void finalize_findings(std::vector<Finding>& findings, const FactStore& store);

std::string findings_to_json(const std::vector<Finding>& findings);
std::vector<Finding> findings_from_json(std::string_view document);
std::string findings_to_csv(const std::vector<Finding>& findings);

struct RuleSummary {
    std::string rule;
    std::size_t contracts = 0;
    std::size_t transactions = 0;
};

/// One row per rule in `rules` order, then a "Total Unique" row.
std::vector<RuleSummary> summarize(const std::vector<Finding>& findings, const RuleSet& rules = {});
std::string format_summary(const std::vector<RuleSummary>& rows);

}  // namespace horus
