// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "horus/detectors.hpp"

namespace horus::detail {

class OrderIndex {
public:
    explicit OrderIndex(const FactStore& store);
    OrderKey key(const std::string& hash, std::uint64_t step) const;

private:
    std::unordered_map<std::string, const TransactionFact*> txs;
};

bool precedes(const TransactionFact& a, const TransactionFact& b);
bool has_prefix(const std::string& input, const std::string& signature);

/// Collapses derivations with the same head, keeping the smallest evidence.
class HeadTable {
public:
    void offer(Finding f);
    std::vector<Finding> take();

private:
    using Key = std::tuple<Rule, std::vector<std::string>, std::string, std::optional<std::uint64_t>, std::vector<Party>>;
    std::map<Key, Finding> heads;
};

}  // namespace horus::detail
