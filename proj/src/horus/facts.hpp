// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "horus/taint.hpp"
#include "horus/trace_model.hpp"

namespace horus {

// Fact tuples. Value columns are decimal strings, addresses and hashes are
// 0x-prefixed lowercase hex, `input` columns are bare lowercase hex so that
// prefix checks such as substr(input, 0, 8) = "a9059cbb" work verbatim.

struct OpcodeFact {
    std::uint64_t step = 0;
    std::string op;
    std::string tx_hash;
    friend auto operator<=>(const OpcodeFact&, const OpcodeFact&) = default;
};

struct DataFlowFact {
    std::uint64_t step1 = 0;
    std::uint64_t step2 = 0;
    std::string tx_hash;
    friend auto operator<=>(const DataFlowFact&, const DataFlowFact&) = default;
};

struct ArithmeticFact {
    std::uint64_t step = 0;
    std::string op;
    std::string operand1;
    std::string operand2;
    std::string arithmetic_result;  // signed, unbounded
    std::string evm_result;
    std::string tx_hash;
    friend auto operator<=>(const ArithmeticFact&, const ArithmeticFact&) = default;
};

struct StorageFact {
    std::uint64_t step = 0;
    std::string op;
    std::string tx_hash;
    std::string caller;
    std::string contract;
    std::string index;
    std::string value;
    std::uint64_t depth = 0;
    friend auto operator<=>(const StorageFact&, const StorageFact&) = default;
};

struct ConditionFact {
    std::uint64_t step = 0;
    std::string tx_hash;
    friend auto operator<=>(const ConditionFact&, const ConditionFact&) = default;
};

struct Erc20TransferFact {
    std::uint64_t step = 0;
    std::string tx_hash;
    std::string contract;
    std::string from;
    std::string to;
    std::string value;
    friend auto operator<=>(const Erc20TransferFact&, const Erc20TransferFact&) = default;
};

struct CallFact {
    std::uint64_t step = 0;
    std::string tx_hash;
    std::string op;
    std::string caller;
    std::string callee;
    std::string input;
    std::string value;
    std::uint64_t depth = 0;
    std::uint64_t call_id = 0;
    std::uint64_t call_branch = 0;
    std::uint64_t result = 0;
    friend auto operator<=>(const CallFact&, const CallFact&) = default;
};

struct SelfdestructFact {
    std::uint64_t step = 0;
    std::string tx_hash;
    std::string caller;
    std::string contract;
    std::string destination;
    std::string value;
    friend auto operator<=>(const SelfdestructFact&, const SelfdestructFact&) = default;
};

struct BlockFact {
    std::uint64_t block_number = 0;
    std::uint64_t gas_used = 0;
    std::uint64_t gas_limit = 0;
    std::uint64_t timestamp = 0;
    friend auto operator<=>(const BlockFact&, const BlockFact&) = default;
};

struct TransactionFact {
    std::string tx_hash;
    std::uint64_t tx_index = 0;
    std::uint64_t block_number = 0;
    std::string from;
    std::string to;
    std::string input;
    std::uint64_t gas_used = 0;
    std::uint64_t gas_limit = 0;
    std::uint64_t status = 0;
    friend auto operator<=>(const TransactionFact&, const TransactionFact&) = default;
};

struct FactStore {
    std::vector<OpcodeFact> opcode;
    std::vector<DataFlowFact> data_flow;
    std::vector<ArithmeticFact> arithmetic;
    std::vector<StorageFact> storage;
    std::vector<ConditionFact> condition;
    std::vector<Erc20TransferFact> erc20_transfer;
    std::vector<CallFact> call;
    std::vector<SelfdestructFact> selfdestruct;
    std::vector<BlockFact> block;
    std::vector<TransactionFact> transaction;

    /// Appends another store; block rows for the same block are merged.
    void merge(FactStore other);
    /// Sorts every relation by execution order, then column order, and
    /// removes duplicate rows.
    void canonicalize();
    /// (block_number, tx_index) of a transaction, if present.
    std::optional<OrderKey> order_of(std::string_view tx_hash, std::uint64_t step = 0) const;

    friend bool operator==(const FactStore&, const FactStore&) = default;
};

enum class ColumnType { Number, Symbol, Opcode, Address, Hash, Value, SignedValue, Hex };

struct ColumnSchema {
    std::string_view name;
    ColumnType type;
};

struct RelationSchema {
    std::string_view name;
    std::vector<ColumnSchema> columns;
    std::size_t arity() const { return columns.size(); }
};

/// The ten relations, in canonical order.
const std::vector<RelationSchema>& relation_schemas();
const RelationSchema* find_relation(std::string_view name);

struct CallSiteKey {
    std::uint64_t call_id = 0;
    std::uint64_t call_branch = 0;
    friend auto operator<=>(const CallSiteKey&, const CallSiteKey&) = default;
};

/// FNV-1a over the JUMPI outcome sequence, one byte per outcome.
std::uint64_t branch_fingerprint(const std::vector<bool>& outcomes);
CallSiteKey assign_call_site(const FrameHistory& history);

/// keccak256("Transfer(address,address,uint256)")
inline constexpr std::string_view kErc20TransferTopic =
    "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef";

struct DecodedTransfer {
    std::string contract;
    std::string from;
    std::string to;
    std::string value;
};

/// Returns a transfer iff topic0 is the Transfer signature, there are exactly
/// three topics and the data is one 32-byte word. A Transfer with malformed
/// data is skipped and `warning` (when given) explains why.
std::optional<DecodedTransfer> decode_erc20_transfer(const LogEvent& log, std::string* warning = nullptr);

struct ExtractOptions {
    TaintConfig taint;
    StepObserver observer;
    std::vector<std::string>* warnings = nullptr;
};

FactStore extract_facts(const ExecutionTrace& trace, const TxMeta& tx, const BlockMeta& block,
                        const ExtractOptions& options = {});

/// Serializes one relation as Souffle-style TSV.
std::string relation_tsv(const FactStore& store, std::string_view relation);
std::size_t relation_rows(const FactStore& store, std::string_view relation);

/// Writes `<relation>.facts` for all ten relations. The store is written in
/// canonical order. Throws Error(Io) when the directory is unwritable.
void write_fact_files(const FactStore& store, const std::filesystem::path& directory);

/// Reads the ten fact files back. A missing file is an error naming the
/// relation; malformed rows are schema errors naming file and line.
FactStore read_fact_files(const std::filesystem::path& directory);

/// Checks arity and column types of every row of every relation file.
/// Returns one message per problem; empty means valid.
std::vector<std::string> check_fact_files(const std::filesystem::path& directory);

/// Checks the cross-relation invariants of a store.
std::vector<std::string> check_referential_integrity(const FactStore& store);

}  // namespace horus
