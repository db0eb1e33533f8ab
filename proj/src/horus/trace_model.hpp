// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "horus/opcodes.hpp"
#include "horus/word.hpp"

namespace horus {

struct StorageDelta {
    Word index;
    Word value;

    friend bool operator==(const StorageDelta&, const StorageDelta&) = default;
};

/// One executed instruction, reduced to what the analysis needs: no pc, no
/// gas, and only the stack operands and memory bytes the opcode touches.
struct StepRecord {
    std::uint64_t step = 0;
    Opcode op = Opcode::STOP;
    std::uint32_t depth = 1;
    /// Consumed operands, top of stack first; size == pops(op).
    std::vector<Word> stack_top;
    std::optional<Bytes> memory_slice;
    /// SLOAD: (slot, loaded value); SSTORE: (slot, stored value).
    std::optional<StorageDelta> storage_delta;
    /// Set on the record that terminates a failed frame. A call that fails
    /// without opening a frame carries the flag on the call record itself.
    bool error = false;
    /// Wei swept by SELFDESTRUCT.
    std::optional<Word> value;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct ExecutionTrace {
    std::vector<StepRecord> steps;

    bool empty() const { return steps.empty(); }
    std::size_t size() const { return steps.size(); }
    friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

struct TxMeta {
    Hash32 tx_hash;
    std::uint64_t tx_index = 0;
    std::uint64_t block_number = 0;
    Address from;
    Address to;
    Bytes input;
    std::uint64_t gas_used = 0;
    std::uint64_t gas_limit = 0;
    int status = 1;
    BigInt value = 0;
};

struct BlockMeta {
    std::uint64_t block_number = 0;
    std::uint64_t gas_used = 0;
    std::uint64_t gas_limit = 0;
    std::uint64_t timestamp = 0;

    friend bool operator==(const BlockMeta&, const BlockMeta&) = default;
};

struct MetaRecord {
    TxMeta tx;
    BlockMeta block;
};

/// Position of an instruction in global execution order.
struct OrderKey {
    std::uint64_t block_number = 0;
    std::uint64_t tx_index = 0;
    std::uint64_t step = 0;

    friend auto operator<=>(const OrderKey&, const OrderKey&) = default;
};

/// -1, 0 or +1; lexicographic on (block_number, tx_index, step).
int compare_order(const OrderKey& a, const OrderKey& b);

/// Parses a debug_traceTransaction result (optionally wrapped in a JSON-RPC
/// envelope). Memory and stack snapshots are projected to the operands each
/// opcode consumes; failure flags are derived from the pushed call results.
ExecutionTrace parse_geth_trace(std::string_view document);

inline constexpr std::string_view kReducedTraceHeader = "HORUS-TRACE v1";

ExecutionTrace parse_reduced_trace(std::string_view document);
std::string reduce_trace(const ExecutionTrace& trace);

/// Checks step numbering, depth continuity and operand counts.
void validate_trace(const ExecutionTrace& trace);

MetaRecord parse_meta_record(std::string_view json_line);
/// Reads meta.jsonl; blank lines are skipped. Duplicate hashes are rejected.
std::map<Hash32, MetaRecord> load_meta_file(const std::filesystem::path& path);

/// Loads a trace file: `*.json` as a Geth trace, anything else as a
/// reduced trace.
ExecutionTrace load_trace_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace horus
