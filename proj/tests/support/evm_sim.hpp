// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// A concrete mini-EVM for authoring fixture traces. It executes the
// instructions a test spells out (straight-line; jumps do not move the
// cursor) and records structLog entries exactly as a Geth tracer with
// memory enabled would: the full stack, bottom first, and the memory before
// each instruction executes.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "horus/opcodes.hpp"
#include "horus/trace_model.hpp"
#include "horus/word.hpp"

namespace horus::testing {

/// Address derived from a tag: low 20 bytes of keccak256(tag).
Address tagged_address(std::string_view tag);
/// 32-byte hash derived from a tag.
Hash32 tagged_hash(std::string_view tag);
Word word_of(const Address& a);

enum class CallMode {
    Enter,         // callee code runs in a new frame
    SucceedNoFrame,  // precompile or account without code
    FailNoFrame,   // e.g. insufficient balance
};

class TraceBuilder {
public:
    TraceBuilder(Address origin, Address to, Bytes calldata, Word value = Word{});

    /// Presets a storage slot before the transaction runs.
    TraceBuilder& storage(const Address& contract, const Word& slot, const Word& value);

    TraceBuilder& push(const Word& v);
    TraceBuilder& op(Opcode op);
    TraceBuilder& dup(int n);
    TraceBuilder& swap(int n);

    TraceBuilder& calldataload(std::uint64_t offset);
    TraceBuilder& calldatacopy(std::uint64_t dest, std::uint64_t offset, std::uint64_t size);
    TraceBuilder& mstore(std::uint64_t offset, const Word& value);
    TraceBuilder& sload(const Word& slot);
    /// SSTORE of the word on top of the stack into `slot`.
    TraceBuilder& sstore_top(const Word& slot);
    TraceBuilder& sstore(const Word& slot, const Word& value);
    /// JUMPI on the word on top of the stack.
    TraceBuilder& jumpi_top();
    /// Pushes the seven CALL operands and executes CALL.
    TraceBuilder& call(const Address& to, const Word& value, std::uint64_t in_offset, std::uint64_t in_size,
                       std::uint64_t out_offset, std::uint64_t out_size, CallMode mode);
    TraceBuilder& call_op(Opcode op, const Address& to, const Word& value, std::uint64_t in_offset,
                          std::uint64_t in_size, std::uint64_t out_offset, std::uint64_t out_size, CallMode mode);
    /// Writes data word 0 and emits LOG3 Transfer(from, to, amount).
    TraceBuilder& transfer_event(const Address& from, const Address& to, const Word& amount);
    TraceBuilder& stop();
    TraceBuilder& ret(std::uint64_t offset, std::uint64_t size);
    TraceBuilder& revert(std::uint64_t offset, std::uint64_t size);
    TraceBuilder& selfdestruct(const Address& beneficiary, const Word& swept);

    std::size_t steps() const { return logs_.size(); }
    /// Step number of the most recently emitted instruction.
    std::uint64_t last_step() const { return logs_.size() - 1; }
    std::size_t depth() const { return frames_.size(); }
    const std::vector<Word>& stack() const { return frames_.back().stack; }
    bool finished() const { return frames_.empty(); }

    nlohmann::ordered_json geth() const;
    std::string geth_json() const { return geth().dump(); }
    ExecutionTrace trace() const { return parse_geth_trace(geth_json()); }

private:
    struct Frame {
        Address contract;
        Address caller;
        Bytes calldata;
        Word value;
        std::vector<Word> stack;
        Bytes memory;
        std::uint64_t out_offset = 0;
        std::uint64_t out_size = 0;
        std::map<std::pair<Address, Word>, Word> storage_snapshot;
    };

    Frame& top() { return frames_.back(); }
    Word pop();
    void touch(std::uint64_t offset, std::uint64_t size);
    void record(Opcode op, nlohmann::ordered_json extra = {});
    void exit_frame(bool success, Bytes returned);

    std::vector<Frame> frames_;
    std::map<std::pair<Address, Word>, Word> storage_;
    std::vector<nlohmann::ordered_json> logs_;
    bool failed_ = false;
};

struct MetaFields {
    Hash32 tx_hash;
    std::uint64_t tx_index = 0;
    std::uint64_t block_number = 0;
    Address from;
    Address to;
    Bytes input;
    std::uint64_t gas_used = 50000;
    std::uint64_t gas_limit = 100000;
    int status = 1;
    std::string value = "0";
};

/// Block timestamps used by every fixture: 1500000000 + 15 * block.
std::uint64_t block_timestamp(std::uint64_t block);
/// One meta.jsonl line (no trailing newline).
std::string meta_line(const MetaFields& m);

/// 4-byte selector followed by 32-byte words.
Bytes abi_call(std::string_view selector_hex, const std::vector<Word>& args);

}  // namespace horus::testing
