// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "horus/opcodes.hpp"
#include "horus/trace_model.hpp"
#include "horus/word.hpp"

namespace horus {

/// Set of origin steps carried by one shadow byte. Holds at most kCapacity
/// labels; past that it becomes saturated and contains() answers true for
/// every step.
class LabelSet {
public:
    static constexpr std::size_t kCapacity = 256;

    LabelSet() = default;
    LabelSet(std::initializer_list<std::uint32_t> labels);

    bool empty() const { return labels_.empty() && !saturated_; }
    bool saturated() const { return saturated_; }
    bool contains(std::uint32_t step) const;
    std::span<const std::uint32_t> labels() const { return labels_; }

    void insert(std::uint32_t step);
    void merge(const LabelSet& other);

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    std::vector<std::uint32_t> labels_;  // sorted, unique
    bool saturated_ = false;
};

/// Shadow of a 256-bit word: index 0 is the most significant byte.
using TaintWord = std::array<LabelSet, 32>;

TaintWord uniform_taint(const LabelSet& labels);
LabelSet union_of(const TaintWord& word);

/// Sparse byte-addressed shadow memory; absent bytes are untainted.
class ShadowMemory {
public:
    const LabelSet& at(std::uint64_t address) const;
    void set(std::uint64_t address, LabelSet labels);
    void fill(std::uint64_t offset, std::uint64_t size, const LabelSet& labels);
    LabelSet union_range(std::uint64_t offset, std::uint64_t size) const;
    /// Number of bytes carrying at least one label.
    std::size_t tainted_bytes() const { return bytes_.size(); }
    const std::map<std::uint64_t, LabelSet>& bytes() const { return bytes_; }

private:
    std::map<std::uint64_t, LabelSet> bytes_;
};

using StorageKey = std::pair<Address, Word>;

struct Frame {
    Address contract;  // storage owner / executing account
    Address sender;    // msg.sender of the frame
    std::vector<TaintWord> stack;
    ShadowMemory memory;

    std::uint64_t executed = 0;  // instructions executed in this frame so far
    std::vector<bool> branches;  // JUMPI outcomes taken in this frame so far

    // Bookkeeping for the instruction that opened this frame.
    std::optional<std::size_t> call_event;
    std::uint64_t opener_step = 0;
    std::uint64_t out_offset = 0;
    std::uint64_t out_size = 0;
    LabelSet return_labels;
    std::uint64_t return_size = 0;
    bool last_error = false;
};

struct TaintState {
    std::vector<Frame> frames;
    std::map<StorageKey, TaintWord> storage;
    std::map<StorageKey, TaintWord> transient;
    LabelSet returndata;

    Frame& top() { return frames.back(); }
    const Frame& top() const { return frames.back(); }
};

struct TaintConfig {
    /// Instructions that introduce untrusted data.
    std::set<Opcode> sources{Opcode::CALLDATALOAD, Opcode::CALLDATACOPY};
    /// data_flow(s1, s2) is emitted only when op(s1) is a producer and
    /// op(s2) is a consumer.
    std::set<Opcode> flow_producers{Opcode::CALLDATALOAD, Opcode::CALLDATACOPY, Opcode::ADD,
                                    Opcode::SUB,          Opcode::MUL,          Opcode::CALL,
                                    Opcode::CALLCODE,     Opcode::DELEGATECALL, Opcode::STATICCALL};
    std::set<Opcode> flow_consumers{Opcode::ADD,      Opcode::SUB,          Opcode::MUL,
                                    Opcode::SSTORE,   Opcode::JUMPI,        Opcode::CALL,
                                    Opcode::CALLCODE, Opcode::DELEGATECALL, Opcode::STATICCALL};
};

struct ArithObservation {
    std::uint64_t step = 0;
    Opcode op = Opcode::ADD;
    Word operand1;  // top of stack
    Word operand2;
    BigInt wide_result;
    Word evm_result;

    bool overflowed() const { return wide_result != evm_result.to_bigint(); }
};

/// ADD, SUB or MUL evaluated both in unbounded integers and mod 2^256.
ArithObservation checked_arith(Opcode op, const Word& a, const Word& b);

struct StorageEvent {
    std::uint64_t step = 0;
    Opcode op = Opcode::SLOAD;
    Address caller;
    Address contract;
    Word index;
    Word value;
    std::uint32_t depth = 1;
};

struct FrameHistory {
    std::uint64_t position = 0;  // instructions the frame executed before the call
    std::vector<bool> branches;  // JUMPI outcomes taken before the call
};

struct CallEvent {
    std::uint64_t step = 0;
    Opcode op = Opcode::CALL;
    Address caller;
    Address callee;
    Bytes input;
    Word value;
    std::uint32_t depth = 1;
    bool success = true;
    FrameHistory history;
};

struct LogEvent {
    std::uint64_t step = 0;
    Address contract;
    std::vector<Word> topics;
    Bytes data;
};

struct ConditionEvent {
    std::uint64_t step = 0;
    bool taken = false;
};

struct SelfdestructEvent {
    std::uint64_t step = 0;
    Address caller;
    Address contract;
    Address destination;
    Word value;
};

struct DataFlow {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    friend auto operator<=>(const DataFlow&, const DataFlow&) = default;
};

struct ReplayEvents {
    std::vector<ArithObservation> arithmetic;
    std::vector<StorageEvent> storage;
    std::vector<CallEvent> calls;
    std::vector<LogEvent> logs;
    std::vector<ConditionEvent> conditions;
    std::vector<SelfdestructEvent> selfdestructs;
    std::vector<DataFlow> data_flows;  // sorted, unique
};

/// Called after every step with the record and the post-step state.
using StepObserver = std::function<void(const StepRecord&, const TaintState&)>;

/// Replays a transaction through the shadow machine. Throws
/// Error(Integrity) if the trace is inconsistent with opcode arity or frame
/// structure.
ReplayEvents replay(const ExecutionTrace& trace, const TxMeta& meta, const TaintConfig& config = {},
                    const StepObserver& observer = {});

/// Applies one instruction's taint semantics to the top frame. Frame entry
/// and exit are handled by replay(); for call and create instructions only
/// the operands are consumed here. Returns the union of every consumed label.
LabelSet propagate(const StepRecord& record, TaintState& state, const TaintConfig& config = {});

/// Tags the values produced by a source instruction with the current step.
/// Expects the operands to be consumed already (and, for CALLDATALOAD, the
/// result word pushed).
void introduce_sources(const StepRecord& record, TaintState& state);

std::string dump_taint_state(const StepRecord& record, const TaintState& state);

}  // namespace horus
