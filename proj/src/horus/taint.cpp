// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/taint.hpp"

#include <algorithm>
#include <sstream>

#include "horus/errors.hpp"

namespace horus {

LabelSet::LabelSet(std::initializer_list<std::uint32_t> labels) {
    for (auto l : labels) insert(l);
}

bool LabelSet::contains(std::uint32_t step) const {
    return saturated_ || std::binary_search(labels_.begin(), labels_.end(), step);
}

void LabelSet::insert(std::uint32_t step) {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), step);
    if (it != labels_.end() && *it == step) return;
    if (labels_.size() >= kCapacity) {
        saturated_ = true;
        return;
    }
    labels_.insert(it, step);
}

void LabelSet::merge(const LabelSet& other) {
    saturated_ = saturated_ || other.saturated_;
    if (other.labels_.empty()) return;
    if (labels_.empty()) {
        labels_ = other.labels_;
    } else {
        std::vector<std::uint32_t> merged;
        merged.reserve(labels_.size() + other.labels_.size());
        std::set_union(labels_.begin(), labels_.end(), other.labels_.begin(), other.labels_.end(),
                       std::back_inserter(merged));
        labels_ = std::move(merged);
    }
    if (labels_.size() > kCapacity) {
        labels_.resize(kCapacity);
        saturated_ = true;
    }
}

TaintWord uniform_taint(const LabelSet& labels) {
    TaintWord w;
    w.fill(labels);
    return w;
}

LabelSet union_of(const TaintWord& word) {
    LabelSet out;
    for (const auto& b : word) out.merge(b);
    return out;
}

const LabelSet& ShadowMemory::at(std::uint64_t address) const {
    static const LabelSet kEmpty;
    auto it = bytes_.find(address);
    return it == bytes_.end() ? kEmpty : it->second;
}

void ShadowMemory::set(std::uint64_t address, LabelSet labels) {
    if (labels.empty())
        bytes_.erase(address);
    else
        bytes_[address] = std::move(labels);
}

void ShadowMemory::fill(std::uint64_t offset, std::uint64_t size, const LabelSet& labels) {
    if (labels.empty()) {
        bytes_.erase(bytes_.lower_bound(offset), bytes_.lower_bound(offset + size));
        return;
    }
    for (std::uint64_t k = 0; k < size; ++k) bytes_[offset + k] = labels;
}

LabelSet ShadowMemory::union_range(std::uint64_t offset, std::uint64_t size) const {
    LabelSet out;
    for (auto it = bytes_.lower_bound(offset); it != bytes_.end() && it->first < offset + size; ++it)
        out.merge(it->second);
    return out;
}

ArithObservation checked_arith(Opcode op, const Word& a, const Word& b) {
    ArithObservation obs;
    obs.op = op;
    obs.operand1 = a;
    obs.operand2 = b;
    const BigInt wa = a.to_bigint();
    const BigInt wb = b.to_bigint();
    switch (op) {
        case Opcode::ADD:
            obs.wide_result = wa + wb;
            obs.evm_result = a + b;
            break;
        case Opcode::SUB:
            obs.wide_result = wa - wb;
            obs.evm_result = a - b;
            break;
        case Opcode::MUL:
            obs.wide_result = wa * wb;
            obs.evm_result = a * b;
            break;
        default:
            throw validation_error("checked_arith supports ADD, SUB and MUL only");
    }
    return obs;
}

namespace {

constexpr std::uint64_t kMaxRegion = 1ULL << 24;

std::uint64_t region_value(const Word& w, const StepRecord& r) {
    if (!w.fits_u64() || w.low64() > kMaxRegion)
        throw integrity_error("step " + std::to_string(r.step) + ": memory region out of bounds");
    return w.low64();
}

std::uint32_t label_of(const StepRecord& r) {
    return static_cast<std::uint32_t>(r.step);
}

LabelSet own_label(const StepRecord& r) {
    return LabelSet{label_of(r)};
}

/// Pops pops(op) shadow words, top first.
std::vector<TaintWord> pop_operands(Frame& f, const StepRecord& r) {
    const auto n = static_cast<std::size_t>(pops(r.op));
    if (f.stack.size() < n)
        throw integrity_error("step " + std::to_string(r.step) + ": shadow stack underflow (" +
                              std::string(mnemonic(r.op)) + " needs " + std::to_string(n) + ", have " +
                              std::to_string(f.stack.size()) + ")");
    std::vector<TaintWord> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(std::move(f.stack.back()));
        f.stack.pop_back();
    }
    return out;
}

void require_depth(const Frame& f, std::size_t n, const StepRecord& r) {
    if (f.stack.size() < n)
        throw integrity_error("step " + std::to_string(r.step) + ": shadow stack underflow (" +
                              std::string(mnemonic(r.op)) + ")");
}

LabelSet union_all(const std::vector<TaintWord>& words) {
    LabelSet out;
    for (const auto& w : words) out.merge(union_of(w));
    return out;
}

std::map<StorageKey, TaintWord>& storage_map(TaintState& s, Opcode op) {
    return (op == Opcode::TLOAD || op == Opcode::TSTORE) ? s.transient : s.storage;
}

}  // namespace

void introduce_sources(const StepRecord& r, TaintState& state) {
    auto& f = state.top();
    if (r.op == Opcode::CALLDATALOAD) {
        require_depth(f, 1, r);
        f.stack.back() = uniform_taint(own_label(r));
    } else if (r.op == Opcode::CALLDATACOPY) {
        const auto dest = region_value(r.stack_top[0], r);
        const auto size = region_value(r.stack_top[2], r);
        f.memory.fill(dest, size, own_label(r));
    }
}

LabelSet propagate(const StepRecord& r, TaintState& state, const TaintConfig& config) {
    auto& f = state.top();
    const auto op = r.op;

    if (is_dup(op)) {
        const auto n = static_cast<std::size_t>(op) - static_cast<std::size_t>(Opcode::DUP1) + 1;
        require_depth(f, n, r);
        TaintWord copy = f.stack[f.stack.size() - n];
        LabelSet consumed = union_of(copy);
        f.stack.push_back(std::move(copy));
        return consumed;
    }
    if (is_swap(op)) {
        const auto n = static_cast<std::size_t>(op) - static_cast<std::size_t>(Opcode::SWAP1) + 1;
        require_depth(f, n + 1, r);
        std::swap(f.stack.back(), f.stack[f.stack.size() - 1 - n]);
        return union_of(f.stack.back());
    }
    if (is_push(op)) {
        f.stack.push_back(uniform_taint(own_label(r)));
        return {};
    }

    auto operands = pop_operands(f, r);
    LabelSet consumed = union_all(operands);
    const bool is_source = config.sources.count(op) > 0;

    switch (op) {
        case Opcode::MLOAD: {
            const auto offset = region_value(r.stack_top[0], r);
            TaintWord w;
            for (std::uint64_t j = 0; j < 32; ++j) w[j] = f.memory.at(offset + j);
            f.stack.push_back(std::move(w));
            return consumed;
        }
        case Opcode::MSTORE: {
            const auto offset = region_value(r.stack_top[0], r);
            for (std::uint64_t j = 0; j < 32; ++j) f.memory.set(offset + j, operands[1][j]);
            return consumed;
        }
        case Opcode::MSTORE8: {
            const auto offset = region_value(r.stack_top[0], r);
            f.memory.set(offset, operands[1][31]);
            return consumed;
        }
        case Opcode::MCOPY: {
            const auto dest = region_value(r.stack_top[0], r);
            const auto src = region_value(r.stack_top[1], r);
            const auto size = region_value(r.stack_top[2], r);
            std::vector<LabelSet> tmp;
            tmp.reserve(size);
            for (std::uint64_t k = 0; k < size; ++k) tmp.push_back(f.memory.at(src + k));
            for (std::uint64_t k = 0; k < size; ++k) f.memory.set(dest + k, std::move(tmp[k]));
            return consumed;
        }
        case Opcode::SHA3: {
            const auto offset = region_value(r.stack_top[0], r);
            const auto size = region_value(r.stack_top[1], r);
            LabelSet result = f.memory.union_range(offset, size);
            consumed.merge(result);
            result.insert(label_of(r));
            f.stack.push_back(uniform_taint(result));
            return consumed;
        }
        case Opcode::SLOAD:
        case Opcode::TLOAD: {
            auto& m = storage_map(state, op);
            auto it = m.find({f.contract, r.stack_top[0]});
            f.stack.push_back(it == m.end() ? TaintWord{} : it->second);
            return consumed;
        }
        case Opcode::SSTORE:
        case Opcode::TSTORE:
            storage_map(state, op)[{f.contract, r.stack_top[0]}] = operands[1];
            return consumed;
        case Opcode::CODECOPY:
        case Opcode::EXTCODECOPY: {
            const int base = op == Opcode::EXTCODECOPY ? 1 : 0;
            f.memory.fill(region_value(r.stack_top[base], r), region_value(r.stack_top[base + 2], r), own_label(r));
            return consumed;
        }
        case Opcode::RETURNDATACOPY:
            f.memory.fill(region_value(r.stack_top[0], r), region_value(r.stack_top[2], r), state.returndata);
            return consumed;
        case Opcode::RETURN:
        case Opcode::REVERT: {
            const auto offset = region_value(r.stack_top[0], r);
            const auto size = region_value(r.stack_top[1], r);
            f.return_labels = f.memory.union_range(offset, size);
            f.return_size = size;
            return consumed;
        }
        case Opcode::CALL:
        case Opcode::CALLCODE:
        case Opcode::DELEGATECALL:
        case Opcode::STATICCALL: {
            const int base = (op == Opcode::CALL || op == Opcode::CALLCODE) ? 3 : 2;
            consumed.merge(f.memory.union_range(region_value(r.stack_top[base], r),
                                                region_value(r.stack_top[base + 1], r)));
            return consumed;
        }
        case Opcode::CREATE:
        case Opcode::CREATE2:
            return consumed;
        default:
            break;
    }

    if (is_source && (op == Opcode::CALLDATALOAD || op == Opcode::CALLDATACOPY)) {
        if (op == Opcode::CALLDATALOAD) f.stack.emplace_back();
        introduce_sources(r, state);
        return consumed;
    }
    if (op == Opcode::CALLDATACOPY) {
        LabelSet fresh = consumed;
        fresh.insert(label_of(r));
        f.memory.fill(region_value(r.stack_top[0], r), region_value(r.stack_top[2], r), fresh);
        return consumed;
    }

    // Generic value-producing instruction: every byte of the result inherits
    // every consumed byte, plus the producing step.
    if (pushes(op) > 0) {
        LabelSet result = consumed;
        result.insert(label_of(r));
        const auto word = uniform_taint(result);
        for (int k = 0; k < pushes(op); ++k) f.stack.push_back(word);
    }
    return consumed;
}

namespace {

class Replayer {
public:
    Replayer(const ExecutionTrace& trace, const TxMeta& meta, const TaintConfig& config, const StepObserver& observer)
        : trace_(trace), meta_(meta), config_(config), observer_(observer) {}

    ReplayEvents run() {
        const auto& steps = trace_.steps;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto& r = steps[i];
            if (i == 0) {
                if (r.depth != 1) throw integrity_error("step 0: trace must start at depth 1");
                Frame root;
                root.contract = meta_.to;
                root.sender = meta_.from;
                state_.frames.push_back(std::move(root));
            }
            while (state_.frames.size() > r.depth) finish_frame();
            if (state_.frames.size() < r.depth)
                throw integrity_error("step " + std::to_string(r.step) + ": entered depth " +
                                      std::to_string(r.depth) + " without a call");
            execute(r, i + 1 < steps.size() ? &steps[i + 1] : nullptr);
            if (observer_) observer_(r, state_);
        }
        while (state_.frames.size() > 1) finish_frame();

        std::sort(flows_.begin(), flows_.end());
        flows_.erase(std::unique(flows_.begin(), flows_.end()), flows_.end());
        events_.data_flows = std::move(flows_);
        return std::move(events_);
    }

private:
    void execute(const StepRecord& r, const StepRecord* next) {
        auto& f = state_.top();
        const FrameHistory history{f.executed, f.branches};
        const Address contract = f.contract;
        const Address sender = f.sender;

        const LabelSet consumed = propagate(r, state_, config_);
        record_events(r, contract, sender, history);
        emit_flows(r, consumed);
        if (config_.flow_producers.count(r.op)) producers_.push_back(r.step);

        auto& frame = state_.top();
        ++frame.executed;
        frame.last_error = r.error && !opens_frame(r.op);
        if (r.op == Opcode::JUMPI) frame.branches.push_back(!r.stack_top[1].is_zero());

        if (opens_frame(r.op)) {
            if (next && next->depth == r.depth + 1)
                open_frame(r);
            else
                complete_without_frame(r);
        }
    }

    void record_events(const StepRecord& r, const Address& contract, const Address& sender,
                       const FrameHistory& history) {
        const auto op = r.op;
        if (op == Opcode::ADD || op == Opcode::SUB || op == Opcode::MUL) {
            auto obs = checked_arith(op, r.stack_top[0], r.stack_top[1]);
            obs.step = r.step;
            events_.arithmetic.push_back(std::move(obs));
        } else if (op == Opcode::SLOAD || op == Opcode::SSTORE) {
            StorageEvent e;
            e.step = r.step;
            e.op = op;
            e.caller = sender;
            e.contract = contract;
            e.index = r.stack_top[0];
            e.value = op == Opcode::SSTORE ? r.stack_top[1] : (r.storage_delta ? r.storage_delta->value : Word{});
            e.depth = r.depth;
            events_.storage.push_back(e);
        } else if (is_call(op)) {
            CallEvent e;
            e.step = r.step;
            e.op = op;
            e.caller = contract;
            e.callee = address_from_word(r.stack_top[1]);
            if (op == Opcode::CALL || op == Opcode::CALLCODE) e.value = r.stack_top[2];
            if (r.memory_slice) e.input = *r.memory_slice;
            e.depth = r.depth;
            e.success = !r.error;
            e.history = history;
            events_.calls.push_back(std::move(e));
        } else if (is_log(op)) {
            LogEvent e;
            e.step = r.step;
            e.contract = contract;
            e.topics.assign(r.stack_top.begin() + 2, r.stack_top.end());
            if (r.memory_slice) e.data = *r.memory_slice;
            events_.logs.push_back(std::move(e));
        } else if (op == Opcode::JUMPI) {
            events_.conditions.push_back({r.step, !r.stack_top[1].is_zero()});
        } else if (op == Opcode::SELFDESTRUCT) {
            SelfdestructEvent e;
            e.step = r.step;
            e.caller = sender;
            e.contract = contract;
            e.destination = address_from_word(r.stack_top[0]);
            e.value = r.value.value_or(Word{});
            events_.selfdestructs.push_back(e);
        }
    }

    void emit_flows(const StepRecord& r, const LabelSet& consumed) {
        if (!config_.flow_consumers.count(r.op)) return;
        auto emit = [&](std::uint64_t from) {
            if (from == r.step || from >= trace_.steps.size()) return;
            if (config_.flow_producers.count(trace_.steps[from].op)) flows_.push_back({from, r.step});
        };
        if (consumed.saturated()) {
            for (auto p : producers_) emit(p);
        } else {
            for (auto l : consumed.labels()) emit(l);
        }
    }

    void open_frame(const StepRecord& r) {
        auto& parent = state_.top();
        Frame child;
        switch (r.op) {
            case Opcode::CALL:
            case Opcode::STATICCALL:
                child.contract = address_from_word(r.stack_top[1]);
                child.sender = parent.contract;
                break;
            case Opcode::CALLCODE:
                child.contract = parent.contract;
                child.sender = parent.contract;
                break;
            case Opcode::DELEGATECALL:
                child.contract = parent.contract;
                child.sender = parent.sender;
                break;
            default:  // CREATE, CREATE2: the new address is not in the trace
                child.sender = parent.contract;
                break;
        }
        if (is_call(r.op)) {
            child.call_event = events_.calls.size() - 1;
            const int base = (r.op == Opcode::CALL || r.op == Opcode::CALLCODE) ? 5 : 4;
            child.out_offset = region_value(r.stack_top[base], r);
            child.out_size = region_value(r.stack_top[base + 1], r);
        }
        child.opener_step = r.step;
        state_.frames.push_back(std::move(child));
    }

    void complete_without_frame(const StepRecord& r) {
        state_.returndata = LabelSet{};
        state_.top().stack.push_back(uniform_taint(own_label(r)));
    }

    void finish_frame() {
        Frame child = std::move(state_.frames.back());
        state_.frames.pop_back();
        auto& parent = state_.top();
        const auto opener = static_cast<std::uint32_t>(child.opener_step);

        if (child.call_event) events_.calls[*child.call_event].success = !child.last_error;

        LabelSet returned = child.return_labels;
        returned.insert(opener);
        state_.returndata = returned;
        if (child.call_event) parent.memory.fill(child.out_offset, std::min(child.out_size, child.return_size), returned);
        parent.stack.push_back(uniform_taint(LabelSet{opener}));
    }

    const ExecutionTrace& trace_;
    const TxMeta& meta_;
    const TaintConfig& config_;
    const StepObserver& observer_;
    TaintState state_;
    ReplayEvents events_;
    std::vector<DataFlow> flows_;
    std::vector<std::uint64_t> producers_;
};

}  // namespace

ReplayEvents replay(const ExecutionTrace& trace, const TxMeta& meta, const TaintConfig& config,
                    const StepObserver& observer) {
    return Replayer(trace, meta, config, observer).run();
}

namespace {

std::string format_labels(const LabelSet& s) {
    std::string out = "{";
    bool first = true;
    for (auto l : s.labels()) {
        if (!first) out += ",";
        out += std::to_string(l);
        first = false;
    }
    if (s.saturated()) out += first ? "*" : ",*";
    return out + "}";
}

std::string format_word(const TaintWord& w) {
    const bool uniform = std::all_of(w.begin(), w.end(), [&](const LabelSet& b) { return b == w[0]; });
    if (uniform) return format_labels(w[0]);
    std::string out = "[";
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j].empty()) continue;
        if (out.size() > 1) out += " ";
        out += std::to_string(j) + ":" + format_labels(w[j]);
    }
    return out + "]";
}

}  // namespace

std::string dump_taint_state(const StepRecord& r, const TaintState& state) {
    std::ostringstream os;
    os << "step " << r.step << ' ' << mnemonic(r.op) << " depth " << r.depth << '\n';
    if (state.frames.empty()) return os.str();
    const auto& f = state.top();
    os << "  stack (" << f.stack.size() << ", top first):";
    for (auto it = f.stack.rbegin(); it != f.stack.rend(); ++it) os << ' ' << format_word(*it);
    os << "\n  memory:";
    for (const auto& [addr, labels] : f.memory.bytes()) os << ' ' << addr << '=' << format_labels(labels);
    os << "\n  storage:";
    for (const auto& [key, word] : state.storage)
        os << ' ' << key.first.to_hex() << '[' << key.second.to_hex() << "]=" << format_word(word);
    os << '\n';
    return os.str();
}

}  // namespace horus
