// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "evm_sim.hpp"

#include <stdexcept>

#include "keccak.hpp"

namespace horus::testing {

using nlohmann::ordered_json;

Address tagged_address(std::string_view tag) {
    const auto h = keccak256(tag);
    std::array<std::uint8_t, 20> a{};
    std::copy(h.begin() + 12, h.end(), a.begin());
    return Address(a);
}

Hash32 tagged_hash(std::string_view tag) {
    return Hash32(keccak256(tag));
}

Word word_of(const Address& a) {
    return Word::from_bytes(a.bytes());
}

TraceBuilder::TraceBuilder(Address origin, Address to, Bytes calldata, Word value) {
    Frame root;
    root.contract = to;
    root.caller = origin;
    root.calldata = std::move(calldata);
    root.value = value;
    frames_.push_back(std::move(root));
}

TraceBuilder& TraceBuilder::storage(const Address& contract, const Word& slot, const Word& value) {
    storage_[{contract, slot}] = value;
    return *this;
}

Word TraceBuilder::pop() {
    auto& s = top().stack;
    if (s.empty()) throw std::logic_error("simulated stack underflow");
    Word w = s.back();
    s.pop_back();
    return w;
}

void TraceBuilder::touch(std::uint64_t offset, std::uint64_t size) {
    if (size == 0) return;
    auto& m = top().memory;
    const auto end = (offset + size + 31) / 32 * 32;
    if (m.size() < end) m.resize(end, 0);
}

void TraceBuilder::record(Opcode op, ordered_json extra) {
    if (frames_.empty()) throw std::logic_error("transaction already finished");
    const auto& f = frames_.back();
    ordered_json e;
    e["pc"] = logs_.size();
    e["op"] = std::string(mnemonic(op));
    e["gas"] = 1000000 - 3 * logs_.size();
    e["gasCost"] = 3;
    e["depth"] = frames_.size();
    auto stack = ordered_json::array();
    for (const auto& w : f.stack) stack.push_back(w.to_hex());
    e["stack"] = std::move(stack);
    if (!f.memory.empty()) {
        auto mem = ordered_json::array();
        for (std::size_t k = 0; k < f.memory.size(); k += 32)
            mem.push_back(to_hex(std::span(f.memory).subspan(k, 32), false));
        e["memory"] = std::move(mem);
    }
    if (extra.is_object())
        for (auto& [k, v] : extra.items()) e[k] = v;
    logs_.push_back(std::move(e));
}

TraceBuilder& TraceBuilder::push(const Word& v) {
    const auto bytes = v.to_bytes();
    std::size_t n = 32;
    while (n > 1 && bytes[32 - n] == 0) --n;
    record(static_cast<Opcode>(static_cast<int>(Opcode::PUSH0) + n));
    top().stack.push_back(v);
    return *this;
}

TraceBuilder& TraceBuilder::dup(int n) {
    record(static_cast<Opcode>(static_cast<int>(Opcode::DUP1) + n - 1));
    auto& s = top().stack;
    s.push_back(s.at(s.size() - n));
    return *this;
}

TraceBuilder& TraceBuilder::swap(int n) {
    record(static_cast<Opcode>(static_cast<int>(Opcode::SWAP1) + n - 1));
    auto& s = top().stack;
    std::swap(s.back(), s.at(s.size() - 1 - n));
    return *this;
}

TraceBuilder& TraceBuilder::op(Opcode op) {
    record(op);
    auto& f = top();
    auto read_memory = [&](std::uint64_t offset, std::uint64_t size) {
        touch(offset, size);
        return Bytes(f.memory.begin() + offset, f.memory.begin() + offset + size);
    };
    switch (op) {
        case Opcode::ADD: {
            const auto a = pop(), b = pop();
            f.stack.push_back(a + b);
            break;
        }
        case Opcode::SUB: {
            const auto a = pop(), b = pop();
            f.stack.push_back(a - b);
            break;
        }
        case Opcode::MUL: {
            const auto a = pop(), b = pop();
            f.stack.push_back(a * b);
            break;
        }
        case Opcode::LT: {
            const auto a = pop(), b = pop();
            f.stack.push_back(Word(a < b ? 1 : 0));
            break;
        }
        case Opcode::GT: {
            const auto a = pop(), b = pop();
            f.stack.push_back(Word(a > b ? 1 : 0));
            break;
        }
        case Opcode::EQ: {
            const auto a = pop(), b = pop();
            f.stack.push_back(Word(a == b ? 1 : 0));
            break;
        }
        case Opcode::ISZERO:
            f.stack.push_back(Word(pop().is_zero() ? 1 : 0));
            break;
        case Opcode::POP:
        case Opcode::JUMP:
            pop();
            break;
        case Opcode::JUMPI:
            pop();
            pop();
            break;
        case Opcode::JUMPDEST:
            break;
        case Opcode::MLOAD: {
            const auto off = pop().low64();
            const auto b = read_memory(off, 32);
            f.stack.push_back(Word::from_bytes(b));
            break;
        }
        case Opcode::MSTORE: {
            const auto off = pop().low64();
            const auto v = pop().to_bytes();
            touch(off, 32);
            std::copy(v.begin(), v.end(), f.memory.begin() + off);
            break;
        }
        case Opcode::MSTORE8: {
            const auto off = pop().low64();
            const auto v = pop();
            touch(off, 1);
            f.memory[off] = static_cast<std::uint8_t>(v.low64() & 0xff);
            break;
        }
        case Opcode::SHA3: {
            const auto off = pop().low64();
            const auto size = pop().low64();
            const auto b = read_memory(off, size);
            f.stack.push_back(Word::from_bytes(keccak256(std::span<const std::uint8_t>(b))));
            break;
        }
        case Opcode::CALLDATALOAD: {
            const auto off = pop().low64();
            std::array<std::uint8_t, 32> w{};
            for (std::uint64_t k = 0; k < 32; ++k)
                if (off + k < f.calldata.size()) w[k] = f.calldata[off + k];
            f.stack.push_back(Word::from_bytes(w));
            break;
        }
        case Opcode::CALLDATASIZE:
            f.stack.push_back(Word(f.calldata.size()));
            break;
        case Opcode::CALLDATACOPY: {
            const auto dest = pop().low64();
            const auto off = pop().low64();
            const auto size = pop().low64();
            touch(dest, size);
            for (std::uint64_t k = 0; k < size; ++k)
                f.memory[dest + k] = off + k < f.calldata.size() ? f.calldata[off + k] : 0;
            break;
        }
        case Opcode::CALLER:
            f.stack.push_back(word_of(f.caller));
            break;
        case Opcode::CALLVALUE:
            f.stack.push_back(f.value);
            break;
        case Opcode::ADDRESS:
            f.stack.push_back(word_of(f.contract));
            break;
        case Opcode::SLOAD: {
            const auto slot = pop();
            auto it = storage_.find({f.contract, slot});
            f.stack.push_back(it == storage_.end() ? Word{} : it->second);
            break;
        }
        case Opcode::SSTORE: {
            const auto slot = pop();
            storage_[{f.contract, slot}] = pop();
            break;
        }
        default:
            if (is_log(op)) {
                const auto off = pop().low64();
                const auto size = pop().low64();
                touch(off, size);
                for (int k = 0; k < static_cast<int>(op) - static_cast<int>(Opcode::LOG0); ++k) pop();
                break;
            }
            throw std::logic_error("simulator does not implement " + std::string(mnemonic(op)));
    }
    return *this;
}

TraceBuilder& TraceBuilder::calldataload(std::uint64_t offset) {
    push(Word(offset));
    return op(Opcode::CALLDATALOAD);
}

TraceBuilder& TraceBuilder::calldatacopy(std::uint64_t dest, std::uint64_t offset, std::uint64_t size) {
    push(Word(size));
    push(Word(offset));
    push(Word(dest));
    return op(Opcode::CALLDATACOPY);
}

TraceBuilder& TraceBuilder::mstore(std::uint64_t offset, const Word& value) {
    push(value);
    push(Word(offset));
    return op(Opcode::MSTORE);
}

TraceBuilder& TraceBuilder::sload(const Word& slot) {
    push(slot);
    return op(Opcode::SLOAD);
}

TraceBuilder& TraceBuilder::sstore_top(const Word& slot) {
    push(slot);
    return op(Opcode::SSTORE);
}

TraceBuilder& TraceBuilder::sstore(const Word& slot, const Word& value) {
    push(value);
    return sstore_top(slot);
}

TraceBuilder& TraceBuilder::jumpi_top() {
    push(Word(0x100));
    return op(Opcode::JUMPI);
}

TraceBuilder& TraceBuilder::call(const Address& to, const Word& value, std::uint64_t in_offset, std::uint64_t in_size,
                                 std::uint64_t out_offset, std::uint64_t out_size, CallMode mode) {
    return call_op(Opcode::CALL, to, value, in_offset, in_size, out_offset, out_size, mode);
}

TraceBuilder& TraceBuilder::call_op(Opcode op, const Address& to, const Word& value, std::uint64_t in_offset,
                                    std::uint64_t in_size, std::uint64_t out_offset, std::uint64_t out_size,
                                    CallMode mode) {
    const bool has_value = op == Opcode::CALL || op == Opcode::CALLCODE;
    push(Word(out_size));
    push(Word(out_offset));
    push(Word(in_size));
    push(Word(in_offset));
    if (has_value) push(value);
    push(word_of(to));
    push(Word(100000));
    record(op);
    for (int k = 0; k < pops(op); ++k) pop();
    touch(in_offset, in_size);
    touch(out_offset, out_size);
    auto& parent = top();
    Bytes input(parent.memory.begin() + in_offset, parent.memory.begin() + in_offset + in_size);
    if (mode != CallMode::Enter) {
        parent.stack.push_back(Word(mode == CallMode::SucceedNoFrame ? 1 : 0));
        return *this;
    }
    Frame child;
    child.contract = (op == Opcode::CALL || op == Opcode::STATICCALL) ? to : parent.contract;
    child.caller = op == Opcode::DELEGATECALL ? parent.caller : parent.contract;
    child.calldata = std::move(input);
    child.value = has_value ? value : Word{};
    child.out_offset = out_offset;
    child.out_size = out_size;
    child.storage_snapshot = storage_;
    frames_.push_back(std::move(child));
    return *this;
}

TraceBuilder& TraceBuilder::transfer_event(const Address& from, const Address& to, const Word& amount) {
    static const Word topic = Word::from_hex("0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef");
    mstore(0, amount);
    push(word_of(to));
    push(word_of(from));
    push(topic);
    push(Word(32));
    push(Word(0));
    return op(static_cast<Opcode>(0xa3));
}

void TraceBuilder::exit_frame(bool success, Bytes returned) {
    Frame child = std::move(frames_.back());
    frames_.pop_back();
    if (!success) storage_ = child.storage_snapshot;
    if (frames_.empty()) {
        failed_ = !success;
        return;
    }
    auto& parent = top();
    const auto n = std::min<std::uint64_t>(child.out_size, returned.size());
    if (success && n > 0) {
        touch(child.out_offset, n);
        std::copy(returned.begin(), returned.begin() + n, parent.memory.begin() + child.out_offset);
    }
    parent.stack.push_back(Word(success ? 1 : 0));
}

TraceBuilder& TraceBuilder::stop() {
    record(Opcode::STOP);
    exit_frame(true, {});
    return *this;
}

TraceBuilder& TraceBuilder::ret(std::uint64_t offset, std::uint64_t size) {
    push(Word(size));
    push(Word(offset));
    record(Opcode::RETURN);
    pop();
    pop();
    touch(offset, size);
    auto& m = top().memory;
    Bytes data(m.begin() + offset, m.begin() + offset + size);
    exit_frame(true, std::move(data));
    return *this;
}

TraceBuilder& TraceBuilder::revert(std::uint64_t offset, std::uint64_t size) {
    push(Word(size));
    push(Word(offset));
    record(Opcode::REVERT);
    pop();
    pop();
    exit_frame(false, {});
    return *this;
}

TraceBuilder& TraceBuilder::selfdestruct(const Address& beneficiary, const Word& swept) {
    push(word_of(beneficiary));
    ordered_json extra;
    extra["value"] = swept.to_hex();
    record(Opcode::SELFDESTRUCT, extra);
    pop();
    exit_frame(true, {});
    return *this;
}

ordered_json TraceBuilder::geth() const {
    ordered_json doc;
    doc["gas"] = 21000 + 3 * logs_.size();
    doc["failed"] = failed_;
    doc["returnValue"] = "";
    doc["structLogs"] = logs_;
    return doc;
}

std::uint64_t block_timestamp(std::uint64_t block) {
    return 1500000000ULL + 15 * block;
}

std::string meta_line(const MetaFields& m) {
    ordered_json j;
    j["tx_hash"] = m.tx_hash.to_hex();
    j["tx_index"] = m.tx_index;
    j["block_number"] = m.block_number;
    j["timestamp"] = block_timestamp(m.block_number);
    j["from"] = m.from.to_hex();
    j["to"] = m.to.to_hex();
    j["input"] = to_hex(m.input);
    j["gas_used"] = m.gas_used;
    j["gas_limit"] = m.gas_limit;
    j["status"] = m.status;
    j["value"] = m.value;
    return j.dump();
}

Bytes abi_call(std::string_view selector_hex, const std::vector<Word>& args) {
    Bytes out = bytes_from_hex(selector_hex);
    for (const auto& w : args) {
        const auto b = w.to_bytes();
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

}  // namespace horus::testing
