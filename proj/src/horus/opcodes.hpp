// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace horus {

/// EVM opcode, valued by its byte encoding.
enum class Opcode : std::uint8_t {
    STOP = 0x00, ADD = 0x01, MUL = 0x02, SUB = 0x03,
    LT = 0x10, GT = 0x11, EQ = 0x14, ISZERO = 0x15,
    SHA3 = 0x20,
    ADDRESS = 0x30, CALLER = 0x33, CALLVALUE = 0x34,
    CALLDATALOAD = 0x35, CALLDATASIZE = 0x36, CALLDATACOPY = 0x37,
    CODECOPY = 0x39, EXTCODECOPY = 0x3c, RETURNDATASIZE = 0x3d, RETURNDATACOPY = 0x3e,
    POP = 0x50, MLOAD = 0x51, MSTORE = 0x52, MSTORE8 = 0x53,
    SLOAD = 0x54, SSTORE = 0x55, JUMP = 0x56, JUMPI = 0x57, JUMPDEST = 0x5b,
    TLOAD = 0x5c, TSTORE = 0x5d, MCOPY = 0x5e, PUSH0 = 0x5f,
    PUSH1 = 0x60, PUSH32 = 0x7f,
    DUP1 = 0x80, DUP16 = 0x8f,
    SWAP1 = 0x90, SWAP16 = 0x9f,
    LOG0 = 0xa0, LOG4 = 0xa4,
    CREATE = 0xf0, CALL = 0xf1, CALLCODE = 0xf2, RETURN = 0xf3,
    DELEGATECALL = 0xf4, CREATE2 = 0xf5, STATICCALL = 0xfa,
    REVERT = 0xfd, INVALID = 0xfe, SELFDESTRUCT = 0xff,
};

struct OpcodeInfo {
    std::string_view name;
    std::uint8_t pops = 0;    // items removed from the stack
    std::uint8_t pushes = 0;  // items added to the stack
    bool defined = false;
};

const OpcodeInfo& opcode_info(Opcode op);
std::string_view mnemonic(Opcode op);
/// Resolves a mnemonic, including aliases emitted by newer tracers
/// (KECCAK256, PREVRANDAO). Case-sensitive, as tracers emit uppercase.
std::optional<Opcode> opcode_from_name(std::string_view name);

inline int pops(Opcode op) { return opcode_info(op).pops; }
inline int pushes(Opcode op) { return opcode_info(op).pushes; }

inline bool is_push(Opcode op) { return op >= Opcode::PUSH0 && op <= Opcode::PUSH32; }
inline bool is_dup(Opcode op) { return op >= Opcode::DUP1 && op <= Opcode::DUP16; }
inline bool is_swap(Opcode op) { return op >= Opcode::SWAP1 && op <= Opcode::SWAP16; }
inline bool is_log(Opcode op) { return op >= Opcode::LOG0 && op <= Opcode::LOG4; }
inline bool is_call(Opcode op) {
    return op == Opcode::CALL || op == Opcode::CALLCODE || op == Opcode::DELEGATECALL ||
           op == Opcode::STATICCALL;
}
inline bool is_create(Opcode op) { return op == Opcode::CREATE || op == Opcode::CREATE2; }
/// Instructions that open a new call frame.
inline bool opens_frame(Opcode op) { return is_call(op) || is_create(op); }

}  // namespace horus
