// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/trace_model.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "horus/errors.hpp"

namespace horus {

using nlohmann::json;

namespace {

constexpr std::uint64_t kMaxMemorySpan = 1ULL << 24;

struct MemoryOperands {
    int offset;
    int size;  // -1: fixed 32-byte window
};

/// Stack positions (top = 0) of the memory region an opcode reads.
std::optional<MemoryOperands> memory_operands(Opcode op) {
    switch (op) {
        case Opcode::SHA3:
        case Opcode::RETURN:
        case Opcode::REVERT: return MemoryOperands{0, 1};
        case Opcode::MLOAD: return MemoryOperands{0, -1};
        case Opcode::CALL:
        case Opcode::CALLCODE: return MemoryOperands{3, 4};
        case Opcode::DELEGATECALL:
        case Opcode::STATICCALL: return MemoryOperands{2, 3};
        case Opcode::CREATE:
        case Opcode::CREATE2: return MemoryOperands{1, 2};
        default: break;
    }
    if (is_log(op)) return MemoryOperands{0, 1};
    return std::nullopt;
}

std::string step_prefix(std::size_t i) {
    return "step " + std::to_string(i) + ": ";
}

Word parse_stack_word(const json& v, std::size_t i) {
    if (!v.is_string()) throw schema_error(step_prefix(i) + "stack entries must be hex strings");
    try {
        return Word::from_hex(v.get<std::string>());
    } catch (const Error& e) {
        throw schema_error(step_prefix(i) + e.what());
    }
}

Bytes parse_memory(const json& mem, std::size_t i) {
    Bytes out;
    try {
        if (mem.is_string()) return bytes_from_hex(mem.get<std::string>());
        if (!mem.is_array()) throw schema_error(step_prefix(i) + "memory must be an array of hex words");
        for (const auto& w : mem) {
            if (!w.is_string()) throw schema_error(step_prefix(i) + "memory words must be strings");
            const auto b = bytes_from_hex(w.get<std::string>());
            out.insert(out.end(), b.begin(), b.end());
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Schema) throw;
        throw schema_error(step_prefix(i) + e.what());
    }
    return out;
}

std::uint64_t span_value(const Word& w, std::size_t i) {
    if (!w.fits_u64() || w.low64() > kMaxMemorySpan)
        throw schema_error(step_prefix(i) + "memory range out of bounds");
    return w.low64();
}

Bytes slice_memory(const Bytes& memory, std::uint64_t offset, std::uint64_t size) {
    Bytes out(size, 0);
    for (std::uint64_t k = 0; k < size && offset + k < memory.size(); ++k) out[k] = memory[offset + k];
    return out;
}

bool truthy_error(const json& entry) {
    auto it = entry.find("error");
    if (it == entry.end() || it->is_null()) return false;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_string()) return !it->get<std::string>().empty();
    return true;
}

}  // namespace

int compare_order(const OrderKey& a, const OrderKey& b) {
    const auto c = a <=> b;
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

void validate_trace(const ExecutionTrace& trace) {
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& r = trace.steps[i];
        if (r.step != i)
            throw schema_error(step_prefix(i) + "step counter " + std::to_string(r.step) + " out of sequence");
        if (r.depth < 1) throw schema_error(step_prefix(i) + "depth must be >= 1");
        if (i > 0) {
            const auto prev = trace.steps[i - 1].depth;
            if (r.depth > prev + 1 || r.depth + 1 < prev)
                throw schema_error(step_prefix(i) + "depth changes by more than 1");
        }
        if (!opcode_info(r.op).defined) throw schema_error(step_prefix(i) + "undefined opcode");
        if (static_cast<int>(r.stack_top.size()) != pops(r.op))
            throw schema_error(step_prefix(i) + std::string(mnemonic(r.op)) + " expects " +
                               std::to_string(pops(r.op)) + " stack operands, got " +
                               std::to_string(r.stack_top.size()));
    }
}

ExecutionTrace parse_geth_trace(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw parse_error("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("result") && doc["result"].is_object()) doc = doc["result"];
    if (!doc.is_object() || !doc.contains("structLogs") || !doc["structLogs"].is_array())
        throw schema_error("trace document has no structLogs array");

    const auto& logs = doc["structLogs"];
    ExecutionTrace trace;
    trace.steps.reserve(logs.size());
    // Top of each entry's full stack: the value the previous instruction pushed.
    std::vector<std::optional<Word>> stack_back(logs.size());

    for (std::size_t i = 0; i < logs.size(); ++i) {
        const auto& e = logs[i];
        if (!e.is_object()) throw schema_error(step_prefix(i) + "entry is not an object");
        for (const char* key : {"op", "depth", "stack"})
            if (!e.contains(key)) throw schema_error(step_prefix(i) + "missing required key '" + key + "'");
        if (!e["op"].is_string()) throw schema_error(step_prefix(i) + "'op' must be a string");
        if (!e["depth"].is_number_integer()) throw schema_error(step_prefix(i) + "'depth' must be an integer");
        if (!e["stack"].is_array()) throw schema_error(step_prefix(i) + "'stack' must be an array");

        const auto name = e["op"].get<std::string>();
        const auto op = opcode_from_name(name);
        if (!op) throw schema_error(step_prefix(i) + "unknown opcode '" + name + "'");

        StepRecord r;
        r.step = i;
        r.op = *op;
        const auto depth = e["depth"].get<std::int64_t>();
        if (depth < 1) throw schema_error(step_prefix(i) + "depth must be >= 1");
        r.depth = static_cast<std::uint32_t>(depth);

        const auto& stack = e["stack"];
        const auto n = static_cast<std::size_t>(pops(r.op));
        if (stack.size() < n)
            throw schema_error(step_prefix(i) + name + " needs " + std::to_string(n) + " stack items, trace has " +
                               std::to_string(stack.size()));
        for (std::size_t k = 0; k < n; ++k) r.stack_top.push_back(parse_stack_word(stack[stack.size() - 1 - k], i));
        if (!stack.empty()) stack_back[i] = parse_stack_word(stack.back(), i);

        if (auto mo = memory_operands(r.op)) {
            Bytes memory;
            if (auto it = e.find("memory"); it != e.end() && !it->is_null()) memory = parse_memory(*it, i);
            const auto offset = span_value(r.stack_top[mo->offset], i);
            const auto size = mo->size < 0 ? 32 : span_value(r.stack_top[mo->size], i);
            r.memory_slice = slice_memory(memory, offset, size);
        }

        if (r.op == Opcode::SSTORE) r.storage_delta = StorageDelta{r.stack_top[0], r.stack_top[1]};
        if (r.op == Opcode::SELFDESTRUCT) {
            if (auto it = e.find("value"); it != e.end() && !it->is_null()) {
                if (it->is_number_unsigned() || it->is_number_integer())
                    r.value = Word(it->get<std::uint64_t>());
                else
                    r.value = Word::from_hex(it->get<std::string>());
            }
        }
        r.error = truthy_error(e);
        trace.steps.push_back(std::move(r));
    }

    // Second pass: values that only become visible at a later step.
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        auto& r = trace.steps[i];
        if (r.op == Opcode::SLOAD) {
            Word loaded;
            if (i + 1 < trace.steps.size() && trace.steps[i + 1].depth == r.depth && stack_back[i + 1]) {
                loaded = *stack_back[i + 1];
            } else if (auto st = logs[i].find("storage"); st != logs[i].end() && st->is_object()) {
                const auto key = to_lower(r.stack_top[0].to_padded_hex().substr(2));
                for (const auto& [k, v] : st->items())
                    if (to_lower(k.size() > 2 && k[1] == 'x' ? k.substr(2) : k) == key)
                        loaded = Word::from_hex(v.get<std::string>());
            }
            r.storage_delta = StorageDelta{r.stack_top[0], loaded};
        }
        if (!opens_frame(r.op)) continue;
        std::size_t j = i + 1;
        while (j < trace.steps.size() && trace.steps[j].depth > r.depth) ++j;
        if (j >= trace.steps.size() || trace.steps[j].depth != r.depth || !stack_back[j]) continue;
        if (!stack_back[j]->is_zero()) continue;
        // The call pushed 0: mark the failing frame's last record, or the call
        // itself when no frame was entered.
        if (j > i + 1)
            trace.steps[j - 1].error = true;
        else
            r.error = true;
    }

    if (!trace.steps.empty()) {
        auto& last = trace.steps.back();
        if (last.op == Opcode::REVERT || last.op == Opcode::INVALID) last.error = true;
    }
    validate_trace(trace);
    return trace;
}

std::string reduce_trace(const ExecutionTrace& trace) {
    std::string out(kReducedTraceHeader);
    out.push_back('\n');
    for (const auto& r : trace.steps) {
        out += std::to_string(r.step);
        out.push_back('\t');
        out += mnemonic(r.op);
        out.push_back('\t');
        out += std::to_string(r.depth);
        out.push_back('\t');
        std::vector<std::string> fields;
        if (!r.stack_top.empty()) {
            std::string s = "stack=";
            for (std::size_t k = 0; k < r.stack_top.size(); ++k) {
                if (k) s.push_back(',');
                s += r.stack_top[k].to_hex();
            }
            fields.push_back(std::move(s));
        }
        if (r.memory_slice) fields.push_back("mem=" + to_hex(*r.memory_slice));
        if (r.storage_delta)
            fields.push_back("store=" + r.storage_delta->index.to_hex() + "," + r.storage_delta->value.to_hex());
        if (r.error) fields.emplace_back("err=1");
        if (r.value) fields.push_back("value=" + r.value->to_hex());
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) out.push_back(';');
            out += fields[k];
        }
        out.push_back('\n');
    }
    return out;
}

ExecutionTrace parse_reduced_trace(std::string_view document) {
    ExecutionTrace trace;
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < document.size();) {
        auto nl = document.find('\n', pos);
        if (nl == std::string_view::npos) nl = document.size();
        auto line = document.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) return trace;
    if (lines[0] != kReducedTraceHeader)
        throw schema_error("reduced trace must start with '" + std::string(kReducedTraceHeader) + "'");

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto where = "reduced trace line " + std::to_string(li) + " (file line " + std::to_string(li + 1) + "): ";
        std::vector<std::string_view> cols;
        std::string_view line = lines[li];
        for (std::size_t pos = 0;;) {
            const auto tab = line.find('\t', pos);
            cols.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
            if (tab == std::string_view::npos) break;
            pos = tab + 1;
        }
        if (cols.size() != 4)
            throw schema_error(where + "expected 4 tab-separated fields, got " + std::to_string(cols.size()));

        StepRecord r;
        try {
            r.step = std::stoull(std::string(cols[0]));
            const auto op = opcode_from_name(cols[1]);
            if (!op) throw schema_error("unknown opcode '" + std::string(cols[1]) + "'");
            r.op = *op;
            r.depth = static_cast<std::uint32_t>(std::stoul(std::string(cols[2])));

            std::string_view rest = cols[3];
            while (!rest.empty()) {
                const auto semi = rest.find(';');
                const auto field = rest.substr(0, semi);
                rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
                const auto eq = field.find('=');
                if (eq == std::string_view::npos) throw schema_error("field without '=': " + std::string(field));
                const auto key = field.substr(0, eq);
                const auto value = field.substr(eq + 1);
                if (key == "stack") {
                    for (std::size_t p = 0; p <= value.size();) {
                        const auto comma = value.find(',', p);
                        const auto item = value.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p);
                        r.stack_top.push_back(Word::from_hex(item));
                        if (comma == std::string_view::npos) break;
                        p = comma + 1;
                    }
                } else if (key == "mem") {
                    r.memory_slice = bytes_from_hex(value);
                } else if (key == "store") {
                    const auto comma = value.find(',');
                    if (comma == std::string_view::npos) throw schema_error("store needs index,value");
                    r.storage_delta = StorageDelta{Word::from_hex(value.substr(0, comma)),
                                                   Word::from_hex(value.substr(comma + 1))};
                } else if (key == "err") {
                    r.error = value == "1";
                } else if (key == "value") {
                    r.value = Word::from_hex(value);
                } else {
                    throw schema_error("unknown field '" + std::string(key) + "'");
                }
            }
        } catch (const Error& e) {
            throw schema_error(where + e.what());
        } catch (const std::logic_error&) {
            throw schema_error(where + "invalid integer field");
        }
        if (static_cast<int>(r.stack_top.size()) != pops(r.op))
            throw schema_error(where + std::string(mnemonic(r.op)) + " expects " + std::to_string(pops(r.op)) +
                               " stack operands, got " + std::to_string(r.stack_top.size()));
        trace.steps.push_back(std::move(r));
    }
    validate_trace(trace);
    return trace;
}

namespace {

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) throw schema_error(std::string("meta record missing '") + key + "'");
    return *it;
}

BigInt json_integer(const json& v, const char* key) {
    try {
        if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
        if (v.is_number_integer()) {
            const auto x = v.get<std::int64_t>();
            if (x < 0) throw schema_error("negative");
            return BigInt(x);
        }
        if (v.is_string()) return parse_unsigned(v.get<std::string>());
    } catch (const Error&) {
    }
    throw schema_error(std::string("meta field '") + key + "' is not a non-negative integer");
}

std::uint64_t json_u64(const json& v, const char* key) {
    const auto b = json_integer(v, key);
    if (b > std::numeric_limits<std::uint64_t>::max())
        throw schema_error(std::string("meta field '") + key + "' out of range");
    return static_cast<std::uint64_t>(b);
}

Address json_address(const json& obj, const char* key, bool nullable) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (nullable) return Address{};
        throw schema_error(std::string("meta record missing '") + key + "'");
    }
    if (!it->is_string() || !Address::valid(it->get<std::string>()))
        throw schema_error(std::string("meta field '") + key + "' is not a 20-byte address");
    return Address::parse(it->get<std::string>());
}

}  // namespace

MetaRecord parse_meta_record(std::string_view json_line) {
    json obj;
    try {
        obj = json::parse(json_line);
    } catch (const json::parse_error& e) {
        throw parse_error("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!obj.is_object()) throw schema_error("meta record must be a JSON object");

    MetaRecord m;
    const auto& hash = require(obj, "tx_hash");
    if (!hash.is_string() || !Hash32::valid(hash.get<std::string>()))
        throw schema_error("meta field 'tx_hash' is not a 32-byte hash");
    m.tx.tx_hash = Hash32::parse(hash.get<std::string>());
    m.tx.tx_index = json_u64(require(obj, "tx_index"), "tx_index");
    m.tx.block_number = json_u64(require(obj, "block_number"), "block_number");
    m.tx.from = json_address(obj, "from", false);
    m.tx.to = json_address(obj, "to", true);
    if (auto it = obj.find("input"); it != obj.end() && !it->is_null()) {
        try {
            m.tx.input = bytes_from_hex(it->get<std::string>());
        } catch (const std::exception&) {
            throw schema_error("meta field 'input' is not a hex string");
        }
    }
    m.tx.gas_used = json_u64(require(obj, "gas_used"), "gas_used");
    m.tx.gas_limit = json_u64(require(obj, "gas_limit"), "gas_limit");
    const auto status = json_u64(require(obj, "status"), "status");
    if (status > 1) throw schema_error("meta field 'status' must be 0 or 1");
    m.tx.status = static_cast<int>(status);
    if (auto it = obj.find("value"); it != obj.end() && !it->is_null()) m.tx.value = json_integer(*it, "value");

    m.block.block_number = m.tx.block_number;
    m.block.timestamp = json_u64(require(obj, "timestamp"), "timestamp");
    m.block.gas_used = obj.contains("block_gas_used") ? json_u64(obj["block_gas_used"], "block_gas_used") : m.tx.gas_used;
    m.block.gas_limit =
        obj.contains("block_gas_limit") ? json_u64(obj["block_gas_limit"], "block_gas_limit") : m.tx.gas_limit;
    if (m.block.gas_used > m.block.gas_limit) throw schema_error("block gas_used exceeds gas_limit");
    if (m.block.timestamp == 0) throw schema_error("block timestamp must be positive");
    return m;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<Hash32, MetaRecord> load_meta_file(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    std::map<Hash32, MetaRecord> out;
    std::istringstream in(text);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto rec = parse_meta_record(line);
            const auto hash = rec.tx.tx_hash;
            if (!out.emplace(hash, std::move(rec)).second)
                throw schema_error("duplicate tx_hash " + hash.to_hex());
        } catch (const Error& e) {
            throw Error(e.kind(), path.filename().string() + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

ExecutionTrace load_trace_file(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    if (path.extension() == ".json") return parse_geth_trace(text);
    return parse_reduced_trace(text);
}

}  // namespace horus
