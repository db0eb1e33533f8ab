// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/facts.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "horus/errors.hpp"

namespace horus {

namespace {

using Columns = std::vector<std::string>;

std::string num(std::uint64_t v) { return std::to_string(v); }

std::uint64_t to_u64(const std::string& s) {
    if (s.empty() || s.size() > 20 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw schema_error("expected unsigned number, got '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw schema_error("number out of range: '" + s + "'");
    }
}

template <class Row>
struct Codec;

template <>
struct Codec<OpcodeFact> {
    static Columns encode(const OpcodeFact& r) { return {num(r.step), r.op, r.tx_hash}; }
    static OpcodeFact decode(const Columns& c) { return {to_u64(c[0]), c[1], c[2]}; }
};

template <>
struct Codec<DataFlowFact> {
    static Columns encode(const DataFlowFact& r) { return {num(r.step1), num(r.step2), r.tx_hash}; }
    static DataFlowFact decode(const Columns& c) { return {to_u64(c[0]), to_u64(c[1]), c[2]}; }
};

template <>
struct Codec<ArithmeticFact> {
    static Columns encode(const ArithmeticFact& r) {
        return {num(r.step), r.op, r.operand1, r.operand2, r.arithmetic_result, r.evm_result, r.tx_hash};
    }
    static ArithmeticFact decode(const Columns& c) { return {to_u64(c[0]), c[1], c[2], c[3], c[4], c[5], c[6]}; }
};

template <>
struct Codec<StorageFact> {
    static Columns encode(const StorageFact& r) {
        return {num(r.step), r.op, r.tx_hash, r.caller, r.contract, r.index, r.value, num(r.depth)};
    }
    static StorageFact decode(const Columns& c) {
        return {to_u64(c[0]), c[1], c[2], c[3], c[4], c[5], c[6], to_u64(c[7])};
    }
};

template <>
struct Codec<ConditionFact> {
    static Columns encode(const ConditionFact& r) { return {num(r.step), r.tx_hash}; }
    static ConditionFact decode(const Columns& c) { return {to_u64(c[0]), c[1]}; }
};

template <>
struct Codec<Erc20TransferFact> {
    static Columns encode(const Erc20TransferFact& r) {
        return {num(r.step), r.tx_hash, r.contract, r.from, r.to, r.value};
    }
    static Erc20TransferFact decode(const Columns& c) { return {to_u64(c[0]), c[1], c[2], c[3], c[4], c[5]}; }
};

template <>
struct Codec<CallFact> {
    static Columns encode(const CallFact& r) {
        return {num(r.step),  r.tx_hash,      r.op,   r.caller,         r.callee,        r.input,
                r.value,      num(r.depth),   num(r.call_id), num(r.call_branch), num(r.result)};
    }
    static CallFact decode(const Columns& c) {
        return {to_u64(c[0]), c[1], c[2], c[3], c[4], c[5], c[6], to_u64(c[7]), to_u64(c[8]), to_u64(c[9]),
                to_u64(c[10])};
    }
};

template <>
struct Codec<SelfdestructFact> {
    static Columns encode(const SelfdestructFact& r) {
        return {num(r.step), r.tx_hash, r.caller, r.contract, r.destination, r.value};
    }
    static SelfdestructFact decode(const Columns& c) { return {to_u64(c[0]), c[1], c[2], c[3], c[4], c[5]}; }
};

template <>
struct Codec<BlockFact> {
    static Columns encode(const BlockFact& r) {
        return {num(r.block_number), num(r.gas_used), num(r.gas_limit), num(r.timestamp)};
    }
    static BlockFact decode(const Columns& c) { return {to_u64(c[0]), to_u64(c[1]), to_u64(c[2]), to_u64(c[3])}; }
};

template <>
struct Codec<TransactionFact> {
    static Columns encode(const TransactionFact& r) {
        return {r.tx_hash, num(r.tx_index), num(r.block_number), r.from,        r.to,
                r.input,   num(r.gas_used), num(r.gas_limit),    num(r.status)};
    }
    static TransactionFact decode(const Columns& c) {
        return {c[0], to_u64(c[1]), to_u64(c[2]), c[3], c[4], c[5], to_u64(c[6]), to_u64(c[7]), to_u64(c[8])};
    }
};

/// Calls f(name, table) for each relation in canonical order.
template <class Store, class F>
void for_each_relation(Store& s, F&& f) {
    f(std::string_view("opcode"), s.opcode);
    f(std::string_view("data_flow"), s.data_flow);
    f(std::string_view("arithmetic"), s.arithmetic);
    f(std::string_view("storage"), s.storage);
    f(std::string_view("condition"), s.condition);
    f(std::string_view("erc20_transfer"), s.erc20_transfer);
    f(std::string_view("call"), s.call);
    f(std::string_view("selfdestruct"), s.selfdestruct);
    f(std::string_view("block"), s.block);
    f(std::string_view("transaction"), s.transaction);
}

constexpr OrderKey kUnknownOrder{~0ULL, ~0ULL, 0};

using TxOrder = std::unordered_map<std::string, OrderKey>;

TxOrder tx_order(const FactStore& s) {
    TxOrder out;
    for (const auto& t : s.transaction) out[t.tx_hash] = {t.block_number, t.tx_index, 0};
    return out;
}

OrderKey order(const TxOrder& o, const std::string& hash, std::uint64_t step) {
    auto it = o.find(hash);
    OrderKey k = it == o.end() ? kUnknownOrder : it->second;
    k.step = step;
    return k;
}

template <class Row>
OrderKey row_order(const TxOrder& o, const Row& r) {
    return order(o, r.tx_hash, r.step);
}
template <>
OrderKey row_order(const TxOrder& o, const DataFlowFact& r) {
    return order(o, r.tx_hash, r.step1);
}
template <>
OrderKey row_order(const TxOrder&, const BlockFact& r) {
    return {r.block_number, 0, 0};
}
template <>
OrderKey row_order(const TxOrder&, const TransactionFact& r) {
    return {r.block_number, r.tx_index, 0};
}

template <class Row>
void sort_rows(std::vector<Row>& rows, const TxOrder& o) {
    std::vector<std::pair<OrderKey, Row>> keyed;
    keyed.reserve(rows.size());
    for (auto& r : rows) keyed.emplace_back(row_order(o, r), std::move(r));
    std::sort(keyed.begin(), keyed.end());
    keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());
    rows.clear();
    for (auto& [k, r] : keyed) rows.push_back(std::move(r));
}

bool is_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_lower_hex(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

bool is_value(std::string_view s) {
    if (!is_digits(s) || (s.size() > 1 && s[0] == '0') || s.size() > 78) return false;
    return BigInt(std::string(s)) < (BigInt(1) << 256);
}

std::optional<std::string> check_column(ColumnType type, std::string_view text) {
    switch (type) {
        case ColumnType::Number:
            if (is_digits(text) && text.size() <= 20) return std::nullopt;
            return "not a number";
        case ColumnType::Symbol:
            return std::nullopt;
        case ColumnType::Opcode:
            if (opcode_from_name(text)) return std::nullopt;
            return "not an opcode";
        case ColumnType::Address:
            if (text.size() == 42 && text.substr(0, 2) == "0x" && is_lower_hex(text.substr(2))) return std::nullopt;
            return "not a 0x-prefixed 20-byte address";
        case ColumnType::Hash:
            if (text.size() == 66 && text.substr(0, 2) == "0x" && is_lower_hex(text.substr(2))) return std::nullopt;
            return "not a 0x-prefixed 32-byte hash";
        case ColumnType::Value:
            if (is_value(text)) return std::nullopt;
            return "not a decimal value in [0, 2^256)";
        case ColumnType::SignedValue: {
            auto body = text.substr(0, 1) == "-" ? text.substr(1) : text;
            if (is_digits(body) && (body.size() == 1 || body[0] != '0') && body != (text[0] == '-' ? "0" : "x"))
                return std::nullopt;
            return "not a decimal integer";
        }
        case ColumnType::Hex:
            if (text.size() % 2 == 0 && is_lower_hex(text)) return std::nullopt;
            return "not lowercase hex";
    }
    return "unknown column type";
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const auto tab = line.find('\t', pos);
        out.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
        if (tab == std::string::npos) break;
        pos = tab + 1;
    }
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace

const std::vector<RelationSchema>& relation_schemas() {
    using T = ColumnType;
    static const std::vector<RelationSchema> schemas = {
        {"opcode", {{"step", T::Number}, {"op", T::Opcode}, {"tx_hash", T::Hash}}},
        {"data_flow", {{"step1", T::Number}, {"step2", T::Number}, {"tx_hash", T::Hash}}},
        {"arithmetic",
         {{"step", T::Number},
          {"op", T::Opcode},
          {"operand1", T::Value},
          {"operand2", T::Value},
          {"arithmetic_result", T::SignedValue},
          {"evm_result", T::Value},
          {"tx_hash", T::Hash}}},
        {"storage",
         {{"step", T::Number},
          {"op", T::Opcode},
          {"tx_hash", T::Hash},
          {"caller", T::Address},
          {"contract", T::Address},
          {"index", T::Value},
          {"value", T::Value},
          {"depth", T::Number}}},
        {"condition", {{"step", T::Number}, {"tx_hash", T::Hash}}},
        {"erc20_transfer",
         {{"step", T::Number},
          {"tx_hash", T::Hash},
          {"contract", T::Address},
          {"from", T::Address},
          {"to", T::Address},
          {"value", T::Value}}},
        {"call",
         {{"step", T::Number},
          {"tx_hash", T::Hash},
          {"op", T::Opcode},
          {"caller", T::Address},
          {"callee", T::Address},
          {"input", T::Hex},
          {"value", T::Value},
          {"depth", T::Number},
          {"call_id", T::Number},
          {"call_branch", T::Number},
          {"result", T::Number}}},
        {"selfdestruct",
         {{"step", T::Number},
          {"tx_hash", T::Hash},
          {"caller", T::Address},
          {"contract", T::Address},
          {"destination", T::Address},
          {"value", T::Value}}},
        {"block", {{"block_number", T::Number}, {"gas_used", T::Number}, {"gas_limit", T::Number}, {"timestamp", T::Number}}},
        {"transaction",
         {{"tx_hash", T::Hash},
          {"tx_index", T::Number},
          {"block_number", T::Number},
          {"from", T::Address},
          {"to", T::Address},
          {"input", T::Hex},
          {"gas_used", T::Number},
          {"gas_limit", T::Number},
          {"status", T::Number}}},
    };
    return schemas;
}

const RelationSchema* find_relation(std::string_view name) {
    for (const auto& s : relation_schemas())
        if (s.name == name) return &s;
    return nullptr;
}

void FactStore::merge(FactStore other) {
    for_each_relation(*this, [&](std::string_view name, auto& mine) {
        for_each_relation(other, [&](std::string_view oname, auto& theirs) {
            if constexpr (std::is_same_v<std::decay_t<decltype(mine)>, std::decay_t<decltype(theirs)>>) {
                if (name == oname) std::move(theirs.begin(), theirs.end(), std::back_inserter(mine));
            }
        });
    });
}

void FactStore::canonicalize() {
    const auto o = tx_order(*this);
    for_each_relation(*this, [&](std::string_view, auto& rows) { sort_rows(rows, o); });
}

std::optional<OrderKey> FactStore::order_of(std::string_view tx_hash, std::uint64_t step) const {
    for (const auto& t : transaction)
        if (t.tx_hash == tx_hash) return OrderKey{t.block_number, t.tx_index, step};
    return std::nullopt;
}

std::uint64_t branch_fingerprint(const std::vector<bool>& outcomes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (bool taken : outcomes) {
        h ^= taken ? 1U : 0U;
        h *= 1099511628211ULL;
    }
    return h;
}

CallSiteKey assign_call_site(const FrameHistory& history) {
    return {history.position, branch_fingerprint(history.branches)};
}

std::optional<DecodedTransfer> decode_erc20_transfer(const LogEvent& log, std::string* warning) {
    static const Word kTopic = Word::from_hex(kErc20TransferTopic);
    if (log.topics.size() != 3 || log.topics[0] != kTopic) return std::nullopt;
    if (log.data.size() != 32) {
        if (warning)
            *warning = "step " + std::to_string(log.step) + ": Transfer event with " + std::to_string(log.data.size()) +
                       "-byte data skipped";
        return std::nullopt;
    }
    DecodedTransfer t;
    t.contract = log.contract.to_hex();
    t.from = address_from_word(log.topics[1]).to_hex();
    t.to = address_from_word(log.topics[2]).to_hex();
    t.value = Word::from_bytes(log.data).to_decimal();
    return t;
}

FactStore extract_facts(const ExecutionTrace& trace, const TxMeta& tx, const BlockMeta& block,
                        const ExtractOptions& options) {
    FactStore s;
    const auto hash = tx.tx_hash.to_hex();
    const auto events = replay(trace, tx, options.taint, options.observer);

    s.opcode.reserve(trace.size());
    for (const auto& r : trace.steps) s.opcode.push_back({r.step, std::string(mnemonic(r.op)), hash});
    for (const auto& f : events.data_flows) s.data_flow.push_back({f.from, f.to, hash});
    for (const auto& a : events.arithmetic)
        s.arithmetic.push_back({a.step, std::string(mnemonic(a.op)), a.operand1.to_decimal(), a.operand2.to_decimal(),
                                to_decimal(a.wide_result), a.evm_result.to_decimal(), hash});
    for (const auto& e : events.storage)
        s.storage.push_back({e.step, std::string(mnemonic(e.op)), hash, e.caller.to_hex(), e.contract.to_hex(),
                             e.index.to_decimal(), e.value.to_decimal(), e.depth});
    for (const auto& c : events.conditions) s.condition.push_back({c.step, hash});
    for (const auto& log : events.logs) {
        std::string warning;
        if (auto t = decode_erc20_transfer(log, &warning))
            s.erc20_transfer.push_back({log.step, hash, t->contract, t->from, t->to, t->value});
        else if (!warning.empty() && options.warnings)
            options.warnings->push_back(hash + " " + warning);
    }
    for (const auto& c : events.calls) {
        const auto site = assign_call_site(c.history);
        s.call.push_back({c.step, hash, std::string(mnemonic(c.op)), c.caller.to_hex(), c.callee.to_hex(),
                          to_hex(c.input, false), c.value.to_decimal(), c.depth, site.call_id, site.call_branch,
                          c.success ? 1U : 0U});
    }
    for (const auto& d : events.selfdestructs)
        s.selfdestruct.push_back(
            {d.step, hash, d.caller.to_hex(), d.contract.to_hex(), d.destination.to_hex(), d.value.to_decimal()});
    s.block.push_back({block.block_number, block.gas_used, block.gas_limit, block.timestamp});
    s.transaction.push_back({hash, tx.tx_index, tx.block_number, tx.from.to_hex(), tx.to.to_hex(),
                             to_hex(tx.input, false), tx.gas_used, tx.gas_limit, static_cast<std::uint64_t>(tx.status)});
    s.canonicalize();
    return s;
}

std::string relation_tsv(const FactStore& store, std::string_view relation) {
    FactStore sorted = store;
    sorted.canonicalize();
    std::string out;
    bool found = false;
    for_each_relation(sorted, [&](std::string_view name, const auto& rows) {
        if (name != relation) return;
        found = true;
        using Row = typename std::decay_t<decltype(rows)>::value_type;
        for (const auto& r : rows) {
            const auto cols = Codec<Row>::encode(r);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (k) out.push_back('\t');
                out += cols[k];
            }
            out.push_back('\n');
        }
    });
    if (!found) throw validation_error("unknown relation '" + std::string(relation) + "'");
    return out;
}

std::size_t relation_rows(const FactStore& store, std::string_view relation) {
    std::size_t n = 0;
    bool found = false;
    for_each_relation(store, [&](std::string_view name, const auto& rows) {
        if (name == relation) {
            n = rows.size();
            found = true;
        }
    });
    if (!found) throw validation_error("unknown relation '" + std::string(relation) + "'");
    return n;
}

void write_fact_files(const FactStore& store, const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw io_error("cannot create " + directory.string() + ": " + ec.message());
    FactStore sorted = store;
    sorted.canonicalize();
    for (const auto& schema : relation_schemas()) {
        const auto path = directory / (std::string(schema.name) + ".facts");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write " + path.string());
        out << relation_tsv(sorted, schema.name);
        if (!out) throw io_error("write failed: " + path.string());
    }
}

FactStore read_fact_files(const std::filesystem::path& directory) {
    FactStore s;
    for_each_relation(s, [&](std::string_view name, auto& rows) {
        using Row = typename std::decay_t<decltype(rows)>::value_type;
        const auto* schema = find_relation(name);
        const auto file = std::string(name) + ".facts";
        const auto path = directory / file;
        if (!std::filesystem::exists(path))
            throw io_error("missing relation file for '" + std::string(name) + "': " + path.string());
        const auto lines = read_lines(path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto cols = split_tabs(lines[i]);
            const auto where = file + " line " + std::to_string(i + 1) + ": ";
            if (cols.size() != schema->arity())
                throw schema_error(where + "expected " + std::to_string(schema->arity()) + " columns, got " +
                                   std::to_string(cols.size()));
            for (std::size_t k = 0; k < cols.size(); ++k)
                if (auto err = check_column(schema->columns[k].type, cols[k]))
                    throw schema_error(where + "column '" + std::string(schema->columns[k].name) + "' " + *err);
            try {
                rows.push_back(Codec<Row>::decode(cols));
            } catch (const Error& e) {
                throw schema_error(where + e.what());
            }
        }
    });
    return s;
}

std::vector<std::string> check_fact_files(const std::filesystem::path& directory) {
    std::vector<std::string> problems;
    for (const auto& schema : relation_schemas()) {
        const auto file = std::string(schema.name) + ".facts";
        const auto path = directory / file;
        if (!std::filesystem::exists(path)) {
            problems.push_back(file + ": missing");
            continue;
        }
        const auto text = read_text_file(path);
        if (!text.empty() && text.back() != '\n') problems.push_back(file + ": last line not newline-terminated");
        const auto lines = read_lines(path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto where = file + " line " + std::to_string(i + 1) + ": ";
            if (lines[i].empty()) {
                problems.push_back(where + "empty line");
                continue;
            }
            const auto cols = split_tabs(lines[i]);
            if (cols.size() != schema.arity()) {
                problems.push_back(where + "arity " + std::to_string(cols.size()) + ", expected " +
                                   std::to_string(schema.arity()));
                continue;
            }
            for (std::size_t k = 0; k < cols.size(); ++k)
                if (auto err = check_column(schema.columns[k].type, cols[k]))
                    problems.push_back(where + "column '" + std::string(schema.columns[k].name) + "' " + *err);
        }
    }
    return problems;
}

std::vector<std::string> check_referential_integrity(const FactStore& store) {
    std::vector<std::string> problems;
    std::set<std::pair<std::string, std::uint64_t>> steps;
    for (const auto& o : store.opcode) steps.emplace(o.tx_hash, o.step);
    auto need = [&](const char* rel, const std::string& tx, std::uint64_t step) {
        if (!steps.count({tx, step}))
            problems.push_back(std::string(rel) + ": step " + std::to_string(step) + " of " + tx + " not in opcode");
    };
    auto value = [&](const char* rel, const std::string& v) {
        if (check_column(ColumnType::Value, v))
            problems.push_back(std::string(rel) + ": value '" + v + "' outside [0, 2^256)");
    };
    for (const auto& f : store.data_flow) {
        need("data_flow", f.tx_hash, f.step1);
        need("data_flow", f.tx_hash, f.step2);
    }
    for (const auto& f : store.condition) need("condition", f.tx_hash, f.step);
    for (const auto& f : store.storage) {
        need("storage", f.tx_hash, f.step);
        value("storage", f.index);
        value("storage", f.value);
    }
    for (const auto& f : store.call) {
        need("call", f.tx_hash, f.step);
        value("call", f.value);
    }
    for (const auto& f : store.selfdestruct) {
        need("selfdestruct", f.tx_hash, f.step);
        value("selfdestruct", f.value);
    }
    for (const auto& f : store.arithmetic) {
        need("arithmetic", f.tx_hash, f.step);
        value("arithmetic", f.operand1);
        value("arithmetic", f.operand2);
        value("arithmetic", f.evm_result);
    }
    for (const auto& f : store.erc20_transfer) {
        need("erc20_transfer", f.tx_hash, f.step);
        value("erc20_transfer", f.value);
    }
    std::set<std::uint64_t> blocks;
    for (const auto& b : store.block) blocks.insert(b.block_number);
    for (const auto& t : store.transaction)
        if (!blocks.count(t.block_number))
            problems.push_back("transaction " + t.tx_hash + ": block " + std::to_string(t.block_number) + " missing");
    return problems;
}

}  // namespace horus
