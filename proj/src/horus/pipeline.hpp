// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "horus/detectors.hpp"
#include "horus/fund_tracer.hpp"

namespace horus {

enum class LogLevel { Info = 0, Warn = 1, Error = 2 };
using Logger = std::function<void(LogLevel, std::string_view)>;

using BlockRange = std::pair<std::uint64_t, std::uint64_t>;  // inclusive

/// Parses "A..B,C..D" (a bare number is a one-block range). Ranges must be
/// disjoint.
std::vector<BlockRange> parse_block_ranges(std::string_view text);

struct ExtractConfig {
    std::filesystem::path traces;
    std::filesystem::path meta;
    std::filesystem::path out;
    bool strict = false;
    bool skip_gas_limit_21000 = false;
    std::vector<BlockRange> skip_blocks;
    std::size_t jobs = 1;
    std::optional<std::filesystem::path> dump_taint;
};

struct ExtractReport {
    std::size_t processed = 0;
    std::size_t filtered = 0;
    std::size_t failed = 0;
    std::vector<std::string> errors;  // "<file>: <message>"
    std::vector<std::string> warnings;
};

/// Extracts facts for every trace file in config.traces. Files whose name
/// (up to the first '.') is the transaction hash are matched to meta.jsonl.
/// Per-file failures are reported and, unless strict, the remaining
/// transactions are still written. In strict mode the first failure throws
/// and nothing is written.
ExtractReport cmd_extract(const ExtractConfig& config, const Logger& log = {});

struct AnalyzeReport {
    std::vector<Finding> findings;
    std::vector<RuleSummary> summary;
};

/// Reads facts, runs the enabled rules and writes findings.json,
/// findings.csv and summary.txt into `out`.
AnalyzeReport cmd_analyze(const std::filesystem::path& facts, const RuleSet& rules, const std::filesystem::path& out,
                          const Logger& log = {});

struct TraceCommandConfig {
    std::filesystem::path findings;
    std::string provider;  // fixture:DIR | http:URL
    Direction direction = Direction::Forward;
    std::uint32_t hops = 1;
    std::uint64_t degree_cap = 1000;
    std::size_t concurrency = 4;
    std::optional<std::filesystem::path> labels;
    std::filesystem::path out;
    std::string api_key;  // for http providers
};

struct TraceReport {
    std::size_t graphs = 0;
    bool partial = false;
    std::vector<std::string> errors;
};

std::unique_ptr<Provider> make_provider(const std::string& spec, const std::string& api_key);

/// Builds one graph per attacker (sender of an adversarial transaction),
/// anchored at that attacker's earliest adversarial transaction, and writes
/// exports plus flow_report.json.
TraceReport cmd_trace(const TraceCommandConfig& config, const Logger& log = {});

/// Minimal TOML: [section] headers, key = value with strings, integers,
/// booleans and flat arrays, '#' comments.
using TomlValue = std::variant<std::string, std::int64_t, bool, std::vector<std::string>>;
using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;
TomlTable parse_toml(std::string_view text);

struct RunConfig {
    ExtractConfig extract;
    RuleSet rules;
    bool trace = true;
    TraceCommandConfig trace_config;
    std::filesystem::path out;

    /// Relative paths resolve against the config file's directory.
    static RunConfig load(const std::filesystem::path& path);
    static RunConfig parse(std::string_view text, const std::filesystem::path& base);
};

struct RunReport {
    ExtractReport extract;
    AnalyzeReport analyze;
    std::optional<TraceReport> trace;
};

/// extract -> analyze -> trace into out/facts, out/analysis, out/trace.
/// A failing stage throws and later stages do not run.
RunReport cmd_run(const RunConfig& config, const Logger& log = {});

/// Manifest written next to the fact files.
std::string fact_manifest_json(const FactStore& store, const ExtractReport& report);

}  // namespace horus
