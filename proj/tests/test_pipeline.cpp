// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include "horus/errors.hpp"
#include "horus/pipeline.hpp"
#include "support/corpus.hpp"
#include "support/evm_sim.hpp"
#include "support/test_util.hpp"

namespace horus {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::TempDir;
using testing::TraceBuilder;

template <typename F>
void expect_error(F&& f, ErrorKind kind, const std::string& needle) {
    try {
        f();
        FAIL() << "no error thrown";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

/// Writes `count` small transactions into dir/traces and dir/meta.jsonl.
/// Transaction i sits in block 100 + i; the gas limit of the ones listed in
/// `plain` is 21000.
void write_inputs(const fs::path& dir, int count, const std::set<int>& plain = {}) {
    fs::create_directories(dir / "traces");
    std::string meta;
    for (int i = 0; i < count; ++i) {
        testing::MetaFields m;
        m.tx_hash = testing::tagged_hash("pipeline/" + std::to_string(i));
        m.block_number = 100 + static_cast<std::uint64_t>(i);
        m.from = testing::tagged_address("pipeline/sender");
        m.to = testing::tagged_address("pipeline/contract");
        m.gas_limit = plain.count(i) ? 21000 : 90000;
        m.gas_used = 21000;
        meta += testing::meta_line(m) + "\n";
        TraceBuilder b(m.from, m.to, {});
        b.push(Word(i)).push(Word(3)).op(Opcode::ADD).stop();
        testing::spit(dir / "traces" / (m.tx_hash.to_hex() + ".json"), b.geth_json());
    }
    testing::spit(dir / "meta.jsonl", meta);
}

ExtractConfig extract_config(const TempDir& dir) {
    ExtractConfig c;
    c.traces = dir / "traces";
    c.meta = dir / "meta.jsonl";
    c.out = dir / "facts";
    return c;
}

json manifest(const TempDir& dir) { return json::parse(testing::slurp(dir / "facts/manifest.json")); }

TEST(BlockRanges, Parse) {
    EXPECT_EQ(parse_block_ranges("5..7,1"), (std::vector<BlockRange>{{1, 1}, {5, 7}}));
    EXPECT_TRUE(parse_block_ranges("").empty());
    EXPECT_THROW(parse_block_ranges("1..5,4..9"), Error);
    EXPECT_THROW(parse_block_ranges("9..5"), Error);
    EXPECT_THROW(parse_block_ranges("a..b"), Error);
}

TEST(Extract, SkipsPlainTransfers) {
    TempDir dir;
    write_inputs(dir.path(), 3, {1});
    auto c = extract_config(dir);
    c.skip_gas_limit_21000 = true;
    const auto r = cmd_extract(c);
    EXPECT_EQ(r.processed, 2u);
    EXPECT_EQ(r.filtered, 1u);
    const auto m = manifest(dir);
    EXPECT_EQ(m["transactions"]["processed"], 2);
    EXPECT_EQ(m["transactions"]["filtered"], 1);
    EXPECT_EQ(read_fact_files(dir / "facts").transaction.size(), 2u);

    c.skip_gas_limit_21000 = false;
    EXPECT_EQ(cmd_extract(c).processed, 3u);
}

TEST(Extract, SkipsBlockRanges) {
    TempDir dir;
    write_inputs(dir.path(), 4);
    auto c = extract_config(dir);
    c.skip_blocks = parse_block_ranges("101..102");
    const auto r = cmd_extract(c);
    EXPECT_EQ(r.processed, 2u);
    EXPECT_EQ(r.filtered, 2u);
}

TEST(Extract, EmptyDirectory) {
    TempDir dir;
    write_inputs(dir.path(), 0);
    const auto r = cmd_extract(extract_config(dir));
    EXPECT_EQ(r.processed, 0u);
    EXPECT_EQ(manifest(dir)["transactions"]["processed"], 0);
    EXPECT_EQ(testing::read_tree(dir / "facts").size(), 11u);
}

TEST(Extract, MalformedTrace) {
    TempDir dir;
    write_inputs(dir.path(), 2);
    testing::spit(dir / "traces" / (testing::tagged_hash("pipeline/0").to_hex() + ".json"), "{\"structLogs\": [");
    auto c = extract_config(dir);
    const auto r = cmd_extract(c);
    EXPECT_EQ(r.processed, 1u);
    EXPECT_EQ(r.failed, 1u);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_NE(r.errors[0].find(".json: "), std::string::npos);

    TempDir strict_dir;
    write_inputs(strict_dir.path(), 2);
    testing::spit(strict_dir / "traces" / (testing::tagged_hash("pipeline/1").to_hex() + ".json"), "not json");
    auto s = extract_config(strict_dir);
    s.strict = true;
    expect_error([&] { cmd_extract(s); }, ErrorKind::Processing, ".json");
    EXPECT_FALSE(fs::exists(strict_dir / "facts"));
}

TEST(Extract, UnmatchedFilesAreErrors) {
    TempDir dir;
    write_inputs(dir.path(), 1);
    testing::spit(dir / "traces" / "notes.json", "{}");
    testing::spit(dir / "traces" / (testing::tagged_hash("nobody").to_hex() + ".json"), "{\"structLogs\":[]}");
    const auto r = cmd_extract(extract_config(dir));
    EXPECT_EQ(r.processed, 1u);
    EXPECT_EQ(r.failed, 2u);
}

TEST(Extract, ParallelMatchesSerial) {
    TempDir dir;
    write_inputs(dir.path(), 12);
    auto c = extract_config(dir);
    cmd_extract(c);
    const auto serial = testing::read_tree(c.out);
    c.jobs = 4;
    c.out = dir / "facts4";
    cmd_extract(c);
    EXPECT_EQ(testing::read_tree(c.out), serial);
}

TEST(Extract, DumpTaint) {
    TempDir dir;
    write_inputs(dir.path(), 1);
    auto c = extract_config(dir);
    c.dump_taint = dir / "taint";
    cmd_extract(c);
    const auto files = testing::read_tree(dir / "taint");
    ASSERT_EQ(files.size(), 1u);
    EXPECT_NE(files.begin()->second.find("step 2 ADD"), std::string::npos);
}

TEST(Extract, ValidatesInputs) {
    TempDir dir;
    auto c = extract_config(dir);
    expect_error([&] { cmd_extract(c); }, ErrorKind::Validation, "trace directory");
}

TEST(Analyze, EmptyFacts) {
    TempDir dir;
    write_fact_files(FactStore{}, dir / "facts");
    const auto r = cmd_analyze(dir / "facts", RuleSet{}, dir / "out");
    EXPECT_TRUE(r.findings.empty());
    for (const auto& row : r.summary) EXPECT_EQ(row.contracts + row.transactions, 0u);
    const auto summary = testing::slurp(dir / "out/summary.txt");
    EXPECT_NE(summary.find("Reentrancy: 0 contracts, 0 transactions"), std::string::npos);
    EXPECT_EQ(json::parse(testing::slurp(dir / "out/findings.json")).size(), 0u);
    EXPECT_TRUE(fs::exists(dir / "out/findings.csv"));
}

TEST(Analyze, MissingRelationIsNamed) {
    TempDir dir;
    write_fact_files(FactStore{}, dir / "facts");
    fs::remove(dir / "facts/storage.facts");
    expect_error([&] { cmd_analyze(dir / "facts", RuleSet{}, dir / "out"); }, ErrorKind::Io, "'storage'");
}

TEST(Analyze, ManifestMismatchIsAnIntegrityError) {
    TempDir dir;
    write_inputs(dir.path(), 1);
    cmd_extract(extract_config(dir));
    testing::spit(dir / "facts/opcode.facts", "");
    expect_error([&] { cmd_analyze(dir / "facts", RuleSet{}, dir / "out"); }, ErrorKind::Integrity, "opcode");
}

TEST(Analyze, ReentrancySummary) {
    TempDir dir;
    const auto files = testing::render_corpus();
    testing::write_files(files, dir.path());
    ExtractConfig c;
    c.traces = dir / "reentrancy_dao/traces";
    c.meta = dir / "reentrancy_dao/meta.jsonl";
    c.out = dir / "facts";
    cmd_extract(c);
    const auto r = cmd_analyze(c.out, RuleSet::parse("Reentrancy"), dir / "out");
    EXPECT_EQ(format_summary(r.summary),
              "Reentrancy: 1 contract, 1 transaction\nTotal Unique: 1 contract, 1 transaction\n");
}

TEST(Trace, NoFindingsNoGraphs) {
    TempDir dir;
    testing::spit(dir / "findings.json", "[]");
    TraceCommandConfig c;
    c.findings = dir / "findings.json";
    c.provider = "http://127.0.0.1:1/api";
    c.out = dir / "trace";
    const auto r = cmd_trace(c);
    EXPECT_EQ(r.graphs, 0u);
    EXPECT_FALSE(r.partial);
    EXPECT_EQ(json::parse(testing::slurp(dir / "trace/flow_report.json"))["graphs"].size(), 0u);
}

// Findings whose attacker is traced through an unreachable HTTP endpoint.
TEST(Trace, UnreachableProviderIsPartial) {
    TempDir dir;
    Finding f;
    f.rule = Rule::UnhandledException;
    f.tx_hashes = {testing::tagged_hash("t").to_hex()};
    f.parties = {{"caller", testing::tagged_address("c").to_hex()}, {"callee", testing::tagged_address("d").to_hex()}};
    f.amount = "5";
    f.evidence = {{1, 0, 3}};
    f.senders = {{testing::tagged_address("attacker").to_hex(), 1500000000, f.tx_hashes[0]}};
    testing::spit(dir / "findings.json", findings_to_json({f}));
    TraceCommandConfig c;
    c.findings = dir / "findings.json";
    c.provider = "http://127.0.0.1:1/api";
    c.out = dir / "trace";
    const auto r = cmd_trace(c);
    EXPECT_EQ(r.graphs, 1u);
    EXPECT_TRUE(r.partial);
    const auto report = json::parse(testing::slurp(dir / "trace/flow_report.json"));
    EXPECT_TRUE(report["partial"].get<bool>());
    EXPECT_TRUE(report["graphs"][0]["partial"].get<bool>());
}

TEST(Trace, ProviderSpec) {
    EXPECT_THROW(make_provider("ftp://x", ""), Error);
    EXPECT_THROW(make_provider("fixture:/definitely/not/here", ""), Error);
    EXPECT_NE(make_provider("http://127.0.0.1:1/api", ""), nullptr);
}

TEST(Toml, Parse) {
    const auto t = parse_toml(R"(
# comment
[extract]
traces = "t # not a comment"
jobs = 4
strict = true
skip_blocks = ["1..2", "5"]  # trailing
)");
    const auto& e = t.at("extract");
    EXPECT_EQ(std::get<std::string>(e.at("traces")), "t # not a comment");
    EXPECT_EQ(std::get<std::int64_t>(e.at("jobs")), 4);
    EXPECT_TRUE(std::get<bool>(e.at("strict")));
    EXPECT_EQ(std::get<std::vector<std::string>>(e.at("skip_blocks")), (std::vector<std::string>{"1..2", "5"}));
    expect_error([] { parse_toml("[extract]\nkey\n"); }, ErrorKind::Validation, "config line 2");
    expect_error([] { parse_toml("[extract\n"); }, ErrorKind::Validation, "config line 1");
}

TEST(RunConfig, ResolvesPathsAndValidates) {
    const fs::path base = "/data/run";
    const auto c = RunConfig::parse(R"(
[extract]
traces = "traces"
meta = "/abs/meta.jsonl"
skip_gas_limit_21000 = true
[analyze]
rules = "Reentrancy,ShortAddress"
[trace]
provider = "fixture:provider"
direction = "backward"
hops = 2
)",
                                    base);
    EXPECT_EQ(c.extract.traces, base / "traces");
    EXPECT_EQ(c.extract.meta, "/abs/meta.jsonl");
    EXPECT_EQ(c.extract.out, base / "out/facts");
    EXPECT_TRUE(c.extract.skip_gas_limit_21000);
    EXPECT_EQ(c.rules.enabled.size(), 2u);
    EXPECT_TRUE(c.trace);
    EXPECT_EQ(c.trace_config.provider, "fixture:" + (base / "provider").string());
    EXPECT_EQ(c.trace_config.direction, Direction::Backward);
    EXPECT_EQ(c.trace_config.hops, 2u);

    expect_error([&] { RunConfig::parse("[extract]\ntraces = \"t\"\n", base); }, ErrorKind::Validation, "meta");
    expect_error([&] { RunConfig::parse("[extract]\ntraces = \"t\"\nmeta = \"m\"\n[bogus]\n", base); },
                 ErrorKind::Validation, "[bogus]");
    expect_error([&] { RunConfig::parse("[extract]\ntraces = \"t\"\nmeta = \"m\"\njobs = 0\n", base); },
                 ErrorKind::Validation, "jobs");
    expect_error([&] { RunConfig::parse("[extract]\ntraces = \"t\"\nmeta = \"m\"\njobs = \"two\"\n", base); },
                 ErrorKind::Validation, "integer");
    expect_error([&] { RunConfig::load("/no/such/run.toml"); }, ErrorKind::Validation, "run.toml");
    const auto no_trace = RunConfig::parse("[extract]\ntraces = \"t\"\nmeta = \"m\"\n", base);
    EXPECT_FALSE(no_trace.trace);
}

TEST(Run, WritesAllStagesDeterministically) {
    TempDir dir;
    testing::stage_e2e(testing::corpus_dir(), dir.path());
    auto config = RunConfig::load(dir / "run.toml");
    const auto report = cmd_run(config);
    EXPECT_GT(report.extract.processed, 30u);
    EXPECT_EQ(report.extract.failed, 0u);
    ASSERT_TRUE(report.trace);
    EXPECT_FALSE(report.trace->partial);
    const auto first = testing::read_tree(config.out);
    fs::remove_all(config.out);
    cmd_run(config);
    EXPECT_EQ(testing::read_tree(config.out), first);
}

}  // namespace
}  // namespace horus
