// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

// horus command line: extract, analyze, trace, run.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "horus/horus.h"

namespace {

int exit_code(horus_status s) {
    switch (s) {
        case HORUS_OK:
            return 0;
        case HORUS_ERR_INVALID_ARGUMENT:
        case HORUS_ERR_VALIDATION:
            return 1;
        case HORUS_ERR_PROVIDER:
        case HORUS_ERR_PARTIAL:
            return 3;
        default:
            return 2;
    }
}

void log_to_stderr(horus_log_level level, const char* message, void*) {
    static const char* names[] = {"info", "warn", "error"};
    std::fprintf(stderr, "[%s] %s\n", names[level], message);
}

int report(horus_status s) {
    if (s != HORUS_OK) std::fprintf(stderr, "horus: %s: %s\n", horus_status_name(s), horus_last_error());
    return exit_code(s);
}

void print_and_free(char* text) {
    if (!text) return;
    std::fputs(text, stdout);
    horus_string_free(text);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"horus: EVM transaction trace forensics"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Print only the summary");

    std::string traces, meta, facts_out, skip_blocks, dump_taint;
    bool strict = false, skip_21000 = false;
    unsigned jobs = 1;
    auto* extract = app.add_subcommand("extract", "Extract Datalog facts from execution traces");
    extract->add_option("--traces", traces, "Directory of trace files")->required();
    extract->add_option("--meta", meta, "meta.jsonl with transaction and block metadata")->required();
    extract->add_option("--out", facts_out, "Output directory for fact files")->required();
    extract->add_flag("--strict", strict, "Stop at the first failing trace and write nothing");
    extract->add_flag("--skip-gas-limit-21000", skip_21000, "Skip transactions with a gas limit of 21000");
    extract->add_option("--skip-blocks", skip_blocks, "Inclusive block ranges to skip, e.g. 100..200,300..310");
    extract->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    extract->add_option("--dump-taint", dump_taint, "Write per-step shadow state to this directory");

    std::string facts_dir, rules = "all", analysis_out;
    auto* analyze = app.add_subcommand("analyze", "Run the attack detection rules over fact files");
    analyze->add_option("--facts", facts_dir, "Directory of fact files")->required();
    analyze->add_option("--rules", rules, "all, or a comma-separated list of rule names");
    analyze->add_option("--out", analysis_out, "Output directory")->required();

    std::string findings, provider, direction = "forward", labels, trace_out;
    unsigned hops = 1, concurrency = 4;
    uint64_t degree_cap = 1000;
    auto* trace = app.add_subcommand("trace", "Trace funds of the attackers in a findings file");
    trace->add_option("--findings", findings, "findings.json from analyze")->required();
    trace->add_option("--provider", provider, "fixture:DIR or http:URL")->required();
    trace->add_option("--direction", direction, "forward or backward")->check(CLI::IsMember({"forward", "backward"}));
    trace->add_option("--hops", hops, "Maximum hops from an attacker")->check(CLI::PositiveNumber);
    trace->add_option("--degree-cap", degree_cap, "Do not expand accounts with more transfers than this")
        ->check(CLI::PositiveNumber);
    trace->add_option("--concurrency", concurrency, "Concurrent provider requests")->check(CLI::PositiveNumber);
    trace->add_option("--labels", labels, "CSV of address,category,label");
    trace->add_option("--out", trace_out, "Output directory")->required();

    std::string config, run_out;
    unsigned run_jobs = 0;
    auto* run = app.add_subcommand("run", "Run extract, analyze and trace from a config file");
    run->add_option("--config", config, "Config file")->required();
    run->add_option("--out", run_out, "Override the output directory");
    run->add_option("--jobs", run_jobs, "Override extraction worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (!quiet) horus_set_logger(log_to_stderr, nullptr);

    if (*extract) {
        horus_extract_options o{traces.c_str(), meta.c_str(), facts_out.c_str(), strict, skip_21000,
                                opt(skip_blocks),  jobs,        opt(dump_taint)};
        horus_extract_result r{};
        const auto s = horus_cmd_extract(&o, &r);
        if (s == HORUS_OK || s == HORUS_ERR_PROCESSING)
            std::printf("processed %zu, filtered %zu, failed %zu\n", r.processed, r.filtered, r.failed);
        return report(s);
    }
    if (*analyze) {
        char* summary = nullptr;
        const auto s = horus_cmd_analyze(facts_dir.c_str(), rules.c_str(), analysis_out.c_str(), &summary);
        print_and_free(summary);
        return report(s);
    }
    if (*trace) {
        horus_trace_options o{findings.c_str(), provider.c_str(), direction.c_str(), hops,
                              degree_cap,       concurrency,      opt(labels),       trace_out.c_str()};
        size_t graphs = 0;
        const auto s = horus_cmd_trace(&o, &graphs);
        if (s == HORUS_OK || s == HORUS_ERR_PARTIAL) std::printf("graphs: %zu%s\n", graphs, s == HORUS_OK ? "" : " (partial)");
        return report(s);
    }
    if (*run) {
        char* summary = nullptr;
        const auto s = horus_cmd_run(config.c_str(), opt(run_out), run_jobs, &summary);
        print_and_free(summary);
        return report(s);
    }
    return 1;
}
