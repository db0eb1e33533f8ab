// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/horus.h"

#include <cstdlib>
#include <cstring>
#include <mutex>
#include <string>

#include "horus/detectors.hpp"
#include "horus/facts.hpp"
#include "horus/pipeline.hpp"
#include "horus/trace_model.hpp"

struct horus_trace {
    horus::ExecutionTrace trace;
};

struct horus_facts {
    horus::FactStore store;
};

struct horus_findings {
    std::vector<horus::Finding> findings;
};

namespace {

thread_local std::string last_error;

std::mutex logger_mutex;
horus_log_fn logger_fn = nullptr;
void* logger_user = nullptr;

horus_status status_of(horus::ErrorKind kind) {
    using horus::ErrorKind;
    switch (kind) {
        case ErrorKind::Parse: return HORUS_ERR_PARSE;
        case ErrorKind::Schema: return HORUS_ERR_SCHEMA;
        case ErrorKind::Integrity: return HORUS_ERR_INTEGRITY;
        case ErrorKind::Io: return HORUS_ERR_IO;
        case ErrorKind::Validation: return HORUS_ERR_VALIDATION;
        case ErrorKind::Provider: return HORUS_ERR_PROVIDER;
        case ErrorKind::Partial: return HORUS_ERR_PARTIAL;
        case ErrorKind::Processing: return HORUS_ERR_PROCESSING;
    }
    return HORUS_ERR_INTERNAL;
}

horus_status fail(horus_status status, std::string message) {
    last_error = std::move(message);
    return status;
}

template <class F>
horus_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const horus::Error& e) {
        return fail(status_of(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(HORUS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(HORUS_ERR_INTERNAL, e.what());
    }
}

char* duplicate(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

horus::Logger logger() {
    return [](horus::LogLevel level, std::string_view message) {
        std::lock_guard lock(logger_mutex);
        if (!logger_fn) return;
        const std::string text(message);
        logger_fn(static_cast<horus_log_level>(level), text.c_str(), logger_user);
    };
}

std::string api_key() {
    const char* key = std::getenv("HORUS_PROVIDER_API_KEY");
    return key ? key : "";
}

#define HORUS_REQUIRE(cond, what) \
    if (!(cond)) return fail(HORUS_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* horus_version(void) { return "0.1.0"; }

const char* horus_status_name(horus_status status) {
    switch (status) {
        case HORUS_OK: return "ok";
        case HORUS_ERR_INVALID_ARGUMENT: return "invalid argument";
        case HORUS_ERR_VALIDATION: return "validation error";
        case HORUS_ERR_PARSE: return "parse error";
        case HORUS_ERR_SCHEMA: return "schema error";
        case HORUS_ERR_INTEGRITY: return "integrity error";
        case HORUS_ERR_IO: return "I/O error";
        case HORUS_ERR_PROCESSING: return "processing error";
        case HORUS_ERR_PROVIDER: return "provider error";
        case HORUS_ERR_PARTIAL: return "partial result";
        case HORUS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* horus_last_error(void) { return last_error.c_str(); }

void horus_string_free(char* s) { std::free(s); }

void horus_set_logger(horus_log_fn fn, void* user) {
    std::lock_guard lock(logger_mutex);
    logger_fn = fn;
    logger_user = user;
}

int horus_compare_order(uint64_t block_a, uint64_t index_a, uint64_t step_a, uint64_t block_b, uint64_t index_b,
                        uint64_t step_b) {
    return horus::compare_order({block_a, index_a, step_a}, {block_b, index_b, step_b});
}

horus_status horus_trace_load(const char* path, horus_trace** out) {
    HORUS_REQUIRE(path && out, "path and out are required");
    return guarded([&] {
        auto t = std::make_unique<horus_trace>();
        t->trace = horus::load_trace_file(path);
        horus::validate_trace(t->trace);
        *out = t.release();
        return HORUS_OK;
    });
}

horus_status horus_trace_parse_geth(const char* data, size_t size, horus_trace** out) {
    HORUS_REQUIRE((data || size == 0) && out, "data and out are required");
    return guarded([&] {
        auto t = std::make_unique<horus_trace>();
        t->trace = horus::parse_geth_trace(std::string_view(data ? data : "", size));
        *out = t.release();
        return HORUS_OK;
    });
}

horus_status horus_trace_parse_reduced(const char* data, size_t size, horus_trace** out) {
    HORUS_REQUIRE((data || size == 0) && out, "data and out are required");
    return guarded([&] {
        auto t = std::make_unique<horus_trace>();
        t->trace = horus::parse_reduced_trace(std::string_view(data ? data : "", size));
        *out = t.release();
        return HORUS_OK;
    });
}

size_t horus_trace_step_count(const horus_trace* trace) { return trace ? trace->trace.size() : 0; }

horus_status horus_trace_reduce(const horus_trace* trace, char** out) {
    HORUS_REQUIRE(trace && out, "trace and out are required");
    return guarded([&] {
        *out = duplicate(horus::reduce_trace(trace->trace));
        return HORUS_OK;
    });
}

void horus_trace_free(horus_trace* trace) { delete trace; }

horus_status horus_facts_extract(const horus_trace* trace, const char* meta_json, horus_facts** out) {
    HORUS_REQUIRE(trace && meta_json && out, "trace, meta_json and out are required");
    return guarded([&] {
        const auto meta = horus::parse_meta_record(meta_json);
        horus::validate_trace(trace->trace);
        auto f = std::make_unique<horus_facts>();
        f->store = horus::extract_facts(trace->trace, meta.tx, meta.block);
        *out = f.release();
        return HORUS_OK;
    });
}

horus_status horus_facts_read(const char* directory, horus_facts** out) {
    HORUS_REQUIRE(directory && out, "directory and out are required");
    return guarded([&] {
        auto f = std::make_unique<horus_facts>();
        f->store = horus::read_fact_files(directory);
        *out = f.release();
        return HORUS_OK;
    });
}

horus_status horus_facts_write(const horus_facts* facts, const char* directory) {
    HORUS_REQUIRE(facts && directory, "facts and directory are required");
    return guarded([&] {
        horus::write_fact_files(facts->store, directory);
        return HORUS_OK;
    });
}

horus_status horus_facts_rows(const horus_facts* facts, const char* relation, size_t* out) {
    HORUS_REQUIRE(facts && relation && out, "facts, relation and out are required");
    return guarded([&] {
        *out = horus::relation_rows(facts->store, relation);
        return HORUS_OK;
    });
}

horus_status horus_facts_tsv(const horus_facts* facts, const char* relation, char** out) {
    HORUS_REQUIRE(facts && relation && out, "facts, relation and out are required");
    return guarded([&] {
        *out = duplicate(horus::relation_tsv(facts->store, relation));
        return HORUS_OK;
    });
}

horus_status horus_facts_check(const char* directory, char** problems) {
    HORUS_REQUIRE(directory, "directory is required");
    return guarded([&] {
        const auto found = horus::check_fact_files(directory);
        std::string text;
        for (const auto& p : found) text += p + "\n";
        if (problems) *problems = duplicate(text);
        if (found.empty()) return HORUS_OK;
        return fail(HORUS_ERR_SCHEMA, std::to_string(found.size()) + " problem(s) in fact files; first: " + found.front());
    });
}

void horus_facts_free(horus_facts* facts) { delete facts; }

horus_status horus_detect(const horus_facts* facts, const char* rules, horus_findings** out) {
    HORUS_REQUIRE(facts && out, "facts and out are required");
    return guarded([&] {
        auto f = std::make_unique<horus_findings>();
        f->findings = horus::detect_all(facts->store, horus::RuleSet::parse(rules ? rules : "all"));
        *out = f.release();
        return HORUS_OK;
    });
}

horus_status horus_detect_naive(const horus_facts* facts, const char* rules, horus_findings** out) {
    HORUS_REQUIRE(facts && out, "facts and out are required");
    return guarded([&] {
        auto f = std::make_unique<horus_findings>();
        f->findings = horus::naive_eval(horus::RuleSet::parse(rules ? rules : "all"), facts->store);
        *out = f.release();
        return HORUS_OK;
    });
}

size_t horus_findings_count(const horus_findings* findings) { return findings ? findings->findings.size() : 0; }

horus_status horus_findings_json(const horus_findings* findings, char** out) {
    HORUS_REQUIRE(findings && out, "findings and out are required");
    return guarded([&] {
        *out = duplicate(horus::findings_to_json(findings->findings));
        return HORUS_OK;
    });
}

horus_status horus_findings_csv(const horus_findings* findings, char** out) {
    HORUS_REQUIRE(findings && out, "findings and out are required");
    return guarded([&] {
        *out = duplicate(horus::findings_to_csv(findings->findings));
        return HORUS_OK;
    });
}

horus_status horus_findings_summary(const horus_findings* findings, const char* rules, char** out) {
    HORUS_REQUIRE(findings && out, "findings and out are required");
    return guarded([&] {
        const auto rs = horus::RuleSet::parse(rules ? rules : "all");
        *out = duplicate(horus::format_summary(horus::summarize(findings->findings, rs)));
        return HORUS_OK;
    });
}

void horus_findings_free(horus_findings* findings) { delete findings; }

horus_status horus_cmd_extract(const horus_extract_options* options, horus_extract_result* result) {
    HORUS_REQUIRE(options && options->traces && options->meta && options->out, "traces, meta and out are required");
    return guarded([&] {
        horus::ExtractConfig c;
        c.traces = options->traces;
        c.meta = options->meta;
        c.out = options->out;
        c.strict = options->strict != 0;
        c.skip_gas_limit_21000 = options->skip_gas_limit_21000 != 0;
        if (options->skip_blocks) c.skip_blocks = horus::parse_block_ranges(options->skip_blocks);
        c.jobs = options->jobs ? options->jobs : 1;
        if (options->dump_taint) c.dump_taint = options->dump_taint;
        const auto report = horus::cmd_extract(c, logger());
        if (result) *result = {report.processed, report.filtered, report.failed};
        if (report.failed == 0) return HORUS_OK;
        std::string message = std::to_string(report.failed) + " transaction(s) failed:";
        for (const auto& e : report.errors) message += "\n  " + e;
        return fail(HORUS_ERR_PROCESSING, message);
    });
}

horus_status horus_cmd_analyze(const char* facts, const char* rules, const char* out, char** summary) {
    HORUS_REQUIRE(facts && out, "facts and out are required");
    return guarded([&] {
        const auto rs = horus::RuleSet::parse(rules ? rules : "all");
        const auto report = horus::cmd_analyze(facts, rs, out, logger());
        if (summary) *summary = duplicate(horus::format_summary(report.summary));
        return HORUS_OK;
    });
}

horus_status horus_cmd_trace(const horus_trace_options* options, size_t* graphs) {
    HORUS_REQUIRE(options && options->findings && options->provider && options->out,
                  "findings, provider and out are required");
    return guarded([&] {
        horus::TraceCommandConfig c;
        c.findings = options->findings;
        c.provider = options->provider;
        const auto d = horus::direction_from_name(options->direction ? options->direction : "forward");
        if (!d) return fail(HORUS_ERR_VALIDATION, "direction must be forward or backward");
        c.direction = *d;
        c.hops = options->hops;
        c.degree_cap = options->degree_cap;
        c.concurrency = options->concurrency ? options->concurrency : 4;
        if (options->labels) c.labels = options->labels;
        c.out = options->out;
        c.api_key = api_key();
        const auto report = horus::cmd_trace(c, logger());
        if (graphs) *graphs = report.graphs;
        if (!report.partial) return HORUS_OK;
        std::string message = "tracing incomplete:";
        for (const auto& e : report.errors) message += "\n  " + e;
        return fail(HORUS_ERR_PARTIAL, message);
    });
}

horus_status horus_cmd_run(const char* config, const char* out, unsigned jobs, char** summary) {
    HORUS_REQUIRE(config, "config is required");
    return guarded([&] {
        auto c = horus::RunConfig::load(config);
        if (out) {
            const std::filesystem::path root(out);
            c.out = root;
            c.extract.out = root / "facts";
            c.trace_config.findings = root / "analysis" / "findings.json";
            c.trace_config.out = root / "trace";
        }
        if (jobs) c.extract.jobs = jobs;
        c.trace_config.api_key = api_key();
        const auto report = horus::cmd_run(c, logger());
        if (summary) *summary = duplicate(horus::format_summary(report.analyze.summary));
        if (report.trace && report.trace->partial) {
            std::string message = "tracing incomplete:";
            for (const auto& e : report.trace->errors) message += "\n  " + e;
            return fail(HORUS_ERR_PARTIAL, message);
        }
        return HORUS_OK;
    });
}

}  // extern "C"
