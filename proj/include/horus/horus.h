/* Copyright 2026 The Horus Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the horus trace forensics library. Objects are opaque
 * handles released with their *_free function. Functions return a
 * horus_status; on failure horus_last_error() describes the problem for the
 * calling thread. Strings returned through char** are owned by the caller
 * and released with horus_string_free().
 */
#ifndef HORUS_HORUS_H
#define HORUS_HORUS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HORUS_API __declspec(dllexport)
#else
#define HORUS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum horus_status {
    HORUS_OK = 0,
    HORUS_ERR_INVALID_ARGUMENT = 1,
    HORUS_ERR_VALIDATION = 2,
    HORUS_ERR_PARSE = 3,
    HORUS_ERR_SCHEMA = 4,
    HORUS_ERR_INTEGRITY = 5,
    HORUS_ERR_IO = 6,
    HORUS_ERR_PROCESSING = 7,
    HORUS_ERR_PROVIDER = 8,
    HORUS_ERR_PARTIAL = 9,
    HORUS_ERR_INTERNAL = 10
} horus_status;

typedef enum horus_log_level { HORUS_LOG_INFO = 0, HORUS_LOG_WARN = 1, HORUS_LOG_ERROR = 2 } horus_log_level;

typedef void (*horus_log_fn)(horus_log_level level, const char* message, void* user);

HORUS_API const char* horus_version(void);
HORUS_API const char* horus_status_name(horus_status status);
/* Message of the last failed call on this thread; "" if none. */
HORUS_API const char* horus_last_error(void);
HORUS_API void horus_string_free(char* s);
/* Installs a process-wide log sink; NULL disables logging. */
HORUS_API void horus_set_logger(horus_log_fn fn, void* user);

/* -1, 0 or 1 comparing (block, tx_index, step) triples. */
HORUS_API int horus_compare_order(uint64_t block_a, uint64_t index_a, uint64_t step_a, uint64_t block_b,
                                  uint64_t index_b, uint64_t step_b);

/* Traces */
typedef struct horus_trace horus_trace;

/* `*.json` files are Geth traces, anything else the reduced format. */
HORUS_API horus_status horus_trace_load(const char* path, horus_trace** out);
HORUS_API horus_status horus_trace_parse_geth(const char* data, size_t size, horus_trace** out);
HORUS_API horus_status horus_trace_parse_reduced(const char* data, size_t size, horus_trace** out);
HORUS_API size_t horus_trace_step_count(const horus_trace* trace);
HORUS_API horus_status horus_trace_reduce(const horus_trace* trace, char** out);
HORUS_API void horus_trace_free(horus_trace* trace);

/* Facts */
typedef struct horus_facts horus_facts;

/* `meta_json` is one meta.jsonl record for the traced transaction. */
HORUS_API horus_status horus_facts_extract(const horus_trace* trace, const char* meta_json, horus_facts** out);
HORUS_API horus_status horus_facts_read(const char* directory, horus_facts** out);
HORUS_API horus_status horus_facts_write(const horus_facts* facts, const char* directory);
HORUS_API horus_status horus_facts_rows(const horus_facts* facts, const char* relation, size_t* out);
HORUS_API horus_status horus_facts_tsv(const horus_facts* facts, const char* relation, char** out);
/* Validates the fact files of a directory. Problems are written one per
 * line to *problems; HORUS_ERR_SCHEMA is returned if there are any. */
HORUS_API horus_status horus_facts_check(const char* directory, char** problems);
HORUS_API void horus_facts_free(horus_facts* facts);

/* Findings */
typedef struct horus_findings horus_findings;

/* `rules` is "all" or a comma-separated list of rule names. */
HORUS_API horus_status horus_detect(const horus_facts* facts, const char* rules, horus_findings** out);
HORUS_API horus_status horus_detect_naive(const horus_facts* facts, const char* rules, horus_findings** out);
HORUS_API size_t horus_findings_count(const horus_findings* findings);
HORUS_API horus_status horus_findings_json(const horus_findings* findings, char** out);
HORUS_API horus_status horus_findings_csv(const horus_findings* findings, char** out);
HORUS_API horus_status horus_findings_summary(const horus_findings* findings, const char* rules, char** out);
HORUS_API void horus_findings_free(horus_findings* findings);

/* Pipeline commands */
typedef struct horus_extract_options {
    const char* traces;
    const char* meta;
    const char* out;
    int strict;
    int skip_gas_limit_21000;
    const char* skip_blocks; /* "A..B,C..D" or NULL */
    unsigned jobs;
    const char* dump_taint; /* directory or NULL */
} horus_extract_options;

typedef struct horus_extract_result {
    size_t processed;
    size_t filtered;
    size_t failed;
} horus_extract_result;

/* Returns HORUS_ERR_PROCESSING when some transaction failed; the facts of
 * the others are still written unless strict is set. */
HORUS_API horus_status horus_cmd_extract(const horus_extract_options* options, horus_extract_result* result);

HORUS_API horus_status horus_cmd_analyze(const char* facts, const char* rules, const char* out, char** summary);

typedef struct horus_trace_options {
    const char* findings;
    const char* provider; /* fixture:DIR or http:URL */
    const char* direction; /* forward or backward */
    unsigned hops;
    uint64_t degree_cap;
    unsigned concurrency;
    const char* labels; /* CSV or NULL */
    const char* out;
} horus_trace_options;

/* The HTTP provider reads its API key from HORUS_PROVIDER_API_KEY. Returns
 * HORUS_ERR_PARTIAL when some graph could not be completed. */
HORUS_API horus_status horus_cmd_trace(const horus_trace_options* options, size_t* graphs);

/* Runs extract, analyze and trace from a config file. `out` and `jobs`
 * override the config when non-NULL / non-zero. */
HORUS_API horus_status horus_cmd_run(const char* config, const char* out, unsigned jobs, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* HORUS_HORUS_H */
