// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "horus/errors.hpp"
#include "horus/facts.hpp"
#include "horus/trace_model.hpp"

namespace horus {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void emit(const Logger& log, LogLevel level, const std::string& message) {
    if (log) log(level, message);
}

void write_file(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw io_error("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    out << content;
    if (!out) throw io_error("write failed: " + path.string());
}

std::uint64_t parse_u64_text(std::string_view text, const std::string& what) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        text.size() > 19)
        throw validation_error(what + ": expected an unsigned integer, got '" + std::string(text) + "'");
    return std::stoull(std::string(text));
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct TxJob {
    fs::path file;
    Hash32 hash;
    FactStore facts;
    std::vector<std::string> warnings;
    std::string error;
    bool filtered = false;
};

bool in_ranges(std::uint64_t block, const std::vector<BlockRange>& ranges) {
    return std::any_of(ranges.begin(), ranges.end(),
                       [&](const BlockRange& r) { return block >= r.first && block <= r.second; });
}

std::vector<fs::path> list_trace_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.empty() || name[0] == '.') continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::vector<BlockRange> parse_block_ranges(std::string_view text) {
    std::vector<BlockRange> ranges;
    std::size_t pos = 0;
    const auto all = trim(text);
    if (all.empty()) return ranges;
    std::string_view rest = all;
    while (pos <= rest.size()) {
        auto comma = rest.find(',', pos);
        if (comma == std::string_view::npos) comma = rest.size();
        const auto item = trim(rest.substr(pos, comma - pos));
        const auto dots = item.find("..");
        BlockRange r;
        if (dots == std::string::npos) {
            r.first = r.second = parse_u64_text(item, "block range");
        } else {
            r.first = parse_u64_text(trim(item.substr(0, dots)), "block range");
            r.second = parse_u64_text(trim(item.substr(dots + 2)), "block range");
        }
        if (r.first > r.second) throw validation_error("block range '" + item + "' is empty");
        ranges.push_back(r);
        pos = comma + 1;
    }
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i)
        if (ranges[i].first <= ranges[i - 1].second)
            throw validation_error("block ranges " + std::to_string(ranges[i - 1].first) + ".." +
                                   std::to_string(ranges[i - 1].second) + " and " + std::to_string(ranges[i].first) +
                                   ".." + std::to_string(ranges[i].second) + " overlap");
    return ranges;
}

std::string fact_manifest_json(const FactStore& store, const ExtractReport& report) {
    json doc;
    doc["format"] = "horus-facts v1";
    json rels = json::array();
    for (const auto& schema : relation_schemas())
        rels.push_back({{"name", schema.name}, {"arity", schema.arity()}, {"rows", relation_rows(store, schema.name)}});
    doc["relations"] = rels;
    doc["transactions"] = {{"processed", report.processed}, {"filtered", report.filtered}, {"failed", report.failed}};
    doc["errors"] = report.errors;
    doc["warnings"] = report.warnings;
    return doc.dump(2) + "\n";
}

ExtractReport cmd_extract(const ExtractConfig& config, const Logger& log) {
    if (!fs::is_directory(config.traces))
        throw validation_error("trace directory does not exist: " + config.traces.string());
    if (!fs::is_regular_file(config.meta)) throw validation_error("meta file does not exist: " + config.meta.string());
    if (config.out.empty()) throw validation_error("no output directory given");

    const auto meta = load_meta_file(config.meta);
    // Block rows are taken from the lowest-index transaction of each block;
    // transactions of one block must agree on its timestamp.
    std::map<std::uint64_t, const MetaRecord*> block_source;
    for (const auto& [hash, rec] : meta) {
        auto [it, fresh] = block_source.emplace(rec.block.block_number, &rec);
        if (fresh) continue;
        if (it->second->block.timestamp != rec.block.timestamp)
            throw integrity_error("meta: block " + std::to_string(rec.block.block_number) +
                                  " has conflicting timestamps");
        if (rec.tx.tx_index < it->second->tx.tx_index) it->second = &rec;
    }

    std::vector<TxJob> jobs;
    for (const auto& file : list_trace_files(config.traces)) {
        TxJob job;
        job.file = file;
        jobs.push_back(std::move(job));
    }
    emit(log, LogLevel::Info, "extract: " + std::to_string(jobs.size()) + " trace files");

    if (config.dump_taint) {
        std::error_code ec;
        fs::create_directories(*config.dump_taint, ec);
        if (ec) throw io_error("cannot create " + config.dump_taint->string() + ": " + ec.message());
    }

    auto process = [&](TxJob& job) {
        const auto name = job.file.filename().string();
        const auto stem = name.substr(0, name.find('.'));
        if (!Hash32::valid(stem) || stem.size() != 66) {
            job.error = "file name is not a 0x-prefixed transaction hash";
            return;
        }
        job.hash = Hash32::parse(stem);
        auto it = meta.find(job.hash);
        if (it == meta.end()) {
            job.error = "no metadata for transaction " + job.hash.to_hex();
            return;
        }
        const auto& rec = it->second;
        if ((config.skip_gas_limit_21000 && rec.tx.gas_limit == 21000) ||
            in_ranges(rec.tx.block_number, config.skip_blocks)) {
            job.filtered = true;
            return;
        }
        try {
            const auto trace = load_trace_file(job.file);
            validate_trace(trace);
            ExtractOptions options;
            options.warnings = &job.warnings;
            std::ofstream dump;
            if (config.dump_taint) {
                const auto path = *config.dump_taint / (job.hash.to_hex() + ".taint.txt");
                dump.open(path, std::ios::binary | std::ios::trunc);
                if (!dump) throw io_error("cannot write " + path.string());
                options.observer = [&dump](const StepRecord& r, const TaintState& s) { dump << dump_taint_state(r, s); };
            }
            job.facts = extract_facts(trace, rec.tx, block_source.at(rec.block.block_number)->block, options);
        } catch (const Error& e) {
            job.error = e.what();
        } catch (const std::exception& e) {
            job.error = std::string("unexpected failure: ") + e.what();
        }
    };

    const auto width = std::max<std::size_t>(1, std::min(config.jobs, jobs.size()));
    if (width <= 1) {
        for (auto& j : jobs) process(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t k = 0; k < width; ++k)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) process(jobs[i]);
            });
        for (auto& w : workers) w.join();
    }

    ExtractReport report;
    FactStore store;
    std::set<Hash32> seen;
    for (auto& job : jobs) {
        const auto name = job.file.filename().string();
        if (job.error.empty() && !job.filtered && !seen.insert(job.hash).second)
            job.error = "duplicate trace for transaction " + job.hash.to_hex();
        if (!job.error.empty()) {
            ++report.failed;
            report.errors.push_back(name + ": " + job.error);
            emit(log, LogLevel::Error, name + ": " + job.error);
            if (config.strict) throw Error(ErrorKind::Processing, name + ": " + job.error);
            continue;
        }
        if (job.filtered) {
            ++report.filtered;
            continue;
        }
        ++report.processed;
        for (auto& w : job.warnings) {
            emit(log, LogLevel::Warn, name + ": " + w);
            report.warnings.push_back(name + ": " + w);
        }
        store.merge(std::move(job.facts));
    }
    store.canonicalize();
    write_fact_files(store, config.out);
    write_file(config.out / "manifest.json", fact_manifest_json(store, report));
    emit(log, LogLevel::Info,
         "extract: processed " + std::to_string(report.processed) + ", filtered " + std::to_string(report.filtered) +
             ", failed " + std::to_string(report.failed));
    return report;
}

AnalyzeReport cmd_analyze(const fs::path& facts, const RuleSet& rules, const fs::path& out, const Logger& log) {
    rules.validate();
    if (!fs::is_directory(facts)) throw validation_error("facts directory does not exist: " + facts.string());
    const auto store = read_fact_files(facts);
    const auto manifest_path = facts / "manifest.json";
    if (fs::exists(manifest_path)) {
        json manifest;
        try {
            manifest = json::parse(read_text_file(manifest_path));
            for (const auto& rel : manifest.at("relations")) {
                const auto name = rel.at("name").get<std::string>();
                if (!find_relation(name)) continue;
                if (rel.at("rows").get<std::size_t>() != relation_rows(store, name))
                    throw integrity_error("manifest row count for '" + name + "' does not match " + name + ".facts");
            }
        } catch (const json::exception& e) {
            throw schema_error("manifest.json: " + std::string(e.what()));
        }
    } else {
        emit(log, LogLevel::Warn, "analyze: no manifest.json in " + facts.string());
    }
    for (const auto& problem : check_referential_integrity(store)) emit(log, LogLevel::Warn, "analyze: " + problem);

    AnalyzeReport report;
    report.findings = detect_all(store, rules);
    report.summary = summarize(report.findings, rules);
    write_file(out / "findings.json", findings_to_json(report.findings));
    write_file(out / "findings.csv", findings_to_csv(report.findings));
    write_file(out / "summary.txt", format_summary(report.summary));
    emit(log, LogLevel::Info, "analyze: " + std::to_string(report.findings.size()) + " findings");
    return report;
}

std::unique_ptr<Provider> make_provider(const std::string& spec, const std::string& api_key) {
    if (spec.rfind("fixture:", 0) == 0) {
        const fs::path dir = spec.substr(8);
        if (!fs::is_directory(dir)) throw validation_error("provider fixture directory does not exist: " + dir.string());
        return std::make_unique<FixtureProvider>(dir);
    }
    if (spec.rfind("http", 0) == 0) {
        HttpProviderOptions options;
        options.base_url = spec.rfind("http:", 0) == 0 && spec.find("://") != 4 ? spec.substr(5) : spec;
        options.api_key = api_key;
        return std::make_unique<HttpProvider>(options);
    }
    throw validation_error("provider must be fixture:DIR or http:URL, got '" + spec + "'");
}

TraceReport cmd_trace(const TraceCommandConfig& config, const Logger& log) {
    TraceConfig base;
    base.direction = config.direction;
    base.max_hops = config.hops;
    base.degree_cap = config.degree_cap;
    base.concurrency = config.concurrency;
    base.validate();
    const auto findings = findings_from_json(read_text_file(config.findings));
    const LabelDirectory labels = config.labels ? load_label_directory(*config.labels) : LabelDirectory{};

    std::map<std::string, std::uint64_t> attackers;  // address -> earliest attack
    for (const auto& f : findings)
        for (const auto& s : f.senders) {
            auto [it, fresh] = attackers.emplace(s.address, s.timestamp);
            if (!fresh) it->second = std::min(it->second, s.timestamp);
        }

    TraceReport report;
    json graphs = json::array();
    std::unique_ptr<Provider> provider;
    if (!attackers.empty()) provider = make_provider(config.provider, config.api_key);

    for (const auto& [attacker, timestamp] : attackers) {
        auto cfg = base;
        cfg.attack_timestamp = timestamp;
        FundFlowGraph graph;
        std::string error;
        try {
            graph = build_graph({attacker}, cfg, *provider, labels);
        } catch (const PartialGraphError& e) {
            graph = e.graph();
            error = e.what();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Provider) throw;
            graph.config = cfg;
            graph.seeds.insert(attacker);
            graph.nodes[attacker] = {attacker, NodeKind::Attacker, std::nullopt, std::nullopt};
            error = e.what();
        }
        if (!error.empty()) {
            report.partial = true;
            report.errors.push_back(attacker + ": " + error);
            emit(log, LogLevel::Error, "trace: " + attacker + ": " + error);
        }

        const auto dir = config.out / attacker;
        write_file(dir / "graph.dot", export_graph(graph, GraphFormat::Dot));
        write_file(dir / "graph.graphml", export_graph(graph, GraphFormat::GraphML));
        write_file(dir / "graph.json", export_graph(graph, GraphFormat::Json));
        const auto [nodes_csv, edges_csv] = export_neo4j_csv(graph);
        write_file(dir / "nodes.csv", nodes_csv);
        write_file(dir / "edges.csv", edges_csv);

        std::set<std::string> categories;
        std::set<std::string> assets{std::string(kEther)};
        for (const auto& [a, n] : graph.nodes)
            if (n.category) categories.insert(*n.category);
        for (const auto& e : graph.edges)
            if (e.token) assets.insert(e.token->symbol);
        json flows = json::array();
        const bool reverse = cfg.direction == Direction::Backward;
        for (const auto& category : categories)
            for (const auto& asset : assets) {
                const auto r = query_flows(graph, attacker, {FlowFilter::Field::Category, category}, cfg.max_hops, asset,
                                           reverse);
                if (r.paths.empty()) continue;
                json paths = json::array();
                for (const auto& p : r.paths) paths.push_back({{"nodes", p.nodes}, {"bottleneck", to_decimal(p.bottleneck)}});
                flows.push_back({{"category", category},
                                 {"asset", asset},
                                 {"aggregate", to_decimal(r.aggregate)},
                                 {"truncated", r.truncated},
                                 {"paths", paths}});
            }
        json g;
        g["attacker"] = attacker;
        g["attack_timestamp"] = timestamp;
        g["direction"] = to_string(cfg.direction);
        g["nodes"] = graph.nodes.size();
        g["edges"] = graph.edges.size();
        g["partial"] = !error.empty();
        if (!error.empty()) g["error"] = error;
        g["flows"] = flows;
        graphs.push_back(std::move(g));
        ++report.graphs;
        emit(log, LogLevel::Info,
             "trace: " + attacker + ": " + std::to_string(graph.nodes.size()) + " nodes, " +
                 std::to_string(graph.edges.size()) + " edges");
    }
    json doc;
    doc["partial"] = report.partial;
    doc["graphs"] = graphs;
    write_file(config.out / "flow_report.json", doc.dump(2) + "\n");
    return report;
}

TomlTable parse_toml(std::string_view text) {
    TomlTable table;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& m) -> Error {
        return validation_error("config line " + std::to_string(line_no) + ": " + m);
    };
    // Strips a trailing comment that is not inside a string.
    auto strip_comment = [](const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    };
    auto parse_string = [&](std::string_view v) {
        if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw fail("malformed string " + std::string(v));
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                const char c = v[++i];
                out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
            } else {
                out.push_back(v[i]);
            }
        }
        return out;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw fail("empty section name");
            table[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw fail("expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw fail("expected key = value");
        auto& sec = table[section];
        if (sec.count(key)) throw fail("duplicate key '" + key + "'");
        if (value.front() == '"') {
            sec[key] = parse_string(value);
        } else if (value == "true" || value == "false") {
            sec[key] = value == "true";
        } else if (value.front() == '[') {
            if (value.back() != ']') throw fail("arrays must be on one line");
            std::vector<std::string> items;
            const auto body = trim(value.substr(1, value.size() - 2));
            std::size_t pos = 0;
            while (!body.empty() && pos <= body.size()) {
                auto comma = body.find(',', pos);
                if (comma == std::string::npos) comma = body.size();
                const auto item = trim(body.substr(pos, comma - pos));
                if (!item.empty()) items.push_back(item.front() == '"' ? parse_string(item) : item);
                pos = comma + 1;
            }
            sec[key] = items;
        } else {
            const bool negative = value.front() == '-';
            const auto digits = negative ? value.substr(1) : value;
            if (digits.empty() || digits.size() > 18 ||
                !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
                throw fail("unsupported value '" + value + "'");
            sec[key] = static_cast<std::int64_t>(std::stoll(value));
        }
    }
    return table;
}

namespace {

class ConfigReader {
public:
    ConfigReader(const TomlTable& table, fs::path base) : table_(table), base_(std::move(base)) {
        static const std::map<std::string, std::set<std::string>> known = {
            {"extract", {"traces", "meta", "strict", "skip_gas_limit_21000", "skip_blocks", "jobs", "dump_taint"}},
            {"analyze", {"rules"}},
            {"trace", {"enabled", "provider", "direction", "hops", "degree_cap", "labels", "concurrency"}},
            {"output", {"dir"}},
        };
        for (const auto& [section, keys] : table) {
            auto it = known.find(section);
            if (it == known.end()) throw validation_error("config: unknown section [" + section + "]");
            for (const auto& [key, v] : keys)
                if (!it->second.count(key)) throw validation_error("config: unknown key '" + key + "' in [" + section + "]");
        }
    }

    const TomlValue* find(const std::string& section, const std::string& key) const {
        auto s = table_.find(section);
        if (s == table_.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    std::optional<std::string> str(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v) return std::nullopt;
        if (const auto* s = std::get_if<std::string>(v)) return *s;
        throw validation_error("config: [" + section + "] " + key + " must be a string");
    }

    std::optional<fs::path> path(const std::string& section, const std::string& key) const {
        auto s = str(section, key);
        if (!s) return std::nullopt;
        fs::path p(*s);
        return p.is_absolute() ? p : base_ / p;
    }

    std::optional<std::int64_t> integer(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v) return std::nullopt;
        if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
        throw validation_error("config: [" + section + "] " + key + " must be an integer");
    }

    std::optional<bool> boolean(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v) return std::nullopt;
        if (const auto* b = std::get_if<bool>(v)) return *b;
        throw validation_error("config: [" + section + "] " + key + " must be true or false");
    }

    std::optional<std::vector<std::string>> list(const std::string& section, const std::string& key) const {
        const auto* v = find(section, key);
        if (!v) return std::nullopt;
        if (const auto* l = std::get_if<std::vector<std::string>>(v)) return *l;
        if (const auto* s = std::get_if<std::string>(v)) return std::vector<std::string>{*s};
        throw validation_error("config: [" + section + "] " + key + " must be an array of strings");
    }

    std::int64_t positive(const std::string& section, const std::string& key, std::int64_t fallback) const {
        const auto v = integer(section, key).value_or(fallback);
        if (v < 1) throw validation_error("config: [" + section + "] " + key + " must be positive");
        return v;
    }

    const fs::path& base() const { return base_; }

private:
    const TomlTable& table_;
    fs::path base_;
};

}  // namespace

RunConfig RunConfig::parse(std::string_view text, const fs::path& base) {
    const auto table = parse_toml(text);
    const ConfigReader r(table, base);
    RunConfig c;
    c.out = r.path("output", "dir").value_or(base / "out");

    auto traces = r.path("extract", "traces");
    auto meta = r.path("extract", "meta");
    if (!traces || !meta) throw validation_error("config: [extract] needs traces and meta");
    c.extract.traces = *traces;
    c.extract.meta = *meta;
    c.extract.out = c.out / "facts";
    c.extract.strict = r.boolean("extract", "strict").value_or(false);
    c.extract.skip_gas_limit_21000 = r.boolean("extract", "skip_gas_limit_21000").value_or(false);
    if (auto ranges = r.list("extract", "skip_blocks")) {
        std::string joined;
        for (const auto& x : *ranges) joined += (joined.empty() ? "" : ",") + x;
        c.extract.skip_blocks = parse_block_ranges(joined);
    }
    c.extract.jobs = static_cast<std::size_t>(r.positive("extract", "jobs", 1));
    c.extract.dump_taint = r.path("extract", "dump_taint");

    c.rules = RuleSet::parse(r.str("analyze", "rules").value_or("all"));

    c.trace = r.boolean("trace", "enabled").value_or(r.find("trace", "provider") != nullptr);
    auto& t = c.trace_config;
    t.findings = c.out / "analysis" / "findings.json";
    t.out = c.out / "trace";
    if (auto p = r.str("trace", "provider")) {
        t.provider = *p;
        if (t.provider.rfind("fixture:", 0) == 0) {
            fs::path dir(t.provider.substr(8));
            if (dir.is_relative()) dir = base / dir;
            t.provider = "fixture:" + dir.string();
        }
    } else if (c.trace) {
        throw validation_error("config: [trace] needs a provider");
    }
    const auto direction = r.str("trace", "direction").value_or("forward");
    const auto d = direction_from_name(direction);
    if (!d) throw validation_error("config: [trace] direction must be forward or backward");
    t.direction = *d;
    t.hops = static_cast<std::uint32_t>(r.positive("trace", "hops", 1));
    t.degree_cap = static_cast<std::uint64_t>(r.positive("trace", "degree_cap", 1000));
    t.concurrency = static_cast<std::size_t>(r.positive("trace", "concurrency", 4));
    t.labels = r.path("trace", "labels");
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw validation_error("config file does not exist: " + path.string());
    return parse(read_text_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

RunReport cmd_run(const RunConfig& config, const Logger& log) {
    RunReport report;
    report.extract = cmd_extract(config.extract, log);
    if (report.extract.failed > 0)
        throw Error(ErrorKind::Processing,
                    "extract: " + std::to_string(report.extract.failed) + " transaction(s) failed; stopping");
    report.analyze = cmd_analyze(config.extract.out, config.rules, config.out / "analysis", log);
    if (config.trace) report.trace = cmd_trace(config.trace_config, log);
    return report;
}

}  // namespace horus
