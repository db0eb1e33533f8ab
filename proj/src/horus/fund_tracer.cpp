// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "horus/fund_tracer.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <limits>
#include <json.hpp>
#include <sstream>
#include <thread>
#include <tuple>

#include "horus/trace_model.hpp"

namespace horus {

using json = nlohmann::ordered_json;

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Attacker: return "attacker";
        case NodeKind::Labeled: return "labeled";
        case NodeKind::Unlabeled: return "unlabeled";
    }
    return "?";
}

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::Normal: return "normal";
        case EdgeKind::Internal: return "internal";
        case EdgeKind::Token: return "token";
    }
    return "?";
}

std::string_view to_string(Direction direction) {
    return direction == Direction::Forward ? "forward" : "backward";
}

std::optional<Direction> direction_from_name(std::string_view name) {
    if (name == "forward") return Direction::Forward;
    if (name == "backward") return Direction::Backward;
    return std::nullopt;
}

bool operator<(const TransferEdge& a, const TransferEdge& b) {
    return std::tie(a.timestamp, a.tx_hash, a.kind, a.from, a.to, a.token) <
               std::tie(b.timestamp, b.tx_hash, b.kind, b.from, b.to, b.token) ||
           (std::tie(a.timestamp, a.tx_hash, a.kind, a.from, a.to, a.token) ==
                std::tie(b.timestamp, b.tx_hash, b.kind, b.from, b.to, b.token) &&
            a.value < b.value);
}

namespace {

std::string normalize_address(std::string_view text, const std::string& what) {
    if (!Address::valid(text)) throw validation_error(what + ": malformed address '" + std::string(text) + "'");
    return Address::parse(text).to_hex();
}

std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back().push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back().push_back(c);
        }
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

BigInt parse_amount(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw schema_error(where + ": value must be a non-negative decimal integer");
        return BigInt(s);
    }
    throw schema_error(where + ": value must be a non-negative decimal integer");
}

std::uint64_t parse_u64(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_string()) {
        const auto n = parse_unsigned(v.get<std::string>());
        if (n <= std::numeric_limits<std::uint64_t>::max()) return n.convert_to<std::uint64_t>();
    }
    throw schema_error(where + ": expected an unsigned 64-bit integer");
}

/// Runs f(0..n-1) on at most `width` threads.
void run_bounded(std::size_t n, std::size_t width, const std::function<void(std::size_t)>& f) {
    width = std::max<std::size_t>(1, std::min(width, n));
    if (width == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t k = 0; k < width; ++k)
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& w : workers) w.join();
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

void apply_labels(FundFlowGraph& graph, const LabelDirectory& labels) {
    for (auto& [address, node] : graph.nodes) {
        if (node.kind == NodeKind::Attacker) continue;
        auto it = labels.find(address);
        if (it == labels.end()) continue;
        node.kind = NodeKind::Labeled;
        node.category = it->second.category;
        node.label = it->second.label;
    }
}

}  // namespace

LabelDirectory parse_label_directory(std::string_view csv) {
    LabelDirectory out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(csv)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = split_csv_row(line);
        if (line_no == 1 && !cols.empty() && cols[0] == "address") continue;
        const auto where = "labels line " + std::to_string(line_no);
        if (cols.size() != 3) throw schema_error(where + ": expected address,category,label");
        if (!Address::valid(cols[0])) throw schema_error(where + ": malformed address '" + cols[0] + "'");
        out[Address::parse(cols[0]).to_hex()] = {cols[1], cols[2]};
    }
    return out;
}

LabelDirectory load_label_directory(const std::filesystem::path& path) {
    return parse_label_directory(read_text_file(path));
}

void TraceConfig::validate() const {
    if (max_hops < 1) throw validation_error("max_hops must be at least 1");
    if (degree_cap < 1) throw validation_error("degree_cap must be at least 1");
    if (concurrency < 1) throw validation_error("concurrency must be at least 1");
}

bool TraceConfig::admits(std::uint64_t timestamp) const {
    return direction == Direction::Forward ? timestamp > attack_timestamp : timestamp < attack_timestamp;
}

std::uint64_t Provider::fetch_tx_count(const std::string& address) {
    return fetch_normal(address).size() + fetch_internal(address).size() + fetch_token_transfers(address).size();
}

TransferEdge parse_transfer_record(std::string_view json_line) {
    json j;
    try {
        j = json::parse(json_line);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("transfer record: ") + e.what());
    }
    if (!j.is_object()) throw schema_error("transfer record: expected an object");
    TransferEdge e;
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "normal")
            e.kind = EdgeKind::Normal;
        else if (kind == "internal")
            e.kind = EdgeKind::Internal;
        else if (kind == "token")
            e.kind = EdgeKind::Token;
        else
            throw schema_error("transfer record: unknown kind '" + kind + "'");
        e.from = normalize_address(j.at("from").get<std::string>(), "transfer record");
        e.to = normalize_address(j.at("to").get<std::string>(), "transfer record");
        e.value = parse_amount(j.at("value"), "transfer record");
        e.tx_hash = to_lower(j.at("hash").get<std::string>());
        e.timestamp = parse_u64(j.at("timestamp"), "transfer record");
        const bool has_token = j.contains("token") && !j["token"].is_null();
        if (has_token != (e.kind == EdgeKind::Token))
            throw schema_error("transfer record: token fields are required exactly for token transfers");
        if (has_token) {
            const auto& t = j["token"];
            TokenInfo info;
            info.name = t.at("name").get<std::string>();
            info.symbol = t.at("symbol").get<std::string>();
            info.decimals = static_cast<std::uint32_t>(parse_u64(t.at("decimals"), "transfer record"));
            if (t.contains("contract")) info.contract = normalize_address(t["contract"].get<std::string>(), "token");
            e.token = info;
        }
    } catch (const json::exception& ex) {
        throw schema_error(std::string("transfer record: ") + ex.what());
    } catch (const Error& ex) {
        if (ex.kind() == ErrorKind::Validation) throw schema_error(ex.what());
        throw;
    }
    return e;
}

FixtureProvider::FixtureProvider(std::filesystem::path directory) : directory_(std::move(directory)) {}

const std::vector<TransferEdge>& FixtureProvider::load(const std::string& address) {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(address);
    if (it != cache_.end()) return it->second;
    std::vector<TransferEdge> edges;
    const auto path = directory_ / (address + ".jsonl");
    if (std::filesystem::exists(path)) {
        std::istringstream in(read_text_file(path));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                edges.push_back(parse_transfer_record(line));
            } catch (const Error& e) {
                throw Error(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    return cache_.emplace(address, std::move(edges)).first->second;
}

std::vector<TransferEdge> FixtureProvider::of_kind(const std::string& address, EdgeKind kind) {
    std::vector<TransferEdge> out;
    for (const auto& e : load(address))
        if (e.kind == kind) out.push_back(e);
    return out;
}

std::vector<TransferEdge> FixtureProvider::fetch_normal(const std::string& address) {
    return of_kind(address, EdgeKind::Normal);
}

std::vector<TransferEdge> FixtureProvider::fetch_internal(const std::string& address) {
    return of_kind(address, EdgeKind::Internal);
}

std::vector<TransferEdge> FixtureProvider::fetch_token_transfers(const std::string& address) {
    return of_kind(address, EdgeKind::Token);
}

std::uint64_t FixtureProvider::fetch_tx_count(const std::string& address) { return load(address).size(); }

FundFlowGraph build_graph(const std::vector<std::string>& seeds, const TraceConfig& config, Provider& provider,
                          const LabelDirectory& labels) {
    config.validate();
    if (seeds.empty()) throw validation_error("build_graph: no seed addresses");
    FundFlowGraph graph;
    graph.config = config;
    for (const auto& s : seeds) {
        const auto address = normalize_address(s, "seed");
        graph.seeds.insert(address);
        graph.nodes[address] = {address, NodeKind::Attacker, std::nullopt, std::nullopt};
        graph.distance[address] = 0;
    }

    struct Fetched {
        bool capped = false;
        std::vector<TransferEdge> edges;
        std::string failure;
        std::exception_ptr fatal;
    };

    std::vector<std::string> frontier(graph.seeds.begin(), graph.seeds.end());
    for (std::uint32_t hop = 1; hop <= config.max_hops && !frontier.empty(); ++hop) {
        std::vector<Fetched> results(frontier.size());
        run_bounded(frontier.size(), config.concurrency, [&](std::size_t i) {
            const auto& address = frontier[i];
            auto& r = results[i];
            try {
                if (!graph.seeds.count(address) && provider.fetch_tx_count(address) > config.degree_cap) {
                    r.capped = true;
                    return;
                }
                r.edges = provider.fetch_normal(address);
                for (auto part : {provider.fetch_internal(address), provider.fetch_token_transfers(address)})
                    std::move(part.begin(), part.end(), std::back_inserter(r.edges));
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::Provider)
                    r.failure = address + ": " + e.what();
                else
                    r.fatal = std::current_exception();
            } catch (...) {
                r.fatal = std::current_exception();
            }
        });

        std::set<std::string> next;
        std::vector<std::string> failures;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const auto& address = frontier[i];
            auto& r = results[i];
            if (r.fatal) std::rethrow_exception(r.fatal);
            if (!r.failure.empty()) {
                failures.push_back(r.failure);
                continue;
            }
            if (r.capped) {
                graph.capped.insert(address);
                continue;
            }
            graph.expanded.insert(address);
            for (auto& e : r.edges) {
                for (const auto* end : {&e.from, &e.to}) {
                    if (*end == address || graph.nodes.count(*end)) continue;
                    graph.nodes[*end] = {*end, NodeKind::Unlabeled, std::nullopt, std::nullopt};
                    graph.distance[*end] = hop;
                }
                if (!config.admits(e.timestamp)) continue;
                for (const auto* end : {&e.from, &e.to})
                    if (*end != address && !graph.expanded.count(*end) && !graph.capped.count(*end)) next.insert(*end);
                graph.edges.push_back(std::move(e));
            }
        }
        std::sort(graph.edges.begin(), graph.edges.end());
        graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
        if (!failures.empty()) {
            apply_labels(graph, labels);
            std::string message = "provider failed for " + std::to_string(failures.size()) + " address(es) at hop " +
                                   std::to_string(hop) + ": " + failures.front();
            throw PartialGraphError(message, std::move(graph));
        }
        frontier.clear();
        for (const auto& a : next)
            if (!graph.expanded.count(a) && !graph.capped.count(a)) frontier.push_back(a);
    }
    apply_labels(graph, labels);
    return graph;
}

bool FlowFilter::matches(const AccountNode& node) const {
    switch (field) {
        case Field::Category: return node.category && *node.category == value;
        case Field::Label: return node.label && *node.label == value;
        case Field::Address: return node.address == to_lower(value);
    }
    return false;
}

FlowResult query_flows(const FundFlowGraph& graph, const std::string& from, const FlowFilter& filter,
                       std::uint32_t max_path_len, std::string_view asset, bool reverse, std::size_t path_limit) {
    FlowResult result;
    const auto start = to_lower(from);
    if (!graph.nodes.count(start) || max_path_len == 0) return result;

    std::map<std::string, std::vector<const TransferEdge*>> out;
    for (const auto& e : graph.edges) {
        const bool selected = asset == kEther ? e.kind != EdgeKind::Token : (e.token && e.token->symbol == asset);
        if (selected) out[reverse ? e.to : e.from].push_back(&e);
    }

    std::set<const TransferEdge*> terminal;
    std::vector<std::string> nodes{start};
    std::set<std::string> on_path{start};
    std::vector<const TransferEdge*> edges;

    std::function<void(const std::string&)> walk = [&](const std::string& at) {
        auto it = out.find(at);
        if (it == out.end()) return;
        for (const auto* e : it->second) {
            if (result.truncated) return;
            const auto& next = reverse ? e->from : e->to;
            if (on_path.count(next)) continue;
            nodes.push_back(next);
            on_path.insert(next);
            edges.push_back(e);
            auto n = graph.nodes.find(next);
            if (n != graph.nodes.end() && filter.matches(n->second)) {
                if (result.paths.size() >= path_limit) {
                    result.truncated = true;
                } else {
                    FlowPath p{nodes, edges, edges.front()->value};
                    for (const auto* pe : edges) p.bottleneck = std::min(p.bottleneck, pe->value);
                    result.paths.push_back(std::move(p));
                    terminal.insert(e);
                }
            }
            if (edges.size() < max_path_len) walk(next);
            edges.pop_back();
            on_path.erase(next);
            nodes.pop_back();
        }
    };
    walk(start);
    for (const auto* e : terminal) result.aggregate += e->value;
    return result;
}

std::string export_graph(const FundFlowGraph& graph, GraphFormat format) {
    std::ostringstream o;
    switch (format) {
        case GraphFormat::Dot: {
            o << "digraph fund_flow {\n";
            for (const auto& [address, n] : graph.nodes) {
                o << "  " << dot_quote(address) << " [kind=" << dot_quote(to_string(n.kind));
                if (n.category) o << ", category=" << dot_quote(*n.category);
                if (n.label) o << ", label=" << dot_quote(*n.label);
                o << "];\n";
            }
            for (const auto& e : graph.edges) {
                o << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to) << " [kind=" << dot_quote(to_string(e.kind))
                  << ", value=" << dot_quote(to_decimal(e.value)) << ", tx_hash=" << dot_quote(e.tx_hash)
                  << ", timestamp=" << dot_quote(std::to_string(e.timestamp));
                if (e.token)
                    o << ", token_name=" << dot_quote(e.token->name) << ", token_symbol=" << dot_quote(e.token->symbol)
                      << ", token_decimals=" << dot_quote(std::to_string(e.token->decimals));
                o << "];\n";
            }
            o << "}\n";
            break;
        }
        case GraphFormat::GraphML: {
            o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
              << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
            for (const char* k : {"kind", "category", "label"})
                o << "  <key id=\"n_" << k << "\" for=\"node\" attr.name=\"" << k << "\" attr.type=\"string\"/>\n";
            for (const char* k : {"kind", "value", "tx_hash", "timestamp", "token_name", "token_symbol", "token_decimals"})
                o << "  <key id=\"e_" << k << "\" for=\"edge\" attr.name=\"" << k << "\" attr.type=\"string\"/>\n";
            o << "  <graph id=\"fund_flow\" edgedefault=\"directed\">\n";
            for (const auto& [address, n] : graph.nodes) {
                o << "    <node id=\"" << address << "\">";
                o << "<data key=\"n_kind\">" << to_string(n.kind) << "</data>";
                if (n.category) o << "<data key=\"n_category\">" << xml_escape(*n.category) << "</data>";
                if (n.label) o << "<data key=\"n_label\">" << xml_escape(*n.label) << "</data>";
                o << "</node>\n";
            }
            std::size_t id = 0;
            for (const auto& e : graph.edges) {
                o << "    <edge id=\"e" << id++ << "\" source=\"" << e.from << "\" target=\"" << e.to << "\">"
                  << "<data key=\"e_kind\">" << to_string(e.kind) << "</data>"
                  << "<data key=\"e_value\">" << to_decimal(e.value) << "</data>"
                  << "<data key=\"e_tx_hash\">" << xml_escape(e.tx_hash) << "</data>"
                  << "<data key=\"e_timestamp\">" << e.timestamp << "</data>";
                if (e.token)
                    o << "<data key=\"e_token_name\">" << xml_escape(e.token->name) << "</data>"
                      << "<data key=\"e_token_symbol\">" << xml_escape(e.token->symbol) << "</data>"
                      << "<data key=\"e_token_decimals\">" << e.token->decimals << "</data>";
                o << "</edge>\n";
            }
            o << "  </graph>\n</graphml>\n";
            break;
        }
        case GraphFormat::Json: {
            json doc;
            doc["direction"] = to_string(graph.config.direction);
            doc["attack_timestamp"] = graph.config.attack_timestamp;
            doc["max_hops"] = graph.config.max_hops;
            doc["degree_cap"] = graph.config.degree_cap;
            json nodes = json::array();
            for (const auto& [address, n] : graph.nodes) {
                json jn;
                jn["address"] = address;
                jn["kind"] = to_string(n.kind);
                if (n.category) jn["category"] = *n.category;
                if (n.label) jn["label"] = *n.label;
                jn["expanded"] = graph.expanded.count(address) != 0;
                jn["capped"] = graph.capped.count(address) != 0;
                nodes.push_back(std::move(jn));
            }
            json edges = json::array();
            for (const auto& e : graph.edges) {
                json je;
                je["kind"] = to_string(e.kind);
                je["from"] = e.from;
                je["to"] = e.to;
                je["value"] = to_decimal(e.value);
                je["tx_hash"] = e.tx_hash;
                je["timestamp"] = e.timestamp;
                if (e.token)
                    je["token"] = {{"name", e.token->name},
                                   {"symbol", e.token->symbol},
                                   {"decimals", e.token->decimals},
                                   {"contract", e.token->contract}};
                edges.push_back(std::move(je));
            }
            doc["nodes"] = std::move(nodes);
            doc["edges"] = std::move(edges);
            o << doc.dump(2) << "\n";
            break;
        }
    }
    return o.str();
}

std::pair<std::string, std::string> export_neo4j_csv(const FundFlowGraph& graph) {
    std::ostringstream nodes, edges;
    nodes << "address:ID,kind,category,label,:LABEL\n";
    for (const auto& [address, n] : graph.nodes) {
        std::string label = "Account;";
        label += n.kind == NodeKind::Attacker ? "Attacker" : n.kind == NodeKind::Labeled ? "Labeled" : "Unlabeled";
        nodes << address << ',' << to_string(n.kind) << ',' << csv_field(n.category.value_or("")) << ','
              << csv_field(n.label.value_or("")) << ',' << label << '\n';
    }
    edges << ":START_ID,:END_ID,:TYPE,value,tx_hash,timestamp:long,token_name,token_symbol,token_decimals\n";
    for (const auto& e : graph.edges) {
        std::string type(to_string(e.kind));
        std::transform(type.begin(), type.end(), type.begin(), [](unsigned char c) { return std::toupper(c); });
        edges << e.from << ',' << e.to << ',' << type << ',' << to_decimal(e.value) << ',' << e.tx_hash << ','
              << e.timestamp << ',' << csv_field(e.token ? e.token->name : "") << ','
              << csv_field(e.token ? e.token->symbol : "") << ',' << (e.token ? std::to_string(e.token->decimals) : "")
              << '\n';
    }
    return {nodes.str(), edges.str()};
}

}  // namespace horus
