// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "horus/errors.hpp"
#include "horus/word.hpp"

namespace horus {

enum class NodeKind { Attacker, Labeled, Unlabeled };
enum class EdgeKind { Normal, Internal, Token };
enum class Direction { Forward, Backward };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
std::string_view to_string(Direction direction);
std::optional<Direction> direction_from_name(std::string_view name);

struct AccountNode {
    std::string address;
    NodeKind kind = NodeKind::Unlabeled;
    std::optional<std::string> category;
    std::optional<std::string> label;
};

struct TokenInfo {
    std::string name;
    std::string symbol;
    std::uint32_t decimals = 0;
    std::string contract;
    friend auto operator<=>(const TokenInfo&, const TokenInfo&) = default;
};

struct TransferEdge {
    EdgeKind kind = EdgeKind::Normal;
    std::string from;
    std::string to;
    BigInt value = 0;  // wei or token base units
    std::string tx_hash;
    std::uint64_t timestamp = 0;
    std::optional<TokenInfo> token;

    friend bool operator==(const TransferEdge&, const TransferEdge&) = default;
    friend bool operator<(const TransferEdge& a, const TransferEdge& b);
};

struct LabelEntry {
    std::string category;
    std::string label;
};

using LabelDirectory = std::map<std::string, LabelEntry>;

/// Reads `address,category,label` rows; a header row is skipped. Addresses
/// are lowercased. Throws Error(Schema) naming the line on malformed rows.
LabelDirectory load_label_directory(const std::filesystem::path& path);
LabelDirectory parse_label_directory(std::string_view csv);

struct TraceConfig {
    Direction direction = Direction::Forward;
    std::uint32_t max_hops = 1;
    std::uint64_t degree_cap = 1000;
    std::uint64_t attack_timestamp = 0;
    std::size_t concurrency = 4;

    void validate() const;
    /// Strict comparison; transfers in the attack's own second are dropped.
    bool admits(std::uint64_t timestamp) const;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::vector<TransferEdge> fetch_normal(const std::string& address) = 0;
    virtual std::vector<TransferEdge> fetch_internal(const std::string& address) = 0;
    virtual std::vector<TransferEdge> fetch_token_transfers(const std::string& address) = 0;
    /// Normal + internal + token transfers involving the address.
    virtual std::uint64_t fetch_tx_count(const std::string& address);
};

/// Reads `<directory>/<address>.jsonl`, one transfer per line. Unknown
/// addresses have no transfers.
class FixtureProvider : public Provider {
public:
    explicit FixtureProvider(std::filesystem::path directory);
    std::vector<TransferEdge> fetch_normal(const std::string& address) override;
    std::vector<TransferEdge> fetch_internal(const std::string& address) override;
    std::vector<TransferEdge> fetch_token_transfers(const std::string& address) override;
    std::uint64_t fetch_tx_count(const std::string& address) override;

private:
    const std::vector<TransferEdge>& load(const std::string& address);
    std::vector<TransferEdge> of_kind(const std::string& address, EdgeKind kind);

    std::filesystem::path directory_;
    std::mutex mutex_;
    std::map<std::string, std::vector<TransferEdge>> cache_;
};

/// Parses one provider fixture line.
TransferEdge parse_transfer_record(std::string_view json_line);

struct HttpProviderOptions {
    std::string base_url;  // e.g. https://api.etherscan.io/api
    std::string api_key;
    double requests_per_second = 5.0;
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::seconds timeout{10};
};

/// Etherscan-compatible client: account/txlist, account/txlistinternal and
/// account/tokentx. Transport failures and rate-limit replies are retried
/// with exponential backoff; exhaustion throws Error(Provider).
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderOptions options);
    ~HttpProvider() override;
    std::vector<TransferEdge> fetch_normal(const std::string& address) override;
    std::vector<TransferEdge> fetch_internal(const std::string& address) override;
    std::vector<TransferEdge> fetch_token_transfers(const std::string& address) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct FundFlowGraph {
    std::map<std::string, AccountNode> nodes;
    std::vector<TransferEdge> edges;  // sorted, unique
    std::set<std::string> seeds;
    std::set<std::string> expanded;
    std::set<std::string> capped;  // over the degree cap, not expanded
    /// Hop distance at which each node was discovered.
    std::map<std::string, std::uint32_t> distance;
    TraceConfig config;
};

class PartialGraphError : public Error {
public:
    PartialGraphError(const std::string& message, FundFlowGraph graph)
        : Error(ErrorKind::Partial, message), graph_(std::move(graph)) {}
    const FundFlowGraph& graph() const { return graph_; }

private:
    FundFlowGraph graph_;
};

/// Breadth-first expansion from the seeds. Fetches for one frontier run with
/// at most config.concurrency requests in flight and merge in address order.
FundFlowGraph build_graph(const std::vector<std::string>& seeds, const TraceConfig& config, Provider& provider,
                          const LabelDirectory& labels);

struct FlowFilter {
    enum class Field { Category, Label, Address };
    Field field = Field::Category;
    std::string value;

    bool matches(const AccountNode& node) const;
};

struct FlowPath {
    std::vector<std::string> nodes;
    std::vector<const TransferEdge*> edges;
    BigInt bottleneck = 0;
};

struct FlowResult {
    std::vector<FlowPath> paths;
    /// Sum of the distinct edges that end a found path.
    BigInt aggregate = 0;
    bool truncated = false;
};

/// Asset selector for query_flows: "ETH" covers normal and internal
/// transfers, any other value selects token edges by symbol.
inline constexpr std::string_view kEther = "ETH";

/// Enumerates simple paths from `from` of at most max_path_len edges that end
/// at a node matching the filter. With `reverse`, edges are walked against
/// their direction (where the funds came from). Stops after `path_limit`
/// paths.
FlowResult query_flows(const FundFlowGraph& graph, const std::string& from, const FlowFilter& filter,
                       std::uint32_t max_path_len, std::string_view asset = kEther, bool reverse = false,
                       std::size_t path_limit = 100000);

enum class GraphFormat { Dot, GraphML, Json };

std::string export_graph(const FundFlowGraph& graph, GraphFormat format);
/// Neo4j import pair: nodes.csv and edges.csv.
std::pair<std::string, std::string> export_neo4j_csv(const FundFlowGraph& graph);

}  // namespace horus
