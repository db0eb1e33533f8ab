// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

// Same configuration as the provider itself so both see one httplib.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <json.hpp>

#include "horus/errors.hpp"
#include "horus/fund_tracer.hpp"

namespace horus {
namespace {

using json = nlohmann::json;

const std::string kA = "0x" + std::string(40, 'a');
const std::string kB = "0x" + std::string(40, 'b');

/// Etherscan look-alike on a loopback port.
class FakeEtherscan {
public:
    FakeEtherscan() {
        server_.Get("/api", [this](const httplib::Request& req, httplib::Response& res) {
            const auto n = ++requests_;
            last_query_ = req.params;
            if (n <= fail_first_) {
                res.status = fail_status_;
                return;
            }
            res.set_content(body_(req), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEtherscan() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

    std::function<std::string(const httplib::Request&)> body_ = [](const httplib::Request&) {
        return R"({"status":"0","message":"No transactions found","result":[]})";
    };
    std::atomic<int> requests_{0};
    int fail_first_ = 0;
    int fail_status_ = 429;
    httplib::Params last_query_;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

HttpProviderOptions options(const std::string& url) {
    HttpProviderOptions o;
    o.base_url = url;
    o.api_key = "KEY";
    o.requests_per_second = 0;
    o.max_attempts = 3;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.timeout = std::chrono::seconds(2);
    return o;
}

json ok(json rows) { return {{"status", "1"}, {"message", "OK"}, {"result", std::move(rows)}}; }

TEST(HttpProvider, MapsNormalTransactions) {
    FakeEtherscan server;
    server.body_ = [](const httplib::Request&) {
        return ok({{{"from", kA}, {"to", kB}, {"value", "1000"}, {"hash", "0xABC"}, {"timeStamp", "1600000001"},
                    {"isError", "0"}},
                   {{"from", kA}, {"to", kB}, {"value", "5"}, {"hash", "0xdef"}, {"timeStamp", "1600000002"},
                    {"isError", "1"}}})
            .dump();
    };
    HttpProvider p(options(server.url()));
    const auto edges = p.fetch_normal(kA);
    ASSERT_EQ(edges.size(), 1u);
    EXPECT_EQ(edges[0].kind, EdgeKind::Normal);
    EXPECT_EQ(edges[0].from, kA);
    EXPECT_EQ(edges[0].to, kB);
    EXPECT_EQ(edges[0].value, BigInt(1000));
    EXPECT_EQ(edges[0].tx_hash, "0xabc");
    EXPECT_EQ(edges[0].timestamp, 1600000001u);
    EXPECT_FALSE(edges[0].token);
    EXPECT_EQ(server.last_query_.find("action")->second, "txlist");
    EXPECT_EQ(server.last_query_.find("module")->second, "account");
    EXPECT_EQ(server.last_query_.find("address")->second, kA);
    EXPECT_EQ(server.last_query_.find("apikey")->second, "KEY");
}

TEST(HttpProvider, MapsTokenTransfers) {
    FakeEtherscan server;
    server.body_ = [](const httplib::Request&) {
        return ok({{{"from", kA},
                    {"to", kB},
                    {"value", "500000000"},
                    {"hash", "0x1"},
                    {"timeStamp", "7"},
                    {"tokenName", "Tether USD"},
                    {"tokenSymbol", "USDT"},
                    {"tokenDecimal", "6"},
                    {"contractAddress", "0x" + std::string(40, 'c')}}})
            .dump();
    };
    HttpProvider p(options(server.url()));
    const auto edges = p.fetch_token_transfers(kA);
    ASSERT_EQ(edges.size(), 1u);
    ASSERT_TRUE(edges[0].token);
    EXPECT_EQ(edges[0].token->symbol, "USDT");
    EXPECT_EQ(edges[0].token->decimals, 6u);
    EXPECT_EQ(edges[0].value, BigInt(500000000));
    EXPECT_EQ(server.last_query_.find("action")->second, "tokentx");
}

TEST(HttpProvider, EmptyHistory) {
    FakeEtherscan server;
    HttpProvider p(options(server.url()));
    EXPECT_TRUE(p.fetch_internal(kA).empty());
    EXPECT_EQ(server.last_query_.find("action")->second, "txlistinternal");
    EXPECT_EQ(p.fetch_tx_count(kA), 0u);
}

TEST(HttpProvider, RetriesRateLimitsAndServerErrors) {
    for (int status : {429, 503}) {
        FakeEtherscan server;
        server.fail_first_ = 2;
        server.fail_status_ = status;
        HttpProvider p(options(server.url()));
        EXPECT_TRUE(p.fetch_normal(kA).empty());
        EXPECT_EQ(server.requests_, 3);
    }
}

TEST(HttpProvider, ExhaustedRetriesAreProviderErrors) {
    FakeEtherscan server;
    server.fail_first_ = 100;
    HttpProvider p(options(server.url()));
    try {
        p.fetch_normal(kA);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Provider);
        EXPECT_NE(std::string(e.what()).find("retries exhausted"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("HTTP 429"), std::string::npos);
    }
    EXPECT_EQ(server.requests_, 3);
}

TEST(HttpProvider, ApiErrorsAreNotRetried) {
    FakeEtherscan server;
    server.body_ = [](const httplib::Request&) {
        return R"({"status":"0","message":"NOTOK","result":"Invalid API Key"})";
    };
    HttpProvider p(options(server.url()));
    try {
        p.fetch_normal(kA);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Provider);
        EXPECT_NE(std::string(e.what()).find("Invalid API Key"), std::string::npos);
    }
    EXPECT_EQ(server.requests_, 1);
}

TEST(HttpProvider, UnreachableHost) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    HttpProvider p(options("http://127.0.0.1:" + std::to_string(port) + "/api"));
    try {
        p.fetch_normal(kA);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Provider);
        EXPECT_NE(std::string(e.what()).find("transport error"), std::string::npos);
    }
}

TEST(HttpProvider, RejectsUrlWithoutScheme) { EXPECT_THROW(HttpProvider(options("localhost/api")), Error); }

}  // namespace
}  // namespace horus
