// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <thread>

#include "horus/fund_tracer.hpp"

namespace horus {

using json = nlohmann::json;

struct HttpProvider::Impl {
    HttpProviderOptions options;
    std::string origin;  // scheme://host[:port]
    std::string path;
    std::mutex pace_mutex;
    std::chrono::steady_clock::time_point next_slot{};

    void pace() {
        if (options.requests_per_second <= 0) return;
        const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / options.requests_per_second));
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard lock(pace_mutex);
            const auto now = std::chrono::steady_clock::now();
            slot = std::max(now, next_slot);
            next_slot = slot + interval;
        }
        std::this_thread::sleep_until(slot);
    }

    json request(const std::string& action, const std::string& address) {
        httplib::Params params{{"module", "account"}, {"action", action},  {"address", address},
                               {"startblock", "0"},   {"endblock", "99999999"}, {"sort", "asc"}};
        if (!options.api_key.empty()) params.emplace("apikey", options.api_key);
        const auto target = httplib::append_query_params(path, params);

        std::string last_error;
        auto backoff = options.initial_backoff;
        for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            pace();
            httplib::Client client(origin);
            client.set_connection_timeout(options.timeout);
            client.set_read_timeout(options.timeout);
            auto res = client.Get(target);
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) throw Error(ErrorKind::Provider, action + " " + address + ": HTTP " + std::to_string(res->status));
            json body;
            try {
                body = json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::Provider, action + " " + address + ": malformed response: " + e.what());
            }
            const auto status = body.value("status", std::string("0"));
            const auto message = body.value("message", std::string());
            if (status == "1") return body.value("result", json::array());
            // Etherscan answers status 0 both for empty histories and errors.
            if (message.rfind("No transactions found", 0) == 0) return json::array();
            const auto detail = body.contains("result") && body["result"].is_string() ? body["result"].get<std::string>()
                                                                                    : message;
            if (detail.find("rate limit") != std::string::npos) {
                last_error = "rate limited: " + detail;
                continue;
            }
            throw Error(ErrorKind::Provider, action + " " + address + ": " + detail);
        }
        throw Error(ErrorKind::Provider, action + " " + address + ": retries exhausted (" + last_error + ")");
    }

    std::vector<TransferEdge> fetch(const std::string& action, EdgeKind kind, const std::string& address) {
        const auto rows = request(action, address);
        std::vector<TransferEdge> out;
        for (const auto& r : rows) {
            try {
                if (r.value("isError", std::string("0")) == "1") continue;
                TransferEdge e;
                e.kind = kind;
                e.from = to_lower(r.at("from").get<std::string>());
                e.to = to_lower(r.value("to", std::string()));
                // Contract creations carry an empty `to`; the created account
                // is reported separately.
                if (e.to.empty()) e.to = to_lower(r.value("contractAddress", std::string()));
                if (!Address::valid(e.from) || !Address::valid(e.to)) continue;
                e.from = Address::parse(e.from).to_hex();
                e.to = Address::parse(e.to).to_hex();
                e.value = parse_unsigned(r.at("value").get<std::string>());
                e.tx_hash = to_lower(r.at("hash").get<std::string>());
                const auto ts = parse_unsigned(r.at("timeStamp").get<std::string>());
                if (ts > std::numeric_limits<std::uint64_t>::max()) continue;
                e.timestamp = ts.convert_to<std::uint64_t>();
                if (kind == EdgeKind::Token) {
                    TokenInfo t;
                    t.name = r.value("tokenName", std::string());
                    t.symbol = r.value("tokenSymbol", std::string());
                    const auto decimals = r.value("tokenDecimal", std::string("0"));
                    t.decimals = decimals.empty() ? 0 : static_cast<std::uint32_t>(std::stoul(decimals));
                    const auto contract = r.value("contractAddress", std::string());
                    if (Address::valid(contract)) t.contract = Address::parse(contract).to_hex();
                    e.token = t;
                }
                out.push_back(std::move(e));
            } catch (const std::exception& ex) {
                throw Error(ErrorKind::Provider, action + " " + address + ": malformed record: " + ex.what());
            }
        }
        return out;
    }
};

HttpProvider::HttpProvider(HttpProviderOptions options) : impl_(std::make_unique<Impl>()) {
    auto url = options.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw validation_error("provider URL needs a scheme: '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    impl_->origin = url.substr(0, path_start);
    impl_->path = path_start == std::string::npos ? "/api" : url.substr(path_start);
    if (options.max_attempts < 1) options.max_attempts = 1;
    impl_->options = std::move(options);
}

HttpProvider::~HttpProvider() = default;

std::vector<TransferEdge> HttpProvider::fetch_normal(const std::string& address) {
    return impl_->fetch("txlist", EdgeKind::Normal, address);
}

std::vector<TransferEdge> HttpProvider::fetch_internal(const std::string& address) {
    return impl_->fetch("txlistinternal", EdgeKind::Internal, address);
}

std::vector<TransferEdge> HttpProvider::fetch_token_transfers(const std::string& address) {
    return impl_->fetch("tokentx", EdgeKind::Token, address);
}

}  // namespace horus
