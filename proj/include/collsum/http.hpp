#pragma once

#include "collsum/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

// <resolv.h>, pulled in by httplib, defines _res, which Eigen uses as an identifier.
#ifdef _res
#undef _res
#endif

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <thread>

namespace collsum {

/// Non-retryable HTTP status (4xx other than 429).
class HttpStatusError : public Error {
public:
    HttpStatusError(int status, std::string body)
        : Error("HTTP " + std::to_string(status) + ": " + body.substr(0, 300)), status_(status), body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
};

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

inline SplitUrl split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw Error("endpoint URL must include a scheme: " + std::string(url));
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

/// Reads a secret from the environment; empty when unset.
inline std::string env_secret(const std::string& variable) {
    if (variable.empty()) return {};
    const char* value = std::getenv(variable.c_str());
    return value ? std::string(value) : std::string();
}

/// POSTs a JSON body and parses the JSON reply. Connection failures, 429 and
/// 5xx responses are retried with exponential backoff up to
/// `policy.max_attempts`; the last RetryableError is rethrown when attempts run
/// out. Other non-2xx statuses throw HttpStatusError immediately.
inline nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const std::string& bearer_token,
                                const RetryPolicy& policy,
                                const std::function<void(std::chrono::milliseconds)>& sleep =
                                    [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    const auto target = split_url(url);
    const std::string payload = body.dump();
    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            httplib::Client client(target.origin);
            client.set_connection_timeout(policy.connect_timeout);
            client.set_read_timeout(policy.read_timeout);
            auto res = client.Post(target.path, headers, payload, "application/json");
            if (!res) throw RetryableError("request to " + url + " failed: " + httplib::to_string(res.error()));
            if (res->status == 429) throw RetryableError("rate limited by " + url);
            if (res->status >= 500) throw RetryableError("HTTP " + std::to_string(res->status) + " from " + url);
            if (res->status < 200 || res->status >= 300) throw HttpStatusError(res->status, res->body);
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error("malformed JSON reply from " + url + ": " + e.what());
            }
        } catch (const RetryableError&) {
            if (attempt >= policy.max_attempts) throw;
            sleep(backoff);
            backoff = std::min(policy.max_backoff,
                               std::chrono::milliseconds(static_cast<long long>(backoff.count() * policy.multiplier)));
        }
    }
}

} // namespace collsum
