#pragma once

#include "collsum/corpus.hpp"
#include "collsum/error.hpp"
#include "collsum/http.hpp"
#include "collsum/text.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace collsum {

struct CompletionParams {
    std::string model = "stub";
    double temperature = 0.3;
    double top_p = 0.9;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    std::size_t max_output_tokens = 256;

    void validate() const {
        if (!(temperature >= 0.0)) throw Error("temperature must be >= 0");
        if (!(top_p > 0.0 && top_p <= 1.0)) throw Error("top_p must be in (0, 1]");
        if (max_output_tokens == 0) throw Error("max_output_tokens must be positive");
    }

    friend bool operator==(const CompletionParams&, const CompletionParams&) = default;
};

inline nlohmann::json to_json(const CompletionParams& p) {
    return {{"model", p.model}, {"temperature", p.temperature}, {"top_p", p.top_p},
            {"frequency_penalty", p.frequency_penalty}, {"presence_penalty", p.presence_penalty},
            {"max_output_tokens", p.max_output_tokens}};
}

inline CompletionParams completion_params_from_json(const nlohmann::json& j) {
    CompletionParams p;
    p.model = j.value("model", p.model);
    p.temperature = j.value("temperature", p.temperature);
    p.top_p = j.value("top_p", p.top_p);
    p.frequency_penalty = j.value("frequency_penalty", p.frequency_penalty);
    p.presence_penalty = j.value("presence_penalty", p.presence_penalty);
    p.max_output_tokens = j.value("max_output_tokens", p.max_output_tokens);
    return p;
}

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    /// Throws ContextOverflowError before sending anything when the prompt
    /// plus the requested output does not fit the context window.
    virtual std::string complete(const std::string& prompt, const CompletionParams& params) const = 0;
    virtual std::string id() const = 0;
    virtual std::size_t context_window() const = 0;

protected:
    void check_window(const std::string& prompt, const CompletionParams& params) const {
        params.validate();
        const std::size_t tokens = count_whitespace_tokens(prompt);
        if (tokens + params.max_output_tokens > context_window()) throw ContextOverflowError(tokens, context_window());
    }
};

inline constexpr std::string_view kTldrMarker = "Tl;dr:";

/// Offline backend: drops a trailing "Tl;dr:" marker, then returns the first
/// sentence of every paragraph (blank-line separated) joined by spaces and
/// cut to max_output_tokens whitespace tokens.
class StubCompletion final : public CompletionBackend {
public:
    explicit StubCompletion(std::size_t context_window = 4096) : window_(context_window) {}

    std::string complete(const std::string& prompt, const CompletionParams& params) const override {
        check_window(prompt, params);
        std::string_view body = prompt;
        const auto marker = body.rfind(kTldrMarker);
        if (marker != std::string_view::npos && normalize_whitespace(body.substr(marker + kTldrMarker.size())).empty())
            body = body.substr(0, marker);
        std::string out;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            auto next = body.find("\n\n", pos);
            if (next == std::string_view::npos) next = body.size();
            const std::string paragraph = normalize_whitespace(body.substr(pos, next - pos));
            if (!paragraph.empty()) {
                const auto sentences = segment_sentences({"", {}, paragraph, {}});
                if (!out.empty()) out += ' ';
                out += sentences.front().text;
            }
            pos = next + 2;
        }
        if (out.empty()) throw Error("stub completion got a prompt with no text");
        return truncate_whitespace_tokens(out, params.max_output_tokens);
    }

    std::string id() const override { return "stub-extractive:window=" + std::to_string(window_); }
    std::size_t context_window() const override { return window_; }

private:
    std::size_t window_;
};

struct CompletionBackendSpec {
    std::string kind = "stub"; ///< "stub" or "remote"
    std::string endpoint;
    std::string api_key_env = "COLLSUM_COMPLETION_API_KEY";
    std::size_t context_window = 4096;
    std::size_t max_in_flight = 4;
    RetryPolicy retry;
};

/// Client for completion services taking {"model", "prompt", "temperature",
/// "top_p", "frequency_penalty", "presence_penalty", "max_tokens"} and
/// replying {"choices": [{"text"}]}.
class RemoteCompletion final : public CompletionBackend {
public:
    explicit RemoteCompletion(CompletionBackendSpec spec) : spec_(std::move(spec)) {
        if (spec_.endpoint.empty()) throw Error("remote completion backend requires an endpoint");
    }

    std::string complete(const std::string& prompt, const CompletionParams& params) const override {
        check_window(prompt, params);
        nlohmann::json body{{"model", params.model},
                            {"prompt", prompt},
                            {"temperature", params.temperature},
                            {"top_p", params.top_p},
                            {"frequency_penalty", params.frequency_penalty},
                            {"presence_penalty", params.presence_penalty},
                            {"max_tokens", params.max_output_tokens}};
        nlohmann::json reply;
        try {
            reply = post_json(spec_.endpoint, body, env_secret(spec_.api_key_env), spec_.retry);
        } catch (const HttpStatusError& e) {
            // Services report context overflow as a 400 with a descriptive body.
            if (e.status() == 400 && (e.body().find("context") != std::string::npos ||
                                      e.body().find("maximum") != std::string::npos))
                throw ContextOverflowError(count_whitespace_tokens(prompt), context_window());
            throw;
        }
        if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
            throw Error("completion reply has no choices");
        const auto& text = reply["choices"][0].at("text");
        if (!text.is_string()) throw Error("completion reply text is not a string");
        std::string out = normalize_whitespace(text.get<std::string>());
        if (out.empty()) throw Error("completion backend returned empty text");
        return out;
    }

    std::string id() const override { return "remote:" + spec_.endpoint; }
    std::size_t context_window() const override { return spec_.context_window; }

private:
    CompletionBackendSpec spec_;
};

inline std::unique_ptr<CompletionBackend> make_completion_backend(const CompletionBackendSpec& spec) {
    if (spec.kind == "stub") return std::make_unique<StubCompletion>(spec.context_window);
    if (spec.kind == "remote") return std::make_unique<RemoteCompletion>(spec);
    throw Error("unknown completion backend '" + spec.kind + "'");
}

} // namespace collsum
