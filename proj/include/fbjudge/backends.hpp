/// @file backends.hpp
/// @brief Chat-completion clients over an OpenAI-compatible wire protocol.

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <string>

#include <json.hpp>

#include "fbjudge/prompts.hpp"

namespace fbjudge {

inline constexpr int kDefaultMaxOutputTokens = 1024;

/// Identity and limits of one model endpoint.
struct BackendSpec {
    std::string name;
    std::string base_url;     // e.g. "https://api.openai.com/v1"
    std::string model_id;
    std::string api_key_env;  // empty: no Authorization header
    int max_output_tokens = kDefaultMaxOutputTokens;
    double request_timeout_s = 60.0;
    int max_parallel = 1;
    std::size_t max_requests = 0;  // 0 = unlimited

    /// Throws ConfigError on max_parallel < 1, request_timeout <= 0 or
    /// max_output_tokens < 1.
    void validate() const;
};

/// Sampling controls sent with every request. Anything not listed here is
/// left to the server default.
struct DecodingParams {
    double temperature = 0.0;

    bool greedy() const noexcept { return temperature == 0.0; }
    friend bool operator==(const DecodingParams&, const DecodingParams&) = default;
};

/// Canonical JSON text for the parameters that influence the response.
std::string canonical_params(const DecodingParams& params, int max_output_tokens);

/// SHA-256 over (model id, system text, user text, canonical params). Used as
/// cache key, mock key and exchange id.
std::string request_key(std::string_view model_id, const RenderedPrompt& prompt,
                        const DecodingParams& params, int max_output_tokens);

/// One prompt/response round trip with its metadata.
struct ChatExchange {
    std::string id;  // request_key
    std::string backend_name;
    std::string model_id;
    RenderedPrompt prompt;
    DecodingParams params;
    int max_output_tokens = kDefaultMaxOutputTokens;
    std::string response_text;  // raw assistant message
    double latency_ms = 0.0;
    bool cache_hit = false;
    std::string timestamp;  // UTC, when the response was first obtained
    int attempts = 1;

    /// Metadata only; the response text is stored elsewhere.
    nlohmann::ordered_json log_entry() const;
};

/// Shareable handle to a chat model. Implementations are thread-safe.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual const BackendSpec& spec() const = 0;

    /// Returns exactly one assistant message. Throws a BackendError subclass.
    virtual ChatExchange complete(const RenderedPrompt& prompt, const DecodingParams& params) = 0;

    /// Number of requests that reached the underlying model (network or
    /// script), excluding cache hits.
    virtual std::size_t calls() const = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{20000};
    double jitter = 0.25;  // +/- fraction applied to each delay
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for

    /// Delay before attempt `attempt + 1`, given `attempt` >= 1 failed tries.
    /// `unit` in [0, 1) drives the jitter.
    std::chrono::milliseconds delay_for(int attempt, double unit) const;
};

/// HTTP POST {base_url}/chat/completions. Retries transport errors, 408,
/// 429 and 5xx; 401/403 raise AuthError; other statuses raise
/// HttpStatusError without retry.
class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(BackendSpec spec, RetryPolicy retry = {});

    const BackendSpec& spec() const override { return spec_; }
    ChatExchange complete(const RenderedPrompt& prompt, const DecodingParams& params) override;
    std::size_t calls() const override { return calls_.load(); }

    /// The JSON body sent for a request.
    nlohmann::ordered_json request_body(const RenderedPrompt& prompt,
                                        const DecodingParams& params) const;

private:
    BackendSpec spec_;
    RetryPolicy retry_;
    std::string scheme_host_port_;
    std::string path_;
    std::atomic<std::size_t> calls_{0};
};

/// Extracts choices[0].message.content. Throws ProtocolError or EmptyResponse.
std::string parse_chat_response(std::string_view body);

}  // namespace fbjudge
