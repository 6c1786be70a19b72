#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "fbjudge/backends.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "fbjudge/error.hpp"
#include "fbjudge/log.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kHttpOk = 200;
constexpr int kHttpUnauthorized = 401;
constexpr int kHttpForbidden = 403;
constexpr int kHttpRequestTimeout = 408;
constexpr int kHttpTooManyRequests = 429;
constexpr int kHttpServerErrorMin = 500;

bool transient_status(int status) {
    return status == kHttpRequestTimeout || status == kHttpTooManyRequests ||
           status >= kHttpServerErrorMin;
}

double jitter_unit() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::string snippet(std::string_view body) {
    constexpr std::size_t kMax = 200;
    return std::string(body.substr(0, kMax)) + (body.size() > kMax ? "..." : "");
}

}  // namespace

void BackendSpec::validate() const {
    if (name.empty()) throw ConfigError("backend name must be non-empty");
    if (max_parallel < 1) {
        throw ConfigError("backend '" + name + "': max_parallel must be >= 1");
    }
    if (!(request_timeout_s > 0.0)) {
        throw ConfigError("backend '" + name + "': request_timeout must be > 0");
    }
    if (max_output_tokens < 1) {
        throw ConfigError("backend '" + name + "': max_output_tokens must be >= 1");
    }
}

std::string canonical_params(const DecodingParams& params, int max_output_tokens) {
    // nlohmann::json sorts keys, which makes the text canonical.
    nlohmann::json j;
    j["temperature"] = params.temperature;
    j["max_tokens"] = max_output_tokens;
    return j.dump();
}

std::string request_key(std::string_view model_id, const RenderedPrompt& prompt,
                        const DecodingParams& params, int max_output_tokens) {
    // JSON string escaping keeps field boundaries unambiguous.
    ordered_json j;
    j["model_id"] = model_id;
    j["system"] = prompt.system;
    j["user"] = prompt.user;
    j["params"] = canonical_params(params, max_output_tokens);
    return sha256_hex(j.dump());
}

ordered_json ChatExchange::log_entry() const {
    ordered_json j;
    j["id"] = id;
    j["backend"] = backend_name;
    j["model_id"] = model_id;
    j["temperature"] = params.temperature;
    j["max_tokens"] = max_output_tokens;
    j["timestamp"] = timestamp;
    j["latency_ms"] = latency_ms;
    j["cache_hit"] = cache_hit;
    j["attempts"] = attempts;
    j["retries"] = attempts - 1;
    j["response_chars"] = response_text.size();
    return j;
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt, double unit) const {
    const double base = static_cast<double>(initial_backoff.count()) *
                        std::pow(2.0, static_cast<double>(std::max(0, attempt - 1)));
    const double capped = std::min(base, static_cast<double>(max_backoff.count()));
    const double factor = 1.0 + jitter * (2.0 * unit - 1.0);
    return std::chrono::milliseconds(static_cast<long long>(std::max(0.0, capped * factor)));
}

HttpChatBackend::HttpChatBackend(BackendSpec spec, RetryPolicy retry)
    : spec_(std::move(spec)), retry_(std::move(retry)) {
    spec_.validate();
    if (retry_.max_attempts < 1) retry_.max_attempts = 1;
    if (!retry_.sleep) {
        retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }

    std::string_view url = spec_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos ||
        (url.substr(0, scheme_end) != "http" && url.substr(0, scheme_end) != "https")) {
        throw ConfigError("backend '" + spec_.name + "': base_url must start with http:// or https://");
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    scheme_host_port_ = std::string(url.substr(0, path_begin));
    std::string prefix = path_begin == std::string_view::npos ? "" : std::string(url.substr(path_begin));
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
}

ordered_json HttpChatBackend::request_body(const RenderedPrompt& prompt,
                                           const DecodingParams& params) const {
    ordered_json body;
    body["model"] = spec_.model_id;
    body["messages"] = ordered_json::array({
        ordered_json{{"role", "system"}, {"content", prompt.system}},
        ordered_json{{"role", "user"}, {"content", prompt.user}},
    });
    body["temperature"] = params.temperature;
    body["max_tokens"] = spec_.max_output_tokens;
    return body;
}

std::string parse_chat_response(std::string_view body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("response is not JSON: " + snippet(body));
    }
    const auto* content = [&]() -> const nlohmann::json* {
        if (!j.is_object()) return nullptr;
        auto choices = j.find("choices");
        if (choices == j.end() || !choices->is_array() || choices->empty()) return nullptr;
        const auto& first = (*choices)[0];
        if (!first.is_object()) return nullptr;
        auto message = first.find("message");
        if (message == first.end() || !message->is_object()) return nullptr;
        auto c = message->find("content");
        return c == message->end() ? nullptr : &*c;
    }();
    if (content == nullptr) {
        throw ProtocolError("response has no choices[0].message: " + snippet(body));
    }
    if (content->is_null()) {
        throw EmptyResponse("assistant message content is null");
    }
    if (!content->is_string()) {
        throw ProtocolError("assistant message content is not a string");
    }
    std::string text = content->get<std::string>();
    if (text.empty()) {
        throw EmptyResponse("assistant message is empty");
    }
    return text;
}

ChatExchange HttpChatBackend::complete(const RenderedPrompt& prompt,
                                       const DecodingParams& params) {
    std::string api_key;
    if (!spec_.api_key_env.empty()) {
        const char* value = std::getenv(spec_.api_key_env.c_str());
        if (value == nullptr || *value == '\0') {
            throw AuthError("environment variable " + spec_.api_key_env + " is not set");
        }
        api_key = value;
    }
    if (calls_.fetch_add(1) >= spec_.max_requests && spec_.max_requests != 0) {
        calls_.fetch_sub(1);
        throw BudgetExceeded("backend '" + spec_.name + "' reached its cap of " +
                             std::to_string(spec_.max_requests) + " requests");
    }

    const std::string body = request_body(prompt, params).dump();
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const auto timeout = std::chrono::duration<double>(spec_.request_timeout_s);
    const auto started = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status == kHttpOk) {
            ChatExchange ex;
            ex.response_text = parse_chat_response(res->body);
            ex.id = request_key(spec_.model_id, prompt, params, spec_.max_output_tokens);
            ex.backend_name = spec_.name;
            ex.model_id = spec_.model_id;
            ex.prompt = prompt;
            ex.params = params;
            ex.max_output_tokens = spec_.max_output_tokens;
            ex.latency_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - started)
                                .count();
            ex.timestamp = format_utc(std::chrono::system_clock::now());
            ex.attempts = attempt;
            return ex;
        } else if (res->status == kHttpUnauthorized || res->status == kHttpForbidden) {
            throw AuthError("HTTP " + std::to_string(res->status) + " from " + spec_.name);
        } else if (!transient_status(res->status)) {
            throw HttpStatusError(res->status, "HTTP " + std::to_string(res->status) + " from " +
                                                   spec_.name + ": " + snippet(res->body));
        } else {
            last_error = "HTTP " + std::to_string(res->status);
        }

        if (attempt < retry_.max_attempts) {
            warn("backend '" + spec_.name + "': " + last_error + ", retrying (attempt " +
                 std::to_string(attempt + 1) + "/" + std::to_string(retry_.max_attempts) + ")");
            retry_.sleep(retry_.delay_for(attempt, jitter_unit()));
        }
    }
    throw TransportError("backend '" + spec_.name + "': giving up after " +
                         std::to_string(retry_.max_attempts) + " attempts (" + last_error + ")");
}

}  // namespace fbjudge
