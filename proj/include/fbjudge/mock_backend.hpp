/// @file mock_backend.hpp
/// @brief Deterministic scripted backend for offline runs and tests.

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fbjudge/backends.hpp"

namespace fbjudge {

/// A scripted reply: response text, or the error kind to raise instead
/// (one of "TransportError", "AuthError", "BudgetExceeded", "EmptyResponse").
struct ScriptedReply {
    std::string text;
    std::optional<std::string> error;
};

struct MockScript {
    enum class Mode { sequence, keyed };

    Mode mode = Mode::sequence;
    std::vector<ScriptedReply> sequence;         // replayed in call order
    std::map<std::string, ScriptedReply> keyed;  // request_key -> reply
    std::optional<ScriptedReply> fallback;       // keyed mode only
    std::chrono::milliseconds delay{0};          // simulated latency

    /// JSON form:
    ///   {"mode": "sequence", "responses": ["...", {"error": "TransportError"}]}
    ///   {"mode": "keyed", "responses": {"<key>": "..."}, "default": "..."}
    ///   optional "delay_ms".
    static MockScript from_json(const nlohmann::json& j);
    static MockScript load(const std::filesystem::path& path);
};

/// One recorded call, including rejected (unscripted) ones.
struct MockCall {
    std::string key;
    RenderedPrompt prompt;
    DecodingParams params;
    std::chrono::steady_clock::time_point started;
    std::chrono::steady_clock::time_point finished;
};

/// Never touches the network. Thread-safe; records every request.
class MockBackend final : public ChatBackend {
public:
    /// Throws ConfigError for an empty script.
    MockBackend(BackendSpec spec, MockScript script);

    const BackendSpec& spec() const override { return spec_; }

    /// Throws UnscriptedRequest, EmptyResponse for "" or the scripted error.
    ChatExchange complete(const RenderedPrompt& prompt, const DecodingParams& params) override;
    std::size_t calls() const override;

    std::vector<MockCall> requests() const;
    /// Highest number of overlapping complete() calls observed.
    int max_in_flight() const;

private:
    BackendSpec spec_;
    MockScript script_;
    mutable std::mutex mutex_;
    std::size_t next_index_ = 0;
    int in_flight_ = 0;
    int max_in_flight_ = 0;
    std::vector<MockCall> calls_;
};

}  // namespace fbjudge
