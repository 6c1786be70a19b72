#include "fbjudge/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <string_view>
#include <thread>

#include "fbjudge/error.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

constexpr std::array<std::string_view, 4> kScriptableErrors = {"TransportError", "AuthError",
                                                               "BudgetExceeded", "EmptyResponse"};

ScriptedReply reply_from_json(const nlohmann::json& j) {
    if (j.is_string()) return ScriptedReply{j.get<std::string>(), std::nullopt};
    if (j.is_object() && j.contains("error") && j["error"].is_string()) {
        const std::string kind = j["error"].get<std::string>();
        if (std::find(kScriptableErrors.begin(), kScriptableErrors.end(), kind) == kScriptableErrors.end()) {
            throw ConfigError("unknown scripted error kind '" + kind + "'");
        }
        return ScriptedReply{"", kind};
    }
    throw ConfigError("mock reply must be a string or {\"error\": kind}");
}

[[noreturn]] void raise_scripted(const std::string& kind) {
    const std::string msg = "scripted " + kind;
    if (kind == "TransportError") throw TransportError(msg);
    if (kind == "AuthError") throw AuthError(msg);
    if (kind == "BudgetExceeded") throw BudgetExceeded(msg);
    if (kind == "EmptyResponse") throw EmptyResponse(msg);
    throw ConfigError("unknown scripted error kind '" + kind + "'");
}

}  // namespace

MockScript MockScript::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("mock script must be a JSON object");
    MockScript script;
    const std::string mode = j.value("mode", std::string("sequence"));
    if (mode == "sequence") {
        script.mode = Mode::sequence;
        const auto& responses = j.at("responses");
        if (!responses.is_array()) throw ConfigError("sequence mock needs a responses array");
        for (const auto& r : responses) script.sequence.push_back(reply_from_json(r));
    } else if (mode == "keyed") {
        script.mode = Mode::keyed;
        const auto& responses = j.at("responses");
        if (!responses.is_object()) throw ConfigError("keyed mock needs a responses object");
        for (const auto& [key, r] : responses.items()) script.keyed.emplace(key, reply_from_json(r));
        if (j.contains("default")) script.fallback = reply_from_json(j["default"]);
    } else {
        throw ConfigError("unknown mock mode '" + mode + "'");
    }
    if (j.contains("delay_ms")) script.delay = std::chrono::milliseconds(j["delay_ms"].get<int>());
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("mock script '" + path.string() + "': " + e.what());
    }
}

MockBackend::MockBackend(BackendSpec spec, MockScript script)
    : spec_(std::move(spec)), script_(std::move(script)) {
    spec_.validate();
    const bool empty = script_.mode == MockScript::Mode::sequence
                           ? script_.sequence.empty()
                           : script_.keyed.empty() && !script_.fallback;
    if (empty) throw ConfigError("mock backend '" + spec_.name + "': script is empty");
}

ChatExchange MockBackend::complete(const RenderedPrompt& prompt, const DecodingParams& params) {
    const auto started = std::chrono::steady_clock::now();
    const std::string key = request_key(spec_.model_id, prompt, params, spec_.max_output_tokens);

    std::optional<ScriptedReply> reply;
    std::size_t index = 0;
    {
        std::lock_guard lock(mutex_);
        ++in_flight_;
        max_in_flight_ = std::max(max_in_flight_, in_flight_);
        if (script_.mode == MockScript::Mode::sequence) {
            index = next_index_++;
            if (index < script_.sequence.size()) reply = script_.sequence[index];
        } else if (auto it = script_.keyed.find(key); it != script_.keyed.end()) {
            reply = it->second;
        } else if (script_.fallback) {
            reply = script_.fallback;
        }
    }

    if (reply && script_.delay.count() > 0) std::this_thread::sleep_for(script_.delay);

    {
        std::lock_guard lock(mutex_);
        --in_flight_;
        calls_.push_back(MockCall{key, prompt, params, started, std::chrono::steady_clock::now()});
    }

    if (!reply) {
        throw UnscriptedRequest(script_.mode == MockScript::Mode::sequence
                                    ? "mock '" + spec_.name + "': no reply scripted for call #" +
                                          std::to_string(index + 1)
                                    : "mock '" + spec_.name + "': no reply scripted for key " + key);
    }
    if (reply->error) raise_scripted(*reply->error);
    if (reply->text.empty()) throw EmptyResponse("mock '" + spec_.name + "': scripted empty reply");

    ChatExchange ex;
    ex.id = key;
    ex.backend_name = spec_.name;
    ex.model_id = spec_.model_id;
    ex.prompt = prompt;
    ex.params = params;
    ex.max_output_tokens = spec_.max_output_tokens;
    ex.response_text = reply->text;
    ex.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    ex.timestamp = format_utc(std::chrono::system_clock::now());
    return ex;
}

std::size_t MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

std::vector<MockCall> MockBackend::requests() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

int MockBackend::max_in_flight() const {
    std::lock_guard lock(mutex_);
    return max_in_flight_;
}

}  // namespace fbjudge
