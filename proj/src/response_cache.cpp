#include "fbjudge/response_cache.hpp"

#include <chrono>
#include <system_error>

#include <json.hpp>

#include "fbjudge/error.hpp"
#include "fbjudge/log.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

constexpr const char* kCacheSchema = "fbjudge.cache/1";

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create cache directory '" + dir_.string() + "': " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(std::string_view key) const {
    const std::string k(key);
    return dir_ / k.substr(0, 2) / (k + ".json");
}

std::optional<ChatExchange> ResponseCache::get(std::string_view key) const {
    const auto path = entry_path(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;

    auto corrupt = [&](const std::string& why) -> std::optional<ChatExchange> {
        warn("CacheCorrupt: " + path.string() + ": " + why + "; refetching");
        return std::nullopt;
    };

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        return corrupt(std::string("unparseable entry (") + e.what() + ")");
    } catch (const IoError& e) {
        return corrupt(e.what());
    }
    try {
        if (j.at("schema").get<std::string>() != kCacheSchema) return corrupt("unknown schema");
        if (j.at("key").get<std::string>() != key) return corrupt("key mismatch");
        ChatExchange ex;
        ex.id = std::string(key);
        ex.response_text = j.at("response_text").get<std::string>();
        if (sha256_hex(ex.response_text) != j.at("response_sha256").get<std::string>()) {
            return corrupt("digest mismatch");
        }
        if (ex.response_text.empty()) return corrupt("empty response");
        ex.backend_name = j.at("backend").get<std::string>();
        ex.model_id = j.at("model_id").get<std::string>();
        ex.timestamp = j.at("timestamp").get<std::string>();
        ex.latency_ms = j.at("latency_ms").get<double>();
        ex.attempts = j.at("attempts").get<int>();
        ex.cache_hit = true;
        return ex;
    } catch (const nlohmann::json::exception& e) {
        return corrupt(std::string("malformed entry (") + e.what() + ")");
    }
}

void ResponseCache::put(const ChatExchange& exchange) {
    nlohmann::ordered_json j;
    j["schema"] = kCacheSchema;
    j["key"] = exchange.id;
    j["backend"] = exchange.backend_name;
    j["model_id"] = exchange.model_id;
    j["params"] = canonical_params(exchange.params, exchange.max_output_tokens);
    j["timestamp"] = exchange.timestamp;
    j["latency_ms"] = exchange.latency_ms;
    j["attempts"] = exchange.attempts;
    j["response_sha256"] = sha256_hex(exchange.response_text);
    j["response_text"] = exchange.response_text;
    write_file_atomic(entry_path(exchange.id), j.dump(2) + "\n");
}

CachedBackend::CachedBackend(std::shared_ptr<ChatBackend> inner,
                             std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

ChatExchange CachedBackend::complete(const RenderedPrompt& prompt, const DecodingParams& params) {
    const auto& spec = inner_->spec();
    const std::string key = request_key(spec.model_id, prompt, params, spec.max_output_tokens);

    auto from_store = [&](ChatExchange ex) {
        ex.prompt = prompt;
        ex.params = params;
        ex.max_output_tokens = spec.max_output_tokens;
        ex.backend_name = spec.name;
        ex.cache_hit = true;
        return ex;
    };

    std::promise<ChatExchange> promise;
    std::shared_future<ChatExchange> shared;
    bool leader = false;
    {
        std::lock_guard lock(mutex_);
        if (auto it = in_flight_.find(key); it != in_flight_.end()) {
            shared = it->second;
        } else {
            const auto t0 = std::chrono::steady_clock::now();
            if (auto hit = cache_->get(key)) {
                ChatExchange ex = from_store(std::move(*hit));
                ex.latency_ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                return ex;
            }
            shared = promise.get_future().share();
            in_flight_.emplace(key, shared);
            leader = true;
        }
    }

    if (!leader) {
        ChatExchange ex = shared.get();
        ex.cache_hit = true;
        return ex;
    }

    try {
        ChatExchange ex = inner_->complete(prompt, params);
        cache_->put(ex);
        promise.set_value(ex);
        std::lock_guard lock(mutex_);
        in_flight_.erase(key);
        return ex;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        in_flight_.erase(key);
        throw;
    }
}

}  // namespace fbjudge
