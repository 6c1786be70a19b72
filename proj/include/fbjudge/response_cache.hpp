/// @file response_cache.hpp
/// @brief Content-addressed on-disk response cache with single-flight misses.

#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fbjudge/backends.hpp"

namespace fbjudge {

/// Entries live at `<dir>/<key[0:2]>/<key>.json`. Each entry stores the
/// response text with its SHA-256; an entry that fails to parse, belongs to
/// another key or fails the digest check is treated as a miss with a warning.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::filesystem::path entry_path(std::string_view key) const;

    /// Returns the stored exchange (prompt and params are not stored and must
    /// be filled by the caller).
    std::optional<ChatExchange> get(std::string_view key) const;
    void put(const ChatExchange& exchange);

private:
    std::filesystem::path dir_;
};

/// Decorator implementing cached completion: a hit returns the stored
/// response with cache_hit=true and no call to the wrapped backend; a miss
/// delegates and stores. Concurrent identical misses issue one call.
class CachedBackend final : public ChatBackend {
public:
    CachedBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<ResponseCache> cache);

    const BackendSpec& spec() const override { return inner_->spec(); }
    ChatExchange complete(const RenderedPrompt& prompt, const DecodingParams& params) override;
    std::size_t calls() const override { return inner_->calls(); }

    const ChatBackend& inner() const noexcept { return *inner_; }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::mutex mutex_;
    std::map<std::string, std::shared_future<ChatExchange>> in_flight_;
};

}  // namespace fbjudge
