/// @file config.hpp
/// @brief Declarative run configuration (JSON file, secrets from env only).

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbjudge/backends.hpp"
#include "fbjudge/corpus.hpp"
#include "fbjudge/judge.hpp"

namespace fbjudge {

struct BackendConfig {
    enum class Type { openai, mock };

    Type type = Type::openai;
    BackendSpec spec;
    DecodingParams params;
    std::filesystem::path mock_script;  // Type::mock only
    std::string display_name;           // name shown to the judge; defaults to spec.name
    int max_attempts = 5;

    const std::string& shown_name() const noexcept {
        return display_name.empty() ? spec.name : display_name;
    }
};

/// Example:
///
///     {
///       "corpus": "corpus.jsonl",
///       "output_dir": "out",
///       "cache_dir": ".fbjudge-cache",
///       "parse_mode": "strict",
///       "judge_backend": "gpt-4",
///       "generator_backends": ["zephyr-7b-beta"],
///       "backends": {
///         "gpt-4": {"type": "openai", "base_url": "https://api.openai.com/v1",
///                   "model_id": "gpt-4", "api_key_env": "OPENAI_API_KEY",
///                   "max_parallel": 4},
///         "zephyr-7b-beta": {"type": "openai", "base_url": "http://localhost:8000/v1",
///                            "model_id": "HuggingFaceH4/zephyr-7b-beta",
///                            "display_name": "Zephyr-7B-beta"}
///       }
///     }
///
/// Relative paths are resolved against the config file's directory.
struct RunConfig {
    std::filesystem::path corpus_path;
    std::optional<std::filesystem::path> template_dir;
    std::map<std::string, BackendConfig> backends;
    std::string judge_backend;
    std::vector<std::string> generator_backends;
    std::filesystem::path cache_dir;  // empty: caching disabled
    std::filesystem::path output_dir = ".";
    ParseMode parse_mode = ParseMode::strict;
    SchemaMode corpus_mode = SchemaMode::strict;
    int max_parallel_override = 0;  // > 0 replaces every backend's max_parallel

    /// Throws ConfigError. API keys never appear in the file; a key named
    /// "api_key" is rejected.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static RunConfig load(const std::filesystem::path& path);

    /// Throws UnknownBackend if the judge or a generator is not defined.
    void validate() const;
    const BackendConfig& backend(const std::string& name) const;

    /// Canonical form; its SHA-256 is the config hash recorded in outputs.
    nlohmann::ordered_json to_json() const;
    std::string hash() const;
};

}  // namespace fbjudge
