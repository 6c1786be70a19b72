#include "fbjudge/config.hpp"

#include "fbjudge/error.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

BackendConfig parse_backend(const std::string& name, const json& j,
                            const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("backend '" + name + "' must be an object");
    if (j.contains("api_key")) {
        throw ConfigError("backend '" + name +
                          "': secrets are not allowed in the config; use api_key_env");
    }
    BackendConfig b;
    b.spec.name = name;
    const std::string type = j.value("type", std::string("openai"));
    if (type == "openai") {
        b.type = BackendConfig::Type::openai;
        b.spec.base_url = j.at("base_url").get<std::string>();
    } else if (type == "mock") {
        b.type = BackendConfig::Type::mock;
        b.mock_script = resolve(base_dir, j.at("script").get<std::string>());
    } else {
        throw ConfigError("backend '" + name + "': unknown type '" + type + "'");
    }
    b.spec.model_id = j.value("model_id", name);
    b.spec.api_key_env = j.value("api_key_env", std::string());
    b.spec.max_output_tokens = j.value("max_output_tokens", kDefaultMaxOutputTokens);
    b.spec.request_timeout_s = j.value("request_timeout", 60.0);
    b.spec.max_parallel = j.value("max_parallel", 1);
    b.spec.max_requests = j.value("max_requests", std::size_t{0});
    b.params.temperature = j.value("temperature", 0.0);
    b.display_name = j.value("display_name", std::string());
    b.max_attempts = j.value("max_attempts", 5);
    if (b.params.temperature < 0.0) {
        throw ConfigError("backend '" + name + "': temperature must be >= 0");
    }
    if (b.max_attempts < 1) throw ConfigError("backend '" + name + "': max_attempts must be >= 1");
    b.spec.validate();
    return b;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        RunConfig c;
        c.corpus_path = resolve(base_dir, j.value("corpus", std::string()));
        if (j.contains("template_dir") && !j["template_dir"].is_null()) {
            c.template_dir = resolve(base_dir, j["template_dir"].get<std::string>());
        }
        if (j.contains("cache_dir") && !j["cache_dir"].is_null()) {
            c.cache_dir = resolve(base_dir, j["cache_dir"].get<std::string>());
        }
        c.output_dir = resolve(base_dir, j.value("output_dir", std::string(".")));
        c.parse_mode = parse_mode_from_string(j.value("parse_mode", std::string("strict")));
        const std::string corpus_mode = j.value("corpus_mode", std::string("strict"));
        if (corpus_mode == "strict") {
            c.corpus_mode = SchemaMode::strict;
        } else if (corpus_mode == "lenient") {
            c.corpus_mode = SchemaMode::lenient;
        } else {
            throw ConfigError("corpus_mode must be 'strict' or 'lenient'");
        }
        c.judge_backend = j.value("judge_backend", std::string());
        c.generator_backends = j.value("generator_backends", std::vector<std::string>{});
        if (j.contains("backends")) {
            for (const auto& [name, bj] : j.at("backends").items()) {
                c.backends.emplace(name, parse_backend(name, bj, base_dir));
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path());
}

void RunConfig::validate() const {
    if (!judge_backend.empty() && !backends.contains(judge_backend)) {
        throw UnknownBackend(judge_backend);
    }
    for (const auto& g : generator_backends) {
        if (!backends.contains(g)) throw UnknownBackend(g);
    }
}

const BackendConfig& RunConfig::backend(const std::string& name) const {
    auto it = backends.find(name);
    if (it == backends.end()) throw UnknownBackend(name);
    return it->second;
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["corpus"] = corpus_path.generic_string();
    j["template_dir"] = template_dir ? ordered_json(template_dir->generic_string()) : ordered_json();
    j["cache_dir"] = cache_dir.generic_string();
    j["output_dir"] = output_dir.generic_string();
    j["parse_mode"] = to_string(parse_mode);
    j["corpus_mode"] = corpus_mode == SchemaMode::strict ? "strict" : "lenient";
    j["judge_backend"] = judge_backend;
    j["generator_backends"] = generator_backends;
    j["max_parallel_override"] = max_parallel_override;
    ordered_json bs = ordered_json::object();
    for (const auto& [name, b] : backends) {
        ordered_json o;
        o["type"] = b.type == BackendConfig::Type::openai ? "openai" : "mock";
        o["base_url"] = b.spec.base_url;
        o["model_id"] = b.spec.model_id;
        o["api_key_env"] = b.spec.api_key_env;
        o["max_output_tokens"] = b.spec.max_output_tokens;
        o["request_timeout"] = b.spec.request_timeout_s;
        o["max_parallel"] = b.spec.max_parallel;
        o["max_requests"] = b.spec.max_requests;
        o["temperature"] = b.params.temperature;
        o["display_name"] = b.display_name;
        o["max_attempts"] = b.max_attempts;
        if (b.type == BackendConfig::Type::mock) o["script"] = b.mock_script.generic_string();
        bs[name] = std::move(o);
    }
    j["backends"] = std::move(bs);
    return j;
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

}  // namespace fbjudge
