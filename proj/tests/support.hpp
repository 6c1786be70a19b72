#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "fbjudge/log.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(FBJ_TEST_DATA_DIR) / name;
}

inline std::filesystem::path golden_path(const std::string& name) {
    return std::filesystem::path(FBJ_TEST_GOLDEN_DIR) / name;
}

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "fbjudge-test-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Collects warnings for its lifetime.
class WarningCapture {
public:
    WarningCapture()
        : previous_(set_warning_handler([this](const std::string& m) { messages_.push_back(m); })) {}
    ~WarningCapture() { set_warning_handler(previous_); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    bool contains(const std::string& needle) const {
        for (const auto& m : messages_) {
            if (m.find(needle) != std::string::npos) return true;
        }
        return false;
    }

private:
    WarningHandler previous_;
    std::vector<std::string> messages_;
};

}  // namespace fbjudge::test
