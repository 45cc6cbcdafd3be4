#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apikg/util.hpp"

namespace testing {

inline std::string fixtures_dir() { return APIKG_FIXTURES_DIR; }

inline std::string fixture_path(const std::string& rel) {
    return (std::filesystem::path(APIKG_FIXTURES_DIR) / rel).string();
}

// Self-cleaning scratch directory for one test.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        std::ostringstream name;
        name << "apikg_test_" << ::getpid() << "_" << counter++ << "_" << std::hex << rd();
        path = std::filesystem::temp_directory_path() / name.str();
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& rel) const { return (path / rel).string(); }

    std::string write(const std::string& rel, const std::string& content) const {
        std::filesystem::path target = path / rel;
        std::filesystem::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary);
        out << content;
        return target.string();
    }
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Captures warnings emitted through apikg::warn for the object's lifetime.
struct WarningCapture {
    std::vector<std::string> messages;

    WarningCapture() {
        apikg::set_warning_sink([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { apikg::reset_warning_sink(); }

    bool any_contains(const std::string& needle) const {
        for (const auto& m : messages)
            if (m.find(needle) != std::string::npos) return true;
        return false;
    }
};

}  // namespace testing
