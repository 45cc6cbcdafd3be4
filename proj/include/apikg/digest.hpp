#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace apikg {

// 64-bit FNV-1a. Used for prompt/fixture keys and content-addressed
// stage inputs; collision resistance beyond accidental is not needed.
constexpr uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Lowercase 16-hex-digit rendering of fnv1a64.
std::string digest_hex(std::string_view data);

// Digest of a file's raw bytes. Throws DataError if unreadable.
std::string digest_file(const std::string& path);

// Reads a whole file as bytes. Throws DataError if unreadable.
std::string read_file(const std::string& path);

// Writes bytes to a file, creating parent directories. Throws DataError
// on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace apikg
