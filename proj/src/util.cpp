#include "apikg/util.hpp"

#include <atomic>
#include <cctype>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

namespace apikg {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_unicode_space(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_letter_codepoint(uint32_t cp) {
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
    if (cp >= 0xC0 && cp <= 0xFF) return cp != 0xD7 && cp != 0xF7;  // Latin-1 letters
    if (cp >= 0x0100 && cp <= 0x024F) return true;                  // Latin Extended-A/B
    if (cp >= 0x0370 && cp <= 0x03FF) return cp != 0x0374 && cp != 0x0375 && cp != 0x037E;
    if (cp >= 0x0400 && cp <= 0x04FF) return true;                  // Cyrillic
    return false;
}

uint32_t decode_utf8(std::string_view s, size_t& i) {
    const auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    size_t len = 0;
    uint32_t cp = 0;
    if (b0 < 0x80) {
        ++i;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;  // stray continuation or invalid lead byte: pass through
        return b0;
    }
    if (i + len > s.size()) {
        ++i;
        return b0;
    }
    for (size_t k = 1; k < len; ++k) {
        unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

bool contains_word(std::string_view text, std::string_view word) {
    if (word.empty()) return false;
    const auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    const std::string lowered_text = lower_ascii(text);
    const std::string lowered_word = lower_ascii(word);
    size_t pos = 0;
    while ((pos = lowered_text.find(lowered_word, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(lowered_text[pos - 1]);
        const size_t end = pos + lowered_word.size();
        const bool right_ok = end == lowered_text.size() || !is_word_char(lowered_text[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

namespace {

std::mutex g_warn_mutex;
std::function<void(const std::string&)> g_warn_sink;

}  // namespace

void warn(const std::string& message) {
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    if (g_warn_sink) {
        g_warn_sink(message);
    } else {
        std::cerr << "warning: " << message << "\n";
    }
}

void set_warning_sink(std::function<void(const std::string&)> sink) {
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    g_warn_sink = std::move(sink);
}

void reset_warning_sink() {
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    g_warn_sink = nullptr;
}

void parallel_for(size_t n, size_t workers, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    workers = std::max<size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (first_error) return;  // stop picking up work after a failure
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace apikg
