#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace apikg {

// ---- string helpers ----

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// True for codepoints we classify as letters: ASCII plus the Latin
// supplements/extensions, Greek and Cyrillic blocks. Digits are not
// letters. Intentionally narrower than full Unicode — API-bearing text
// is overwhelmingly in these scripts, and the classification must stay
// stable across platforms.
bool is_letter_codepoint(uint32_t cp);

bool is_unicode_space(uint32_t cp);

// Decodes the UTF-8 sequence starting at s[i]. Advances i past the
// sequence and returns the codepoint; malformed bytes are consumed one
// at a time and returned verbatim (never throws).
uint32_t decode_utf8(std::string_view s, size_t& i);

// Case-insensitive whole-word containment with non-alphanumeric
// boundaries; `word` must be ASCII.
bool contains_word(std::string_view text, std::string_view word);

// ---- warning sink ----
//
// Tolerant-mode drops and repairs are reported as warnings. The sink is
// process-global and defaults to stderr; tests swap in a capture.
void warn(const std::string& message);
void set_warning_sink(std::function<void(const std::string&)> sink);
void reset_warning_sink();

// ---- bounded parallel map ----
//
// Runs fn(i) for i in [0, n) on up to `workers` threads. Results are the
// caller's responsibility (write into a pre-sized vector by index). The
// first exception thrown by any worker is rethrown after all join.
void parallel_for(size_t n, size_t workers, const std::function<void(size_t)>& fn);

}  // namespace apikg
