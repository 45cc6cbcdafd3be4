#include "apikg/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/util.hpp"

namespace apikg {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    size_t i = 0;
    while (i < text.size()) {
        size_t start = i;
        uint32_t cp = decode_utf8(text, i);
        if (is_unicode_space(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.append(text.substr(start, i - start));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

// '.' with a letter immediately before and after, e.g. "iterator.remove".
bool has_dotted_name(std::string_view text) {
    // Decode once so multi-byte letters on either side of the dot count.
    std::vector<uint32_t> cps;
    cps.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) cps.push_back(decode_utf8(text, i));
    for (size_t k = 1; k + 1 < cps.size(); ++k) {
        if (cps[k] == '.' && is_letter_codepoint(cps[k - 1]) && is_letter_codepoint(cps[k + 1]))
            return true;
    }
    return false;
}

}  // namespace

bool passes_filter(const TextUnit& unit) {
    const std::string& text = unit.content;
    if (tokenize(text).size() <= 8) return false;
    if (text.find("()") != std::string::npos) return true;
    if (has_dotted_name(text)) return true;
    return contains_word(text, "method") || contains_word(text, "class") ||
           contains_word(text, "package");
}

Corpus filter_corpus(const Corpus& corpus) {
    Corpus out;
    for (const auto& unit : corpus.units) {
        if (passes_filter(unit)) out.units.push_back(unit);
    }
    return out;
}

Corpus read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read corpus file: " + path);
    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("source") ||
            !obj.contains("text") || !obj["id"].is_string() || !obj["source"].is_string() ||
            !obj["text"].is_string()) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected {\"id\", \"source\", \"text\"} with string values");
        }
        TextUnit unit{obj["id"].get<std::string>(), obj["source"].get<std::string>(),
                      obj["text"].get<std::string>()};
        if (unit.content.empty()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": empty text for id '" +
                            unit.id + "'");
        }
        if (!seen.insert(unit.id).second) {
            throw DuplicateId(path + ":" + std::to_string(line_no) + ": duplicate id '" +
                              unit.id + "'");
        }
        corpus.units.push_back(std::move(unit));
    }
    return corpus;
}

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ostringstream out;
    for (const auto& unit : corpus.units) {
        nlohmann::ordered_json obj;
        obj["id"] = unit.id;
        obj["source"] = unit.source;
        obj["text"] = unit.content;
        out << obj.dump() << "\n";
    }
    write_file(path, out.str());
}

}  // namespace apikg
