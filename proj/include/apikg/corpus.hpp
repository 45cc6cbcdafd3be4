#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace apikg {

// One raw text flowing through the pipeline, with provenance.
struct TextUnit {
    std::string id;      // unique within a corpus
    std::string source;  // label, e.g. the corpus file name
    std::string content; // non-empty UTF-8 text
};

struct Corpus {
    std::vector<TextUnit> units;  // input order preserved
};

// Maximal runs separated by Unicode whitespace; no empty tokens.
std::vector<std::string> tokenize(std::string_view text);

// A text is worth extracting from when it is long enough (more than 8
// tokens) and shows at least one API-ish signal: a "()" call marker, a
// dotted name (letter '.' letter), or one of the words method / class /
// package (case-insensitive, whole word).
bool passes_filter(const TextUnit& unit);

// Keeps exactly the units that pass, preserving order. Idempotent.
Corpus filter_corpus(const Corpus& corpus);

// Reads JSON Lines: {"id": ..., "source": ..., "text": ...} per line.
// Duplicate ids, empty text, and unparseable lines are fatal, with the
// offending line number in the message.
Corpus read_corpus_jsonl(const std::string& path);

void write_corpus_jsonl(const Corpus& corpus, const std::string& path);

}  // namespace apikg
