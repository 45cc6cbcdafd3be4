#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apikg/construct.hpp"
#include "apikg/explore.hpp"

namespace apikg {

// Offline embedder: character trigrams of the UTF-8 bytes, hashed into a
// fixed number of buckets, L2-normalized. Identical text gives identical
// vectors on every platform; no model files, no network. Inputs shorter
// than three bytes contribute themselves as a single feature; the empty
// string embeds to the zero vector.
inline constexpr size_t kEmbeddingDim = 512;

std::vector<double> embed(std::string_view text);

// Cosine of two same-dimension vectors; 0 if either is zero. Bitwise
// equal non-zero vectors return exactly 1.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct GoldTriple {
    std::string head;
    std::string relation;
    std::string tail;
};

struct GoldSet {
    // source text id -> gold triples for it
    std::map<std::string, std::vector<GoldTriple>> by_id;
    size_t total() const;
};

// JSONL: {"id", "triples": [{"head", "relation", "tail"}, ...]} per line.
GoldSet read_gold_jsonl(const std::string& path);

// "head relation tail" — what the similarity is computed over.
std::string serialize_triple(const std::string& head, const std::string& relation,
                             const std::string& tail);

// A triple matches a gold triple when the normalized heads agree, the
// normalized tails agree, and the cosine similarity of their
// serializations exceeds the threshold (strictly).
bool match_triple(const KgTriple& extracted, const GoldTriple& gold, double threshold);

struct MatchRecord {
    std::string source_id;
    std::string extracted;  // serialized
    std::string gold;       // serialized
    double similarity = 0.0;
};

struct ThresholdScore {
    double threshold = 0.0;
    long long matches = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct TypeTripleAccuracy {
    long long total = 0;
    long long correct = 0;
    double accuracy = 0.0;
};

struct EvalReport {
    long long extracted_total = 0;
    long long gold_total = 0;
    std::vector<ThresholdScore> per_threshold;
    std::vector<MatchRecord> matches;  // the greedy matching, threshold-free
    std::optional<TypeTripleAccuracy> type_triple_accuracy;
};

// Greedy one-to-one matching per source text, highest similarity first
// (ties broken by the serialized triples). Precision is matches over
// extracted (0 when nothing was extracted), recall matches over gold,
// micro-averaged over texts. Each threshold simply cuts the same greedy
// matching at its similarity bar, which is what makes the three scores
// monotone in the threshold.
EvalReport score(const KnowledgeGraph& extracted, const GoldSet& gold,
                 const std::vector<double>& thresholds);

// Fraction of candidate type triples annotated correct. Every candidate
// must be annotated (MissingAnnotation otherwise); duplicates count once.
TypeTripleAccuracy type_triple_accuracy(const std::vector<TypeTriple>& candidates,
                                        const std::map<TypeTriple, bool>& annotations);

// Annotation file: JSON object mapping "head|relation|tail" to bool.
std::map<TypeTriple, bool> read_annotations(const std::string& path);

std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::string& path);

// Plain-text summary table for terminal output.
std::string report_to_table(const EvalReport& report);

}  // namespace apikg
