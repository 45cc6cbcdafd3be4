#include "apikg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/util.hpp"

namespace apikg {

std::vector<double> embed(std::string_view text) {
    std::vector<long long> counts(kEmbeddingDim, 0);
    if (!text.empty()) {
        if (text.size() < 3) {
            ++counts[fnv1a64(text) % kEmbeddingDim];
        } else {
            for (size_t i = 0; i + 3 <= text.size(); ++i) {
                ++counts[fnv1a64(text.substr(i, 3)) % kEmbeddingDim];
            }
        }
    }
    double norm_sq = 0.0;
    for (long long c : counts) norm_sq += static_cast<double>(c) * static_cast<double>(c);
    std::vector<double> vec(kEmbeddingDim, 0.0);
    if (norm_sq > 0.0) {
        const double norm = std::sqrt(norm_sq);
        for (size_t i = 0; i < kEmbeddingDim; ++i) {
            vec[i] = static_cast<double>(counts[i]) / norm;
        }
    }
    return vec;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DataError("cosine of vectors with different dimensions");
    }
    bool a_zero = true, b_zero = true, equal = true;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] != 0.0) a_zero = false;
        if (b[i] != 0.0) b_zero = false;
        if (a[i] != b[i]) equal = false;
    }
    if (a_zero || b_zero) return 0.0;
    if (equal) return 1.0;  // identical text must score exactly 1
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
}

size_t GoldSet::total() const {
    size_t n = 0;
    for (const auto& [_, triples] : by_id) n += triples.size();
    return n;
}

GoldSet read_gold_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read gold file: " + path);
    GoldSet gold;
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
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("triples") ||
            !obj["triples"].is_array()) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected {\"id\", \"triples\": [...]}");
        }
        const std::string id = obj["id"].get<std::string>();
        if (gold.by_id.find(id) != gold.by_id.end()) {
            throw DuplicateId(path + ":" + std::to_string(line_no) + ": duplicate id '" + id +
                              "'");
        }
        std::vector<GoldTriple>& triples = gold.by_id[id];
        for (const auto& t : obj["triples"]) {
            triples.push_back(GoldTriple{t.at("head").get<std::string>(),
                                         t.at("relation").get<std::string>(),
                                         t.at("tail").get<std::string>()});
        }
    }
    return gold;
}

std::string serialize_triple(const std::string& head, const std::string& relation,
                             const std::string& tail) {
    return head + " " + relation + " " + tail;
}

namespace {

double triple_similarity(const std::string& extracted_serialized,
                         const std::string& gold_serialized) {
    return cosine(embed(extracted_serialized), embed(gold_serialized));
}

struct Candidate {
    size_t extracted_index;
    size_t gold_index;
    double similarity;
    const std::string* extracted_serialized;
    const std::string* gold_serialized;
};

}  // namespace

bool match_triple(const KgTriple& extracted, const GoldTriple& gold, double threshold) {
    if (normalize_entity(extracted.head.surface) != normalize_entity(gold.head)) return false;
    if (normalize_entity(extracted.tail.surface) != normalize_entity(gold.tail)) return false;
    const std::string e =
        serialize_triple(extracted.head.surface, extracted.relation_phrase, extracted.tail.surface);
    const std::string g = serialize_triple(gold.head, gold.relation, gold.tail);
    return triple_similarity(e, g) > threshold;
}

EvalReport score(const KnowledgeGraph& extracted, const GoldSet& gold,
                 const std::vector<double>& thresholds) {
    EvalReport report;
    report.extracted_total = static_cast<long long>(extracted.triples.size());
    report.gold_total = static_cast<long long>(gold.total());

    // Group extracted triples by source text; matching never crosses texts.
    std::map<std::string, std::vector<const KgTriple*>> extracted_by_id;
    for (const auto& t : extracted.triples) extracted_by_id[t.source_id].push_back(&t);

    for (const auto& [id, gold_triples] : gold.by_id) {
        auto it = extracted_by_id.find(id);
        if (it == extracted_by_id.end()) continue;
        const auto& ext = it->second;

        std::vector<std::string> ext_ser(ext.size());
        for (size_t i = 0; i < ext.size(); ++i) {
            ext_ser[i] = serialize_triple(ext[i]->head.surface, ext[i]->relation_phrase,
                                          ext[i]->tail.surface);
        }
        std::vector<std::string> gold_ser(gold_triples.size());
        for (size_t j = 0; j < gold_triples.size(); ++j) {
            gold_ser[j] = serialize_triple(gold_triples[j].head, gold_triples[j].relation,
                                           gold_triples[j].tail);
        }

        std::vector<Candidate> candidates;
        for (size_t i = 0; i < ext.size(); ++i) {
            const std::string head_norm = normalize_entity(ext[i]->head.surface);
            const std::string tail_norm = normalize_entity(ext[i]->tail.surface);
            for (size_t j = 0; j < gold_triples.size(); ++j) {
                if (head_norm != normalize_entity(gold_triples[j].head)) continue;
                if (tail_norm != normalize_entity(gold_triples[j].tail)) continue;
                candidates.push_back(Candidate{i, j,
                                               triple_similarity(ext_ser[i], gold_ser[j]),
                                               &ext_ser[i], &gold_ser[j]});
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.similarity != b.similarity) return a.similarity > b.similarity;
            if (*a.extracted_serialized != *b.extracted_serialized) {
                return *a.extracted_serialized < *b.extracted_serialized;
            }
            return *a.gold_serialized < *b.gold_serialized;
        });

        std::vector<bool> ext_used(ext.size(), false), gold_used(gold_triples.size(), false);
        for (const auto& c : candidates) {
            if (ext_used[c.extracted_index] || gold_used[c.gold_index]) continue;
            ext_used[c.extracted_index] = true;
            gold_used[c.gold_index] = true;
            report.matches.push_back(
                MatchRecord{id, *c.extracted_serialized, *c.gold_serialized, c.similarity});
        }
    }

    for (double threshold : thresholds) {
        ThresholdScore ts;
        ts.threshold = threshold;
        for (const auto& m : report.matches) {
            if (m.similarity > threshold) ++ts.matches;
        }
        ts.precision = report.extracted_total == 0
                           ? 0.0
                           : static_cast<double>(ts.matches) /
                                 static_cast<double>(report.extracted_total);
        ts.recall = report.gold_total == 0
                        ? 0.0
                        : static_cast<double>(ts.matches) / static_cast<double>(report.gold_total);
        ts.f1 = (ts.precision + ts.recall) > 0.0
                    ? 2.0 * ts.precision * ts.recall / (ts.precision + ts.recall)
                    : 0.0;
        report.per_threshold.push_back(ts);
    }
    return report;
}

TypeTripleAccuracy type_triple_accuracy(const std::vector<TypeTriple>& candidates,
                                        const std::map<TypeTriple, bool>& annotations) {
    std::set<TypeTriple> unique(candidates.begin(), candidates.end());
    TypeTripleAccuracy acc;
    acc.total = static_cast<long long>(unique.size());
    for (const auto& tt : unique) {
        auto it = annotations.find(tt);
        if (it == annotations.end()) {
            throw MissingAnnotation("no annotation for type triple (" + tt.head_type + ", " +
                                    tt.relation_type + ", " + tt.tail_type + ")");
        }
        if (it->second) ++acc.correct;
    }
    acc.accuracy = acc.total == 0
                       ? 0.0
                       : static_cast<double>(acc.correct) / static_cast<double>(acc.total);
    return acc;
}

std::map<TypeTriple, bool> read_annotations(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("annotation file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw DataError("annotation file " + path + " must map \"head|relation|tail\" to bool");
    }
    std::map<TypeTriple, bool> out;
    for (const auto& [key, value] : doc.items()) {
        size_t p1 = key.find('|');
        size_t p2 = p1 == std::string::npos ? std::string::npos : key.find('|', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos || !value.is_boolean()) {
            throw DataError("annotation file " + path + ": bad entry '" + key + "'");
        }
        TypeTriple tt{key.substr(0, p1), key.substr(p1 + 1, p2 - p1 - 1), key.substr(p2 + 1)};
        out[tt] = value.get<bool>();
    }
    return out;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["extracted_total"] = report.extracted_total;
    doc["gold_total"] = report.gold_total;
    doc["per_threshold"] = nlohmann::ordered_json::array();
    for (const auto& ts : report.per_threshold) {
        doc["per_threshold"].push_back(nlohmann::ordered_json{{"threshold", ts.threshold},
                                                              {"matches", ts.matches},
                                                              {"precision", ts.precision},
                                                              {"recall", ts.recall},
                                                              {"f1", ts.f1}});
    }
    doc["matches"] = nlohmann::ordered_json::array();
    for (const auto& m : report.matches) {
        doc["matches"].push_back(nlohmann::ordered_json{{"source_id", m.source_id},
                                                        {"extracted", m.extracted},
                                                        {"gold", m.gold},
                                                        {"similarity", m.similarity}});
    }
    if (report.type_triple_accuracy) {
        doc["type_triple_accuracy"] =
            nlohmann::ordered_json{{"total", report.type_triple_accuracy->total},
                                   {"correct", report.type_triple_accuracy->correct},
                                   {"accuracy", report.type_triple_accuracy->accuracy}};
    } else {
        doc["type_triple_accuracy"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

void write_report(const EvalReport& report, const std::string& path) {
    write_file(path, report_to_json(report));
}

std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    out << "threshold  matches  precision  recall  f1\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& ts : report.per_threshold) {
        out << std::setw(9) << ts.threshold << "  " << std::setw(7) << ts.matches << "  "
            << std::setw(9) << ts.precision << "  " << std::setw(6) << ts.recall << "  "
            << ts.f1 << "\n";
    }
    out << "extracted: " << report.extracted_total << "  gold: " << report.gold_total << "\n";
    if (report.type_triple_accuracy) {
        out << "type triples: " << report.type_triple_accuracy->correct << "/"
            << report.type_triple_accuracy->total << " correct (accuracy "
            << report.type_triple_accuracy->accuracy << ")\n";
    }
    return out.str();
}

}  // namespace apikg
