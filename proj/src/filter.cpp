#include "apikg/filter.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"

namespace apikg {

CountMode count_mode_from_string(const std::string& name) {
    if (name == "occurrence") return CountMode::kOccurrence;
    if (name == "distinct") return CountMode::kDistinct;
    throw ConfigError("count mode must be 'occurrence' or 'distinct', got '" + name + "'");
}

std::string to_string(CountMode mode) {
    return mode == CountMode::kOccurrence ? "occurrence" : "distinct";
}

std::vector<MetricRow> compute_metrics(const KnowledgeGraph& kg, CountMode mode) {
    if (kg.triples.empty()) throw EmptyKG("cannot compute association metrics of an empty KG");

    // The unit of evidence: every occurrence, or each distinct fact once.
    // In distinct mode the pointers in `evidence` alias the set nodes, so
    // `seen` has to stay alive for the counting loop below.
    std::vector<const TypeTriple*> evidence;
    std::set<std::tuple<std::string, std::string, std::string, TypeTriple>> seen;
    if (mode == CountMode::kOccurrence) {
        evidence.reserve(kg.triples.size());
        for (const auto& t : kg.triples) evidence.push_back(&t.type_triple);
    } else {
        for (const auto& t : kg.triples) {
            auto key = std::make_tuple(t.head.normalized, t.relation_phrase, t.tail.normalized,
                                       t.type_triple);
            auto [it, inserted] = seen.insert(std::move(key));
            if (inserted) evidence.push_back(&std::get<3>(*it));
        }
    }

    const long long total = static_cast<long long>(evidence.size());
    std::map<TypeTriple, long long> tt_count;
    std::map<std::pair<std::string, std::string>, long long> pair_count;
    std::map<std::string, long long> rt_count;
    for (const TypeTriple* tt : evidence) {
        ++tt_count[*tt];
        ++pair_count[{tt->head_type, tt->tail_type}];
        ++rt_count[tt->relation_type];
    }

    std::vector<MetricRow> rows;
    rows.reserve(tt_count.size());
    for (const auto& [tt, count] : tt_count) {
        MetricRow row;
        row.type_triple = tt;
        row.count = count;
        row.pair_count = pair_count.at({tt.head_type, tt.tail_type});
        row.rt_count = rt_count.at(tt.relation_type);
        row.total = total;
        row.support = static_cast<double>(count) / static_cast<double>(total);
        row.confidence = static_cast<double>(count) / static_cast<double>(row.pair_count);
        row.lift = static_cast<double>(count * total) /
                   static_cast<double>(row.pair_count * row.rt_count);
        rows.push_back(std::move(row));
    }
    // std::map iteration already yields (head, relation, tail) order.
    return rows;
}

void apply_thresholds(std::vector<MetricRow>& rows, const Thresholds& thresholds,
                      bool inclusive) {
    const auto clears = [inclusive](double lhs, double rhs) {
        return inclusive ? lhs >= rhs : lhs > rhs;
    };
    for (auto& row : rows) {
        // Cross-multiplied forms of support > s, confidence > c, lift > l.
        // The left sides are integers (exact in double well past any
        // realistic KG size), so equality cases decide correctly.
        const bool support_ok =
            clears(static_cast<double>(row.count),
                   thresholds.support_min * static_cast<double>(row.total));
        const bool confidence_ok =
            clears(static_cast<double>(row.count),
                   thresholds.confidence_min * static_cast<double>(row.pair_count));
        const bool lift_ok =
            clears(static_cast<double>(row.count * row.total),
                   thresholds.lift_min * static_cast<double>(row.pair_count * row.rt_count));
        row.kept = support_ok && confidence_ok && lift_ok;
    }
}

KGSchema update_schema(const KGSchema& schema, const std::vector<MetricRow>& rows) {
    std::set<TypeTriple> kept;
    for (const auto& row : rows) {
        if (row.kept) kept.insert(row.type_triple);
    }
    KGSchema validated;
    validated.entity_types = schema.entity_types;
    validated.relation_types = schema.relation_types;
    for (const auto& tt : schema.type_triples) {
        if (kept.find(tt) != kept.end()) validated.type_triples.push_back(tt);
    }
    validated.validated = true;
    return validated;
}

KnowledgeGraph update_kg(const KnowledgeGraph& kg, const KGSchema& validated) {
    std::set<TypeTriple> admitted(validated.type_triples.begin(), validated.type_triples.end());
    KnowledgeGraph out;
    out.schema_digest = kg.schema_digest;
    std::set<std::string> referenced;
    for (const auto& t : kg.triples) {
        if (admitted.find(t.type_triple) == admitted.end()) continue;
        out.triples.push_back(t);
        referenced.insert(t.head.normalized);
        referenced.insert(t.tail.normalized);
    }
    for (const auto& te : kg.entities) {
        if (referenced.find(te.entity.normalized) != referenced.end()) out.entities.push_back(te);
    }
    return out;
}

std::string metrics_to_json(const std::vector<MetricRow>& rows) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        doc.push_back(nlohmann::ordered_json{
            {"type_triple",
             {row.type_triple.head_type, row.type_triple.relation_type, row.type_triple.tail_type}},
            {"count", row.count},
            {"support", row.support},
            {"confidence", row.confidence},
            {"lift", row.lift},
            {"kept", row.kept}});
    }
    return doc.dump(2) + "\n";
}

void write_metrics(const std::vector<MetricRow>& rows, const std::string& path) {
    write_file(path, metrics_to_json(rows));
}

}  // namespace apikg
