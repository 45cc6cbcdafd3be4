#pragma once

#include <string>
#include <vector>

#include "apikg/construct.hpp"
#include "apikg/explore.hpp"

namespace apikg {

// How evidence is counted. Occurrence counts every instance triple (the
// same fact stated in three texts is three pieces of evidence); distinct
// collapses repeats of (head, relation phrase, tail, type triple).
enum class CountMode { kOccurrence, kDistinct };

CountMode count_mode_from_string(const std::string& name);
std::string to_string(CountMode mode);

struct Thresholds {
    double support_min = 0.005;
    double confidence_min = 0.02;
    double lift_min = 1.0;
};

// Association statistics of one type triple under the rule
// (head type, tail type) => relation type:
//   support    = count / total
//   confidence = count / count(head type, tail type)
//   lift       = confidence / (count(relation type) / total)
// The integer counts are kept so threshold comparisons can cross-multiply
// instead of dividing (no rounding at the decision points).
struct MetricRow {
    TypeTriple type_triple;
    long long count = 0;       // occurrences of this type triple
    long long pair_count = 0;  // occurrences of its (head type, tail type)
    long long rt_count = 0;    // occurrences of its relation type
    long long total = 0;       // all occurrences
    double support = 0.0;
    double confidence = 0.0;
    double lift = 0.0;
    bool kept = false;
};

// One row per type triple occurring in the KG, sorted by (head type,
// relation type, tail type). Throws EmptyKG on a KG without triples.
std::vector<MetricRow> compute_metrics(const KnowledgeGraph& kg,
                                       CountMode mode = CountMode::kOccurrence);

// Marks rows whose three metrics all clear their thresholds. The default
// comparison is strict (>): a lift of exactly 1.0 does not clear
// lift_min = 1.0. With `inclusive`, >= is used instead. Comparisons are
// exact: count > t * total is evaluated on cross-multiplied integers.
void apply_thresholds(std::vector<MetricRow>& rows, const Thresholds& thresholds,
                      bool inclusive = false);

// Restricts the schema's type triples to the kept rows (type triples with
// zero occurrences disappear too), preserves both vocabularies untouched,
// and marks the schema validated.
KGSchema update_schema(const KGSchema& schema, const std::vector<MetricRow>& rows);

// Drops every instance triple whose type triple is not in the validated
// schema, then drops entities no longer referenced by any triple. Order
// is preserved.
KnowledgeGraph update_kg(const KnowledgeGraph& kg, const KGSchema& validated);

// Report file: JSON array of {type_triple, count, support, confidence,
// lift, kept}.
std::string metrics_to_json(const std::vector<MetricRow>& rows);
void write_metrics(const std::vector<MetricRow>& rows, const std::string& path);

}  // namespace apikg
