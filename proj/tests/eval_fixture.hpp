#pragma once

#include <set>
#include <string>
#include <vector>

#include "apikg/construct.hpp"
#include "apikg/eval.hpp"
#include "apikg/explore.hpp"

namespace testing {

// Hand-scored scoring benchmark: 20 gold facts and 18 extracted facts over
// a single source text. Twelve extractions are verbatim copies of their
// gold counterparts (similarity exactly 1), five rephrase the relation
// with decreasing fidelity, and one names the wrong head entity so it can
// never match. The rephrased pairs were chosen so their trigram-cosine
// similarities fall strictly inside the bands between the thresholds the
// scorer is exercised at:
//
//   two pairs  in (0.92, 0.94)   ~0.9384, ~0.9384
//   two pairs  in (0.90, 0.92)   ~0.9185, ~0.9182
//   one pair   below 0.90        ~0.8981
//
// so the expected match counts at thresholds 0.90 / 0.92 / 0.94 are
// exactly 16 / 14 / 12, and precision, recall and F1 are exact fractions
// of 18 and 20. Every (head, tail) combination is unique, which makes the
// greedy one-to-one matching a perfect matching over these intended pairs.
struct EvalBenchmark {
    apikg::KnowledgeGraph kg;  // 18 extracted triples, source id "bench"
    apikg::GoldSet gold;       // 20 gold triples
    std::vector<double> thresholds{0.90, 0.92, 0.94};
    std::vector<long long> expected_matches{16, 14, 12};
};

inline apikg::KgTriple bench_triple(const std::string& head, const std::string& phrase,
                                    const std::string& tail) {
    apikg::KgTriple t;
    t.head = apikg::make_entity(head);
    t.relation_phrase = phrase;
    t.tail = apikg::make_entity(tail);
    t.relation_type = "dependency";
    t.type_triple = apikg::TypeTriple{"class", "dependency", "method"};
    t.source_id = "bench";
    return t;
}

inline EvalBenchmark make_eval_benchmark() {
    // head, gold relation, extracted relation (empty = not extracted), tail
    struct Row {
        const char* head;
        const char* gold_rel;
        const char* ext_rel;
        const char* tail;
    };
    static const Row rows[] = {
        // verbatim matches, similarity exactly 1
        {"List.of", "returns an immutable view of", "returns an immutable view of",
         "Arrays.asList"},
        {"HashMap.put", "may resize", "may resize", "HashMap.table"},
        {"Collections.sort", "delegates to", "delegates to", "List.sort"},
        {"String.format", "is implemented by", "is implemented by", "Formatter.format"},
        {"BufferedReader.readLine", "blocks until", "blocks until", "InputStream.read"},
        {"Stream.map", "is lazier than", "is lazier than", "List.replaceAll"},
        {"Optional.map", "short-circuits on", "short-circuits on", "Optional.empty"},
        {"Thread.start", "must precede", "must precede", "Thread.join"},
        {"Math.floorDiv", "differs from", "differs from", "Math.round"},
        {"Scanner.nextInt", "consumes less than", "consumes less than", "Scanner.nextLine"},
        {"Path.resolve", "combines with", "combines with", "Path.relativize"},
        {"Duration.ofMillis", "converts to", "converts to", "Duration.toNanos"},
        // rephrased relations, similarity in (0.92, 0.94)
        {"Channels.newChannel", "supersedes", "fully supersedes", "Instant.toEpochMilli"},
        {"Pattern.compile", "throws when given", "throws an error when given",
         "CopyOnWriteArrayList.iterator"},
        // rephrased relations, similarity in (0.90, 0.92)
        {"ConcurrentHashMap.compute", "invalidates", "completely invalidates",
         "Objects.requireNonNull"},
        {"StringBuilder.append", "throws when given", "throws an error when given",
         "Stream.collect"},
        // rephrased relation below 0.90: eligible but never counted
        {"Arrays.copyOfRange", "must be called before", "must be invoked before",
         "ThreadPoolExecutor.submit"},
        // gold facts with no extracted counterpart
        {"Deque.peekFirst", "falls back to", "", "Queue.element"},
        {"Iterator.forEachRemaining", "drains into", "", "Spliterator.tryAdvance"},
    };

    EvalBenchmark bench;
    std::vector<apikg::GoldTriple>& gold = bench.gold.by_id["bench"];
    for (const Row& row : rows) {
        gold.push_back(apikg::GoldTriple{row.head, row.gold_rel, row.tail});
        if (row.ext_rel[0] != '\0') {
            bench.kg.triples.push_back(bench_triple(row.head, row.ext_rel, row.tail));
        }
    }
    // 20th gold fact and 18th extraction: the extraction names the wrong
    // head, so neither side can be matched.
    gold.push_back(apikg::GoldTriple{"Vector.ensureCapacity", "delegates to", "ArrayList.clone"});
    bench.kg.triples.push_back(bench_triple("Vector.trimToSize", "delegates to",
                                            "ArrayList.clone"));

    std::set<std::string> seen;
    for (const auto& t : bench.kg.triples) {
        if (seen.insert(t.head.normalized).second) {
            bench.kg.entities.push_back({t.head, t.type_triple.head_type});
        }
        if (seen.insert(t.tail.normalized).second) {
            bench.kg.entities.push_back({t.tail, t.type_triple.tail_type});
        }
    }
    return bench;
}

}  // namespace testing
