#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "apikg/construct.hpp"
#include "apikg/errors.hpp"
#include "apikg/eval.hpp"
#include "apikg/explore.hpp"
#include "eval_fixture.hpp"
#include "helpers.hpp"

using apikg::cosine;
using apikg::embed;
using apikg::EvalReport;
using apikg::GoldSet;
using apikg::GoldTriple;
using apikg::KgTriple;
using apikg::KnowledgeGraph;
using apikg::TypeTriple;
using testing::bench_triple;

namespace {

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Small graph + gold set with known counts: 3 extracted, 4 gold, 2 exact
// matches on text t1.
std::pair<KnowledgeGraph, GoldSet> small_example() {
    KnowledgeGraph kg;
    kg.triples.push_back(bench_triple("Files.walk", "streams", "Path.iterator"));
    kg.triples.push_back(bench_triple("Set.add", "rejects duplicates unlike", "List.add"));
    kg.triples.push_back(bench_triple("Random.ints", "feeds", "IntStream.limit"));
    for (auto& t : kg.triples) t.source_id = "t1";

    GoldSet gold;
    gold.by_id["t1"] = {
        GoldTriple{"Files.walk", "streams", "Path.iterator"},
        GoldTriple{"Set.add", "rejects duplicates unlike", "List.add"},
        GoldTriple{"Timer.schedule", "wraps", "TimerTask.run"},
        GoldTriple{"Byte.parseByte", "narrows", "Integer.parseInt"},
    };
    return {kg, gold};
}

}  // namespace

TEST_CASE("embed is deterministic, unit length, and fixed dimension") {
    const std::vector<double> v = embed("Collections.sort delegates to List.sort");
    CHECK(v.size() == apikg::kEmbeddingDim);
    CHECK(l2_norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(embed("Collections.sort delegates to List.sort") == v);  // bitwise

    // a different string embeds differently
    CHECK(embed("Collections.sort delegates to List.sortX") != v);
}

TEST_CASE("embed edge cases: empty and shorter-than-a-trigram input") {
    const std::vector<double> empty = embed("");
    CHECK(empty.size() == apikg::kEmbeddingDim);
    CHECK(std::all_of(empty.begin(), empty.end(), [](double x) { return x == 0.0; }));

    // one- and two-byte inputs contribute themselves as a single feature
    for (const char* s : {"a", "ab"}) {
        const std::vector<double> v = embed(s);
        size_t nonzero = 0;
        for (double x : v) {
            if (x != 0.0) ++nonzero;
        }
        CHECK(nonzero == 1);
        CHECK(l2_norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cosine: exact 1 on equal vectors, 0 on zero or disjoint, symmetric") {
    const std::vector<double> a = embed("Deque.addFirst prepends to Deque.peek");
    const std::vector<double> b = embed("Deque.addFirst appends to Deque.peek");

    CHECK(cosine(a, a) == 1.0);  // exactly, not approximately
    CHECK(cosine(a, embed("")) == 0.0);
    CHECK(cosine(embed(""), embed("")) == 0.0);

    // "aaaa" and "bbbb" hash their trigrams into different buckets
    CHECK(cosine(embed("aaaa"), embed("bbbb")) == 0.0);

    const double ab = cosine(a, b);
    CHECK(ab == cosine(b, a));
    CHECK(ab > 0.0);
    CHECK(ab < 1.0);

    std::vector<double> short_vec(8, 0.5);
    CHECK_THROWS_AS(cosine(a, short_vec), apikg::DataError);
}

TEST_CASE("cosine of trigram embeddings stays within [0, 1] on random text") {
    std::mt19937 rng(20240811);
    std::uniform_int_distribution<int> len(0, 24);
    std::uniform_int_distribution<int> ch('a', 'z');
    for (int round = 0; round < 200; ++round) {
        std::string s1, s2;
        for (int i = len(rng); i > 0; --i) s1.push_back(static_cast<char>(ch(rng)));
        for (int i = len(rng); i > 0; --i) s2.push_back(static_cast<char>(ch(rng)));
        const double c = cosine(embed(s1), embed(s2));
        CHECK(c >= 0.0);
        CHECK(c <= 1.0 + 1e-12);
    }
}

TEST_CASE("serialize_triple joins the surfaces with single spaces") {
    CHECK(apikg::serialize_triple("Map.get", "returns null for", "Map.remove") ==
          "Map.get returns null for Map.remove");
    CHECK(apikg::serialize_triple("", "r", "") == " r ");
}

TEST_CASE("match_triple gates on normalized endpoints, then strict similarity") {
    const GoldTriple gold{"Arrays.copyOfRange", "must be called before",
                          "ThreadPoolExecutor.submit"};

    SUBCASE("identical triple matches below 1 but not at 1") {
        KgTriple same = bench_triple("Arrays.copyOfRange", "must be called before",
                                     "ThreadPoolExecutor.submit");
        CHECK(apikg::match_triple(same, gold, 0.999));
        CHECK_FALSE(apikg::match_triple(same, gold, 1.0));  // strictly greater
    }

    SUBCASE("rephrased relation sits between 0.85 and 0.90") {
        KgTriple rephrased = bench_triple("Arrays.copyOfRange", "must be invoked before",
                                          "ThreadPoolExecutor.submit");
        CHECK(apikg::match_triple(rephrased, gold, 0.85));
        CHECK_FALSE(apikg::match_triple(rephrased, gold, 0.90));
    }

    SUBCASE("endpoint mismatch fails at any threshold") {
        KgTriple wrong_head = bench_triple("Arrays.copyOf", "must be called before",
                                           "ThreadPoolExecutor.submit");
        KgTriple wrong_tail = bench_triple("Arrays.copyOfRange", "must be called before",
                                           "ForkJoinPool.submit");
        CHECK_FALSE(apikg::match_triple(wrong_head, gold, 0.0));
        CHECK_FALSE(apikg::match_triple(wrong_tail, gold, 0.0));
    }

    SUBCASE("call parentheses are ignored when comparing endpoints") {
        KgTriple with_parens = bench_triple("Arrays.copyOfRange()", "must be called before",
                                            "ThreadPoolExecutor.submit()");
        CHECK(apikg::match_triple(with_parens, gold, 0.85));
    }
}

TEST_CASE("read_gold_jsonl parses per-text triples and reports line numbers") {
    testing::TempDir dir;

    SUBCASE("round trip with a blank line") {
        const std::string path = dir.write(
            "gold.jsonl",
            "{\"id\": \"t1\", \"triples\": [{\"head\": \"A\", \"relation\": \"r\", "
            "\"tail\": \"B\"}]}\n"
            "\n"
            "{\"id\": \"t2\", \"triples\": []}\n");
        GoldSet gold = apikg::read_gold_jsonl(path);
        REQUIRE(gold.by_id.size() == 2);
        REQUIRE(gold.by_id.at("t1").size() == 1);
        CHECK(gold.by_id.at("t1")[0].head == "A");
        CHECK(gold.by_id.at("t1")[0].relation == "r");
        CHECK(gold.by_id.at("t1")[0].tail == "B");
        CHECK(gold.by_id.at("t2").empty());
        CHECK(gold.total() == 1);
    }

    SUBCASE("duplicate text id") {
        const std::string path = dir.write("dup.jsonl",
                                           "{\"id\": \"t1\", \"triples\": []}\n"
                                           "{\"id\": \"t1\", \"triples\": []}\n");
        CHECK_THROWS_WITH_AS(apikg::read_gold_jsonl(path), doctest::Contains(":2:"),
                             apikg::DuplicateId);
        try {
            apikg::read_gold_jsonl(path);
        } catch (const apikg::DuplicateId& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
            CHECK(std::string(e.what()).find("t1") != std::string::npos);
        }
    }

    SUBCASE("invalid JSON names the line") {
        const std::string path = dir.write("bad.jsonl",
                                           "{\"id\": \"t1\", \"triples\": []}\n"
                                           "not json\n");
        try {
            apikg::read_gold_jsonl(path);
            FAIL("expected DataError");
        } catch (const apikg::DataError& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }

    SUBCASE("missing fields and missing file") {
        const std::string path = dir.write("missing.jsonl", "{\"id\": \"t1\"}\n");
        CHECK_THROWS_AS(apikg::read_gold_jsonl(path), apikg::DataError);
        CHECK_THROWS_AS(apikg::read_gold_jsonl(dir.file("absent.jsonl")), apikg::DataError);
    }
}

TEST_CASE("score on a small example: 3 extracted, 4 gold, 2 matches") {
    auto [kg, gold] = small_example();
    EvalReport report = apikg::score(kg, gold, {0.5});

    CHECK(report.extracted_total == 3);
    CHECK(report.gold_total == 4);
    REQUIRE(report.matches.size() == 2);
    for (const auto& m : report.matches) {
        CHECK(m.source_id == "t1");
        CHECK(m.similarity == 1.0);
        CHECK(m.extracted == m.gold);
    }

    REQUIRE(report.per_threshold.size() == 1);
    const auto& ts = report.per_threshold[0];
    CHECK(ts.threshold == 0.5);
    CHECK(ts.matches == 2);
    CHECK(ts.precision == 2.0 / 3.0);
    CHECK(ts.recall == 0.5);
    const double p = 2.0 / 3.0, r = 0.5;
    CHECK(ts.f1 == 2.0 * p * r / (p + r));
    CHECK(ts.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("score matches one-to-one: duplicates cannot double-count") {
    SUBCASE("two identical extractions, one gold fact") {
        KnowledgeGraph kg;
        kg.triples.push_back(bench_triple("A.run", "starts", "B.stop"));
        kg.triples.push_back(bench_triple("A.run", "starts", "B.stop"));
        GoldSet gold;
        gold.by_id["bench"] = {GoldTriple{"A.run", "starts", "B.stop"}};
        EvalReport report = apikg::score(kg, gold, {0.9});
        CHECK(report.matches.size() == 1);
        CHECK(report.per_threshold[0].matches == 1);
        CHECK(report.per_threshold[0].precision == 0.5);
        CHECK(report.per_threshold[0].recall == 1.0);
    }

    SUBCASE("one extraction, two identical gold facts") {
        KnowledgeGraph kg;
        kg.triples.push_back(bench_triple("A.run", "starts", "B.stop"));
        GoldSet gold;
        gold.by_id["bench"] = {GoldTriple{"A.run", "starts", "B.stop"},
                               GoldTriple{"A.run", "starts", "B.stop"}};
        EvalReport report = apikg::score(kg, gold, {0.9});
        CHECK(report.matches.size() == 1);
        CHECK(report.per_threshold[0].precision == 1.0);
        CHECK(report.per_threshold[0].recall == 0.5);
    }
}

TEST_CASE("score never matches across source texts") {
    KnowledgeGraph kg;
    kg.triples.push_back(bench_triple("A.run", "starts", "B.stop"));
    kg.triples.back().source_id = "t1";
    GoldSet gold;
    gold.by_id["t2"] = {GoldTriple{"A.run", "starts", "B.stop"}};

    EvalReport report = apikg::score(kg, gold, {0.5});
    CHECK(report.extracted_total == 1);
    CHECK(report.gold_total == 1);
    CHECK(report.matches.empty());
    CHECK(report.per_threshold[0].matches == 0);
    CHECK(report.per_threshold[0].f1 == 0.0);
}

TEST_CASE("score conventions when one side is empty") {
    GoldSet gold;
    gold.by_id["t1"] = {GoldTriple{"A.run", "starts", "B.stop"}};

    SUBCASE("nothing extracted") {
        EvalReport report = apikg::score(KnowledgeGraph{}, gold, {0.9});
        CHECK(report.extracted_total == 0);
        CHECK(report.per_threshold[0].precision == 0.0);
        CHECK(report.per_threshold[0].recall == 0.0);
        CHECK(report.per_threshold[0].f1 == 0.0);
    }

    SUBCASE("empty gold set") {
        KnowledgeGraph kg;
        kg.triples.push_back(bench_triple("A.run", "starts", "B.stop"));
        kg.triples.back().source_id = "t1";
        EvalReport report = apikg::score(kg, GoldSet{}, {0.9});
        CHECK(report.gold_total == 0);
        CHECK(report.per_threshold[0].precision == 0.0);
        CHECK(report.per_threshold[0].recall == 0.0);
        CHECK(report.per_threshold[0].f1 == 0.0);
    }
}

TEST_CASE("hand-scored benchmark: exact scores and strict decline across thresholds") {
    testing::EvalBenchmark bench = testing::make_eval_benchmark();
    EvalReport report = apikg::score(bench.kg, bench.gold, bench.thresholds);

    CHECK(report.extracted_total == 18);
    CHECK(report.gold_total == 20);
    REQUIRE(report.matches.size() == 17);  // everything eligible pairs up

    // the similarity bands the benchmark was built around
    size_t exact = 0, high = 0, mid = 0, low = 0;
    for (const auto& m : report.matches) {
        if (m.similarity == 1.0) {
            ++exact;
        } else if (m.similarity > 0.92 && m.similarity < 0.94) {
            ++high;
        } else if (m.similarity > 0.90 && m.similarity < 0.92) {
            ++mid;
        } else if (m.similarity < 0.90) {
            ++low;
        }
    }
    CHECK(exact == 12);
    CHECK(high == 2);
    CHECK(mid == 2);
    CHECK(low == 1);

    REQUIRE(report.per_threshold.size() == 3);
    const long long expected_matches[] = {16, 14, 12};
    for (size_t i = 0; i < 3; ++i) {
        const auto& ts = report.per_threshold[i];
        const long long m = expected_matches[i];
        CHECK(ts.matches == m);
        CHECK(ts.precision == static_cast<double>(m) / 18.0);
        CHECK(ts.recall == static_cast<double>(m) / 20.0);
        // with micro counts, f1 reduces to 2m / (extracted + gold)
        CHECK(ts.f1 == doctest::Approx(2.0 * static_cast<double>(m) / 38.0).epsilon(1e-12));
    }
    for (size_t i = 1; i < 3; ++i) {
        CHECK(report.per_threshold[i].matches < report.per_threshold[i - 1].matches);
        CHECK(report.per_threshold[i].precision < report.per_threshold[i - 1].precision);
        CHECK(report.per_threshold[i].recall < report.per_threshold[i - 1].recall);
        CHECK(report.per_threshold[i].f1 < report.per_threshold[i - 1].f1);
    }
}

TEST_CASE("score is invariant under extracted triple order") {
    testing::EvalBenchmark bench = testing::make_eval_benchmark();
    const std::string reference =
        apikg::report_to_json(apikg::score(bench.kg, bench.gold, bench.thresholds));

    std::mt19937 rng(7);
    for (int round = 0; round < 5; ++round) {
        std::shuffle(bench.kg.triples.begin(), bench.kg.triples.end(), rng);
        const std::string shuffled =
            apikg::report_to_json(apikg::score(bench.kg, bench.gold, bench.thresholds));
        CHECK(shuffled == reference);
    }
}

TEST_CASE("matches are bounded by both sides per text") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> n_ext(0, 6), n_gold(0, 6), pick(0, 3);
    const char* heads[] = {"A.a", "B.b", "C.c", "D.d"};
    const char* tails[] = {"X.x", "Y.y", "Z.z", "W.w"};
    const char* rels[] = {"calls", "wraps", "replaces", "shadows"};

    for (int round = 0; round < 100; ++round) {
        KnowledgeGraph kg;
        GoldSet gold;
        const int ne = n_ext(rng), ng = n_gold(rng);
        for (int i = 0; i < ne; ++i) {
            kg.triples.push_back(
                bench_triple(heads[pick(rng)], rels[pick(rng)], tails[pick(rng)]));
        }
        for (int i = 0; i < ng; ++i) {
            gold.by_id["bench"].push_back(
                GoldTriple{heads[pick(rng)], rels[pick(rng)], tails[pick(rng)]});
        }
        EvalReport report = apikg::score(kg, gold, {0.0, 0.5, 0.9});
        CHECK(report.matches.size() <= static_cast<size_t>(std::min(ne, ng)));
        for (size_t i = 1; i < report.per_threshold.size(); ++i) {
            CHECK(report.per_threshold[i].matches <= report.per_threshold[i - 1].matches);
        }
    }
}

TEST_CASE("type triple accuracy counts unique candidates once") {
    const TypeTriple t1{"class", "containment", "method"};
    const TypeTriple t2{"class", "dependency", "class"};
    const TypeTriple t3{"method", "equivalence", "method"};
    std::map<TypeTriple, bool> annotations{{t1, true}, {t2, false}, {t3, true}};

    SUBCASE("duplicates collapse") {
        auto acc = apikg::type_triple_accuracy({t1, t2, t1, t1}, annotations);
        CHECK(acc.total == 2);
        CHECK(acc.correct == 1);
        CHECK(acc.accuracy == 0.5);
    }

    SUBCASE("all annotated correct") {
        auto acc = apikg::type_triple_accuracy({t1, t3}, annotations);
        CHECK(acc.total == 2);
        CHECK(acc.correct == 2);
        CHECK(acc.accuracy == 1.0);
    }

    SUBCASE("no candidates") {
        auto acc = apikg::type_triple_accuracy({}, annotations);
        CHECK(acc.total == 0);
        CHECK(acc.correct == 0);
        CHECK(acc.accuracy == 0.0);
    }

    SUBCASE("unannotated candidate is fatal and names the triple") {
        const TypeTriple t4{"package", "access", "method"};
        CHECK_THROWS_WITH_AS(apikg::type_triple_accuracy({t1, t4}, annotations),
                             doctest::Contains("package, access, method"),
                             apikg::MissingAnnotation);
    }
}

TEST_CASE("read_annotations parses head|relation|tail keys to booleans") {
    testing::TempDir dir;

    SUBCASE("well-formed file") {
        const std::string path = dir.write(
            "ann.json",
            "{\"class|containment|method\": true, \"class|dependency|class\": false}\n");
        auto annotations = apikg::read_annotations(path);
        REQUIRE(annotations.size() == 2);
        CHECK(annotations.at(TypeTriple{"class", "containment", "method"}) == true);
        CHECK(annotations.at(TypeTriple{"class", "dependency", "class"}) == false);
    }

    SUBCASE("key with too few separators") {
        const std::string path = dir.write("bad_key.json", "{\"class|method\": true}\n");
        CHECK_THROWS_WITH_AS(apikg::read_annotations(path), doctest::Contains("bad entry"),
                             apikg::DataError);
    }

    SUBCASE("non-boolean value") {
        const std::string path = dir.write("bad_val.json", "{\"a|b|c\": \"yes\"}\n");
        CHECK_THROWS_AS(apikg::read_annotations(path), apikg::DataError);
    }

    SUBCASE("not an object") {
        const std::string path = dir.write("list.json", "[1, 2]\n");
        CHECK_THROWS_AS(apikg::read_annotations(path), apikg::DataError);
    }

    SUBCASE("not JSON at all") {
        const std::string path = dir.write("garbage.json", "nope\n");
        CHECK_THROWS_WITH_AS(apikg::read_annotations(path), doctest::Contains("not valid JSON"),
                             apikg::DataError);
    }
}

TEST_CASE("report_to_json has the full stable shape") {
    auto [kg, gold] = small_example();
    EvalReport report = apikg::score(kg, gold, {0.5, 0.9});
    report.type_triple_accuracy = apikg::TypeTripleAccuracy{34, 26, 26.0 / 34.0};

    const nlohmann::json doc = nlohmann::json::parse(apikg::report_to_json(report));
    CHECK(doc["extracted_total"] == 3);
    CHECK(doc["gold_total"] == 4);
    REQUIRE(doc["per_threshold"].size() == 2);
    CHECK(doc["per_threshold"][0]["threshold"] == 0.5);
    CHECK(doc["per_threshold"][0]["matches"] == 2);
    CHECK(doc["per_threshold"][0].contains("precision"));
    CHECK(doc["per_threshold"][0].contains("recall"));
    CHECK(doc["per_threshold"][0].contains("f1"));
    REQUIRE(doc["matches"].size() == 2);
    for (const auto& m : doc["matches"]) {
        CHECK(m["source_id"] == "t1");
        CHECK(m["similarity"] == 1.0);
    }
    CHECK(doc["type_triple_accuracy"]["total"] == 34);
    CHECK(doc["type_triple_accuracy"]["correct"] == 26);

    report.type_triple_accuracy.reset();
    const nlohmann::json without = nlohmann::json::parse(apikg::report_to_json(report));
    CHECK(without["type_triple_accuracy"].is_null());
}

TEST_CASE("report_to_table prints a fixed-precision summary") {
    auto [kg, gold] = small_example();
    EvalReport report = apikg::score(kg, gold, {0.5});
    const std::string table = apikg::report_to_table(report);

    CHECK(table.find("threshold  matches  precision  recall  f1") == 0);
    CHECK(table.find("0.5000") != std::string::npos);
    CHECK(table.find("0.6667") != std::string::npos);  // precision 2/3
    CHECK(table.find("extracted: 3  gold: 4") != std::string::npos);
    CHECK(table.find("type triples:") == std::string::npos);

    report.type_triple_accuracy = apikg::TypeTripleAccuracy{34, 26, 26.0 / 34.0};
    const std::string with_accuracy = apikg::report_to_table(report);
    CHECK(with_accuracy.find("type triples: 26/34 correct (accuracy 0.7647)") !=
          std::string::npos);
}

TEST_CASE("write_report round-trips through the filesystem") {
    testing::TempDir dir;
    auto [kg, gold] = small_example();
    EvalReport report = apikg::score(kg, gold, {0.5});
    const std::string path = dir.file("report.json");
    apikg::write_report(report, path);
    CHECK(testing::slurp(path) == apikg::report_to_json(report));
}
