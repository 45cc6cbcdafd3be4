#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "apikg/corpus.hpp"
#include "apikg/errors.hpp"
#include "helpers.hpp"

using apikg::Corpus;
using apikg::TextUnit;

namespace {

TextUnit unit_of(std::string text) { return TextUnit{"t", "test", std::move(text)}; }

}  // namespace

TEST_CASE("tokenize splits on runs of whitespace") {
    CHECK(apikg::tokenize("a b\tc\nd") == std::vector<std::string>{"a", "b", "c", "d"});
    CHECK(apikg::tokenize("  spaced   out  ") == std::vector<std::string>{"spaced", "out"});
    CHECK(apikg::tokenize("") == std::vector<std::string>{});
    CHECK(apikg::tokenize("   \n\t ") == std::vector<std::string>{});
    CHECK(apikg::tokenize("one") == std::vector<std::string>{"one"});
}

TEST_CASE("tokenize treats non-ASCII spaces as separators") {
    // NBSP and EM SPACE between words
    CHECK(apikg::tokenize("left\xC2\xA0right") == std::vector<std::string>{"left", "right"});
    CHECK(apikg::tokenize("a\xE2\x80\x83z") == std::vector<std::string>{"a", "z"});
    // multi-byte letters survive intact
    CHECK(apikg::tokenize("\xCE\xB1 \xCE\xB2") ==
          std::vector<std::string>{"\xCE\xB1", "\xCE\xB2"});
}

TEST_CASE("short texts never pass the filter, whatever they contain") {
    // exactly 8 tokens, with both a call marker and a dotted name
    CHECK_FALSE(apikg::passes_filter(
        unit_of("Use iterator.remove() here now please thank you kindly")));
    // one more token flips it
    CHECK(apikg::passes_filter(
        unit_of("Use iterator.remove() here right now please thank you kindly")));
}

TEST_CASE("each signal admits a long enough text on its own") {
    // only the () marker
    CHECK(apikg::passes_filter(unit_of(
        "When sorting fails we simply call reverse() and try the whole procedure again tomorrow")));
    // only a dotted name
    CHECK(apikg::passes_filter(unit_of(
        "Most developers prefer java.util collections over custom containers for everyday data "
        "handling tasks")));
    // only the word "method" (capitalised, mid-sentence)
    CHECK(apikg::passes_filter(unit_of(
        "That Method seems slow when handling many elements during iteration under heavy load")));
    // keyword followed by punctuation still counts as a whole word
    CHECK(apikg::passes_filter(
        unit_of("Always wrap your concurrency sensitive class, then test it under load for weeks")));
    CHECK(apikg::passes_filter(unit_of(
        "Every package in this repository gets scanned before deployment to the production "
        "servers")));
}

TEST_CASE("texts without any signal are rejected") {
    CHECK_FALSE(apikg::passes_filter(unit_of(
        "This text focuses on the two most common operations: Adding/removing elements...")));
    // "classy" must not count as the word "class"
    CHECK_FALSE(apikg::passes_filter(unit_of(
        "Those classy utilities from external vendors rarely help when debugging sudden "
        "performance issues")));
    // digits around a dot are not a dotted name
    CHECK_FALSE(apikg::passes_filter(
        unit_of("Pi is 3.14159 which appears in numeric constants more often than anything else")));
    CHECK_FALSE(apikg::passes_filter(unit_of("")));
}

TEST_CASE("filter_corpus keeps passing units in order and is idempotent") {
    Corpus corpus;
    corpus.units.push_back({"a", "s", "too short"});
    corpus.units.push_back(
        {"b", "s", "Calling clear() resets the container so later inserts start from scratch"});
    corpus.units.push_back(
        {"c", "s", "Nothing interesting happens in this sentence about gardening and the weather "
                   "today"});
    corpus.units.push_back(
        {"d", "s", "The java.nio buffers are trickier than streams when mixing reads and writes"});

    Corpus once = apikg::filter_corpus(corpus);
    REQUIRE(once.units.size() == 2);
    CHECK(once.units[0].id == "b");
    CHECK(once.units[1].id == "d");

    Corpus twice = apikg::filter_corpus(once);
    REQUIRE(twice.units.size() == once.units.size());
    for (size_t i = 0; i < once.units.size(); ++i) CHECK(twice.units[i].id == once.units[i].id);
}

TEST_CASE("filter idempotence over randomized corpora") {
    std::mt19937 rng(20240817);
    const std::vector<std::string> words = {
        "the",     "quick",  "handler", "waits",    "forever", "sort()",  "java.util.List",
        "method",  "class",  "package", "classILY", "a.b",     "()",      "elements",
        "3.14",    "update", "never",   "always",   "cache",   "evicts",
    };
    std::uniform_int_distribution<size_t> word_at(0, words.size() - 1);
    std::uniform_int_distribution<int> length(0, 15);

    Corpus corpus;
    for (int n = 0; n < 500; ++n) {
        std::string text;
        int len = length(rng);
        for (int w = 0; w < len; ++w) {
            if (w) text += ' ';
            text += words[word_at(rng)];
        }
        corpus.units.push_back({"u" + std::to_string(n), "gen", text});
    }

    Corpus once = apikg::filter_corpus(corpus);
    Corpus twice = apikg::filter_corpus(once);
    REQUIRE(once.units.size() == twice.units.size());
    for (size_t i = 0; i < once.units.size(); ++i) {
        CHECK(once.units[i].id == twice.units[i].id);
        CHECK(apikg::passes_filter(once.units[i]));
    }
    // and everything dropped actually fails the predicate
    size_t kept = 0;
    for (const auto& u : corpus.units)
        if (apikg::passes_filter(u)) ++kept;
    CHECK(kept == once.units.size());
}

TEST_CASE("corpus JSONL round trip") {
    testing::TempDir dir;
    Corpus corpus;
    corpus.units.push_back({"id-1", "so", "First text with someCall() inside"});
    corpus.units.push_back({"id-2", "docs", "Second text, plain words only"});
    std::string path = dir.file("corpus.jsonl");
    apikg::write_corpus_jsonl(corpus, path);

    Corpus back = apikg::read_corpus_jsonl(path);
    REQUIRE(back.units.size() == 2);
    CHECK(back.units[0].id == "id-1");
    CHECK(back.units[0].source == "so");
    CHECK(back.units[0].content == "First text with someCall() inside");
    CHECK(back.units[1].id == "id-2");
}

TEST_CASE("corpus reader skips blank lines") {
    testing::TempDir dir;
    std::string path = dir.write("c.jsonl",
                                 R"({"id": "a", "source": "s", "text": "one"})"
                                 "\n\n"
                                 R"({"id": "b", "source": "s", "text": "two"})"
                                 "\n");
    Corpus corpus = apikg::read_corpus_jsonl(path);
    REQUIRE(corpus.units.size() == 2);
    CHECK(corpus.units[1].id == "b");
}

TEST_CASE("corpus reader reports the offending line") {
    testing::TempDir dir;

    SUBCASE("duplicate id") {
        std::string path = dir.write("c.jsonl",
                                     R"({"id": "a", "source": "s", "text": "one"})"
                                     "\n"
                                     R"({"id": "a", "source": "s", "text": "two"})"
                                     "\n");
        CHECK_THROWS_WITH_AS(apikg::read_corpus_jsonl(path), doctest::Contains(":2:"),
                             apikg::DuplicateId);
    }
    SUBCASE("empty text") {
        std::string path = dir.write("c.jsonl",
                                     R"({"id": "a", "source": "s", "text": ""})"
                                     "\n");
        CHECK_THROWS_WITH_AS(apikg::read_corpus_jsonl(path), doctest::Contains(":1:"),
                             apikg::DataError);
    }
    SUBCASE("unparseable json") {
        std::string path = dir.write("c.jsonl",
                                     R"({"id": "a", "source": "s", "text": "ok"})"
                                     "\n{not json\n");
        CHECK_THROWS_WITH_AS(apikg::read_corpus_jsonl(path), doctest::Contains(":2:"),
                             apikg::DataError);
    }
    SUBCASE("missing field") {
        std::string path = dir.write("c.jsonl", R"({"id": "a", "source": "s"})"
                                                "\n");
        CHECK_THROWS_AS(apikg::read_corpus_jsonl(path), apikg::DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(apikg::read_corpus_jsonl(dir.file("absent.jsonl")), apikg::DataError);
    }
}

TEST_CASE("exit codes of the error hierarchy") {
    CHECK(apikg::ConfigError("x").exit_code() == 2);
    CHECK(apikg::ProviderUnavailable("x").exit_code() == 3);
    CHECK(apikg::FixtureMiss("x").exit_code() == 3);
    CHECK(apikg::BudgetExceeded("x").exit_code() == 3);
    CHECK(apikg::DuplicateId("x").exit_code() == 4);
    CHECK(apikg::MalformedOutput("x").exit_code() == 4);
    CHECK(apikg::EmptyKG("x").exit_code() == 4);
}
