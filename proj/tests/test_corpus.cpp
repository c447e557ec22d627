#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "sqa/corpus.hpp"
#include "sqa/error.hpp"
#include "sqa/text.hpp"

using namespace sqa;

namespace {

ResponseRecord make_record(std::string id, Section section, std::vector<std::string> words,
                           std::vector<AnswerAnnotation> answers = {}) {
    ResponseRecord r;
    r.id = std::move(id);
    r.section = section;
    r.prompt = "Describe your job.";
    double t = 0.0;
    for (auto& w : words) {
        r.words.push_back({std::move(w), t, t + 0.5});
        t += 0.5;
    }
    r.answers = std::move(answers);
    return r;
}

const char* kTwoRecords =
    R"({"version":1,"id":"a","section":"C","prompt":"Where do you work?","words":[{"text":"in","start":0.0,"end":0.25},{"text":"a","start":0.25,"end":0.5},{"text":"bank","start":0.5,"end":1.0}],"answers":[{"first":2,"last":2}],"grade":4.0,"transcript_source":"manual"})"
    "\n"
    R"({"version":1,"id":"b","section":"E","prompt":"Any plans?","words":[{"text":"no","start":0.1,"end":0.4}],"answers":["no-answer"],"transcript_source":"asr:kaldi"})"
    "\n";

} // namespace

TEST_CASE("normalize_word lowercases and strips edge punctuation") {
    CHECK(normalize_word("Bank,") == "bank");
    CHECK(normalize_word("  \"Hello  World!\" ") == "hello world");
    CHECK(normalize_word("don't") == "don't");
    CHECK(normalize_word("...") == "");
}

TEST_CASE("join_words offsets are code points") {
    const auto p = join_words({"caf\xc3\xa9", "au", "lait"});
    CHECK(p.text == "caf\xc3\xa9 au lait");
    REQUIRE(p.word_offsets.size() == 3);
    CHECK(p.word_offsets[0] == CharSpan{0, 4});
    CHECK(p.word_offsets[1] == CharSpan{5, 7});
    CHECK(p.word_offsets[2] == CharSpan{8, 12});
    CHECK(code_point_length(p.text) == 12);
    CHECK(utf8_substr(p.text, {0, 4}) == "caf\xc3\xa9");
}

TEST_CASE("sqa corpus round-trips byte-exactly") {
    std::istringstream in(kTwoRecords);
    const auto records = parse_sqa_corpus(in);
    REQUIRE(records.size() == 2);
    CHECK(records[0].words[2].text == "bank");
    CHECK(records[0].answers[0].span == WordSpan{2, 2});
    CHECK(records[1].answers[0].is_no_answer());
    CHECK(records[1].transcript_source == "asr:kaldi");
    CHECK_FALSE(records[1].grade.has_value());

    std::ostringstream out;
    write_sqa_corpus(out, records);
    CHECK(out.str() == kTwoRecords);
}

TEST_CASE("sqa corpus parse errors") {
    SUBCASE("empty file") {
        std::istringstream in("");
        CHECK(parse_sqa_corpus(in).empty());
    }
    SUBCASE("inverted timestamps name the word") {
        std::istringstream in(
            R"({"version":1,"id":"x","section":"D","prompt":"p","words":[{"text":"a","start":0,"end":1},{"text":"b","start":1.5,"end":1.2}],"answers":[],"transcript_source":"manual"})");
        try {
            parse_sqa_corpus(in);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("word 1") != std::string::npos);
            CHECK(std::string(e.what()).find("record 0") != std::string::npos);
        }
    }
    SUBCASE("missing field is named with line and record") {
        std::istringstream in(std::string(kTwoRecords) +
                              R"({"version":1,"id":"c","prompt":"p","words":[],"answers":[],"transcript_source":"manual"})");
        try {
            parse_sqa_corpus(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 3") != std::string::npos);
            CHECK(msg.find("record 2") != std::string::npos);
            CHECK(msg.find("section") != std::string::npos);
        }
    }
    SUBCASE("unknown field rejected") {
        std::istringstream in(
            R"({"version":1,"id":"x","section":"D","prompt":"p","words":[],"answers":[],"transcript_source":"manual","extra":1})");
        CHECK_THROWS_AS(parse_sqa_corpus(in), ParseError);
    }
    SUBCASE("missing version rejected") {
        std::istringstream in(R"({"id":"x","section":"D","prompt":"p","words":[],"answers":[],"transcript_source":"manual"})");
        CHECK_THROWS_AS(parse_sqa_corpus(in), ParseError);
    }
    SUBCASE("span out of bounds") {
        std::istringstream in(
            R"({"version":1,"id":"x","section":"D","prompt":"p","words":[{"text":"a","start":0,"end":1}],"answers":[{"first":0,"last":1}],"transcript_source":"manual"})");
        CHECK_THROWS_AS(parse_sqa_corpus(in), ValidationError);
    }
}

TEST_CASE("round-trip property on generated corpora") {
    std::mt19937 rng(20240611);
    for (int trial = 0; trial < 20; ++trial) {
        const auto records = testing::synthetic_corpus(rng, 15, 4, 12);
        std::ostringstream out;
        write_sqa_corpus(out, records);
        std::istringstream in(out.str());
        const auto back = parse_sqa_corpus(in);
        CHECK(back == records);
        std::ostringstream again;
        write_sqa_corpus(again, back);
        CHECK(again.str() == out.str());
    }
}

TEST_CASE("filter_unclear") {
    const auto r1 = make_record("r1", Section::C, {"i", "work", "here"});
    const auto r2 = make_record("r2", Section::C, {"i", "unclear", "here"});
    const std::vector<ResponseRecord> both{r1, r2};
    const auto kept = filter_unclear(both, "unclear");
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].id == "r1");
    CHECK(filter_unclear(kept, "unclear") == kept);
    CHECK(filter_unclear(both, "absent") == both);
    CHECK(filter_unclear({r2, r2}, "unclear").empty());
    CHECK_THROWS_AS(filter_unclear(both, ""), ValidationError);
}

TEST_CASE("map_grade") {
    CHECK(map_grade("A1") == 1);
    CHECK(map_grade("b2") == 4);
    CHECK(map_grade("C2") == 6);
    CHECK(map_grade("below-A1") == 0);
    CHECK_THROWS_AS(map_grade("B9"), ValidationError);
}

TEST_CASE("summarize uses the n-1 denominator") {
    const auto s = summarize({2.0, 4.0});
    CHECK(s.mean == doctest::Approx(3.0));
    CHECK(s.std == doctest::Approx(1.41421356).epsilon(1e-6));
    CHECK_FALSE(s.degenerate);
    const auto one = summarize({7.0});
    CHECK(one.mean == 7.0);
    CHECK(one.std == 0.0);
    CHECK(one.degenerate);
}

TEST_CASE("corpus_stats agrees with a two-pass oracle") {
    std::mt19937 rng(77);
    const auto records = testing::synthetic_corpus(rng, 60);
    const auto stats = corpus_stats(records);
    REQUIRE(stats.sections.size() == 3);
    for (const auto& sec : stats.sections) {
        std::vector<double> words;
        std::vector<double> seconds;
        std::vector<double> answer_words;
        for (const auto& r : records) {
            if (r.section != sec.section) {
                continue;
            }
            words.push_back(static_cast<double>(r.words.size()));
            seconds.push_back(r.words.back().end_time - r.words.front().start_time);
            double aw = 0.0;
            bool any = false;
            for (const auto& a : r.answers) {
                if (a.span) {
                    aw += static_cast<double>(a.span->length());
                    any = true;
                }
            }
            if (any) {
                answer_words.push_back(aw);
            }
        }
        CHECK(sec.samples == words.size());
        CHECK(sec.response_words.mean == oracle::two_pass(words).mean);
        CHECK(sec.response_words.std == oracle::two_pass(words).std);
        CHECK(sec.response_seconds.mean == doctest::Approx(oracle::two_pass(seconds).mean).epsilon(1e-12));
        CHECK(sec.response_seconds.std == doctest::Approx(oracle::two_pass(seconds).std).epsilon(1e-12));
        CHECK(sec.answer_words.n == answer_words.size());
        CHECK(sec.answer_words.mean == oracle::two_pass(answer_words).mean);
    }
}

TEST_CASE("stats csv layout") {
    const std::vector<ResponseRecord> records{
        make_record("a", Section::E, {"one", "two"}, {{WordSpan{0, 0}}}),
        make_record("b", Section::E, {"one", "two", "three", "four"}, {{WordSpan{1, 2}}}),
    };
    std::ostringstream out;
    write_stats_csv(out, corpus_stats(records));
    const std::string csv = out.str();
    CHECK(csv.rfind("section,statistic,n,mean,std,degenerate\n", 0) == 0);
    CHECK(csv.find("E,samples,2,2,0,0\n") != std::string::npos);
    CHECK(csv.find("E,response_words,2,3,1.4142135623730951,0\n") != std::string::npos);
}

TEST_CASE("squad loading") {
    const std::string json = R"({"version":"v2.0","data":[{"title":"T","paragraphs":[{"context":"Go to the bank today.","qas":[
        {"id":"q1","question":"Where?","answers":[{"text":"the bank","answer_start":6}],"is_impossible":false},
        {"id":"q2","question":"Who?","answers":[],"is_impossible":true}]}]}]})";
    std::istringstream in(json);
    const auto samples = parse_squad(in);
    REQUIRE(samples.size() == 2);
    CHECK_FALSE(samples[0].is_impossible);
    CHECK(samples[0].gold_answers[0].span == CharSpan{6, 14});
    CHECK(samples[0].passage_id == "T#0");
    CHECK(samples[1].is_impossible);
    CHECK(samples[1].gold_answers.empty());

    std::ostringstream out;
    write_squad(out, samples);
    std::istringstream back(out.str());
    CHECK(parse_squad(back) == samples);

    std::string bad = json;
    bad.replace(bad.find("\"answer_start\":6"), 16, "\"answer_start\":5");
    std::istringstream bad_in(bad);
    try {
        parse_squad(bad_in);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("q1") != std::string::npos);
    }
}
