#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "support.hpp"
#include "sqa/cli.hpp"
#include "sqa/corpus.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = sqa::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) {
    return std::string(SQA_DATA_DIR) + "/" + name;
}

} // namespace

TEST_CASE("usage errors exit 2") {
    const auto unknown = run({"frobnicate"});
    CHECK(unknown.code == sqa::cli::kUsageError);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(run({}).code == sqa::cli::kUsageError);
    CHECK(run({"stats"}).code == sqa::cli::kUsageError);
    CHECK(run({"eval", "--input", data("reference.jsonl"), "--predictions", "x", "--tos-mode", "bag"}).code ==
          sqa::cli::kUsageError);
    CHECK(run({"--help"}).code == sqa::cli::kOk);
}

TEST_CASE("validate") {
    CHECK(run({"validate", "--input", data("reference.jsonl")}).code == 0);
    CHECK(run({"validate", "--input", data("squad.json"), "--format", "squad"}).code == 0);
    CHECK(run({"validate", "--input", data("logits.jsonl"), "--format", "logits"}).code == 0);
    CHECK(run({"validate", "--input", data("tts.jsonl"), "--format", "transcripts"}).code == 0);
    CHECK(run({"validate", "--input", data("squad.json")}).code == sqa::cli::kValidationFailure);
    CHECK(run({"validate", "--input", data("reference.jsonl"), "--format", "csv"}).code ==
          sqa::cli::kUsageError);

    // validate and stats agree on a broken file
    testing::TempDir dir;
    auto text = testing::read_file(data("reference.jsonl"));
    text.replace(text.find("\"end\":0.3"), 9, "\"end\":-1.0");
    testing::write_file(dir / "bad.jsonl", text);
    const auto v = run({"validate", "--input", (dir / "bad.jsonl").string()});
    const auto s = run({"stats", "--input", (dir / "bad.jsonl").string()});
    CHECK(v.code == sqa::cli::kValidationFailure);
    CHECK(s.code == sqa::cli::kValidationFailure);
    CHECK(v.err.find("word 0") != std::string::npos);
}

TEST_CASE("decode, eval and analyze pipeline") {
    testing::TempDir dir;
    const auto pred = (dir / "pred.jsonl").string();
    const auto d = run({"decode", "--input", data("logits.jsonl"), "--corpus", data("reference.jsonl"),
                        "--output", pred});
    REQUIRE(d.code == 0);
    const auto preds = testing::read_file(pred);
    CHECK(preds.find(R"("sample_id":"r1","word_span":[3,3])") != std::string::npos);
    CHECK(preds.find(R"("sample_id":"r3","word_span":null,"char_span":null)") != std::string::npos);

    const auto e = run({"eval", "--input", data("reference.jsonl"), "--predictions", pred});
    REQUIRE(e.code == 0);
    CHECK(e.out.rfind("section,n,mean_tos,mean_aos,excluded\n", 0) == 0);
    CHECK(e.out.find("C,1,1,1,0\n") != std::string::npos);

    const auto filtered = run({"eval", "--input", data("reference.jsonl"), "--predictions", pred,
                               "--marker", "unclear"});
    CHECK(filtered.out.find("all,2,") != std::string::npos);

    const auto one = run({"analyze", "--input", data("reference.jsonl"), "--system",
                          "asr=" + data("asr.jsonl") + "," + pred, "--output", (dir / "rep").string()});
    CHECK(one.code == sqa::cli::kValidationFailure);
    CHECK(one.err.find("degenerate") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "rep/systems.csv"));

    testing::write_file(dir / "points.csv",
                        "system,wer,tos,aos\nA,18.4,46.9,51.8\nB,20.0,45.8,51.5\nC,26.2,41.4,49.6\n"
                        "D,35.3,37.8,47.8\nE,46.9,32.1,44.8\n");
    const auto ok = run({"analyze", "--points", (dir / "points.csv").string(), "--output",
                         (dir / "rep").string()});
    CHECK(ok.code == 0);
    CHECK(ok.err.find("tos: slope -0.510") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "rep/fits.csv"));
}

TEST_CASE("failed runs leave no partial output") {
    testing::TempDir dir;
    testing::write_file(dir / "partial.jsonl",
                        R"({"version":1,"id":"zzz","section":"C","prompt":"p","words":[{"text":"a","start":0,"end":1}],"answers":[],"transcript_source":"manual"})"
                        "\n");
    const auto out = (dir / "pred.jsonl").string();
    const auto r = run({"decode", "--input", data("logits.jsonl"), "--corpus",
                        (dir / "partial.jsonl").string(), "--output", out});
    CHECK(r.code == sqa::cli::kValidationFailure);
    CHECK_FALSE(std::filesystem::exists(out));
    CHECK_FALSE(std::filesystem::exists(out + ".partial"));
}

TEST_CASE("config file precedence") {
    testing::TempDir dir;
    const auto conf = (dir / "run.conf").string();
    testing::write_file(conf, "# thresholds\nnull-threshold = 5\njobs = 2\n");
    const auto from_file = run({"decode", "--input", data("logits.jsonl"), "--config", conf});
    CHECK(from_file.err.find("3 no-answer") != std::string::npos);
    const auto flag_wins =
        run({"decode", "--input", data("logits.jsonl"), "--config", conf, "--null-threshold", "0"});
    CHECK(flag_wins.err.find("1 no-answer") != std::string::npos);

    setenv(sqa::cli::kConfigEnv, conf.c_str(), 1);
    const auto from_env = run({"decode", "--input", data("logits.jsonl")});
    unsetenv(sqa::cli::kConfigEnv);
    CHECK(from_env.err.find("3 no-answer") != std::string::npos);

    // keys that belong to another subcommand are ignored, unknown keys rejected
    testing::write_file(dir / "other.conf", "hypothesis = x.jsonl\n");
    CHECK(run({"stats", "--input", data("reference.jsonl"), "--config", (dir / "other.conf").string()}).code == 0);
    testing::write_file(dir / "bad.conf", "colour = blue\n");
    const auto bad = run({"stats", "--input", data("reference.jsonl"), "--config", (dir / "bad.conf").string()});
    CHECK(bad.code == sqa::cli::kUsageError);
    CHECK(bad.err.find("colour") != std::string::npos);
}

TEST_CASE("wer and align") {
    const auto w = run({"wer", "--input", data("reference.jsonl"), "--hypothesis", data("asr.jsonl")});
    REQUIRE(w.code == 0);
    CHECK(w.out.find("all,5,2,0,16,0.4375\n") != std::string::npos);

    testing::TempDir dir;
    const auto timed = (dir / "timed.jsonl").string();
    const auto a = run({"align", "--input", data("reference.jsonl"), "--hypothesis", data("asr.jsonl"),
                        "--output", timed, "--dump", (dir / "dump.txt").string()});
    REQUIRE(a.code == 0);
    const auto records = sqa::load_sqa_corpus(timed);
    REQUIRE(records.size() == 3);
    CHECK(records[2].words[2].start_time == 0.9);
    CHECK(testing::read_file(dir / "dump.txt").find("HYP: it is ***     today\n") != std::string::npos);
}

TEST_CASE("augment") {
    testing::TempDir dir;
    const auto out = (dir / "aug.json").string();
    const auto prov = (dir / "prov.jsonl").string();
    const auto r = run({"augment", "--input", data("squad.json"), "--translator", "identity", "--pivots", "fr",
                        "--tts", data("tts.jsonl"), "--output", out, "--provenance", prov});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("back_translation:fr: retained 1/1") != std::string::npos);
    CHECK(testing::read_file(prov).find(R"("id":"q1#tts")") != std::string::npos);
    CHECK(run({"augment", "--input", data("squad.json"), "--output", out, "--provenance", prov}).code ==
          sqa::cli::kUsageError);
}
