#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "support.hpp"
#include "sqa/analysis.hpp"
#include "sqa/error.hpp"

using namespace sqa;

namespace {

// Published system points: manual transcription and five ASR systems.
std::vector<SystemPoint> system_points(bool with_manual) {
    std::vector<SystemPoint> p;
    if (with_manual) {
        p.push_back({"MAN", 0.0, 56.1, 56.5});
    }
    p.push_back({"A", 18.4, 46.9, 51.8});
    p.push_back({"B", 20.0, 45.8, 51.5});
    p.push_back({"C", 26.2, 41.4, 49.6});
    p.push_back({"D", 35.3, 37.8, 47.8});
    p.push_back({"E", 46.9, 32.1, 44.8});
    return p;
}

SystemTranscripts as_system(std::string name, const std::vector<ResponseRecord>& transcripts) {
    SystemTranscripts s;
    s.name = std::move(name);
    s.transcripts = transcripts;
    for (const auto& r : transcripts) {
        s.predictions[r.id] = r.answers.front().span;
    }
    return s;
}

} // namespace

TEST_CASE("fit_degradation on the published system points") {
    const auto points = system_points(true);
    const auto t = fit_degradation(points, Metric::Tos);
    const auto a = fit_degradation(points, Metric::Aos);
    // closed-form least squares over the five ASR rows
    CHECK(t.slope == doctest::Approx(-0.51007).epsilon(1e-4));
    CHECK(a.slope == doctest::Approx(-0.24397).epsilon(1e-4));
    CHECK(t.n_points == 5);
    CHECK(t.r_squared > 0.95);
    const auto t_ref = fit_degradation(points, Metric::Tos, true);
    CHECK(t_ref.n_points == 6);
    CHECK(t_ref.slope == doctest::Approx(-0.51627).epsilon(1e-4));
}

TEST_CASE("fit_degradation edge cases") {
    const std::vector<SystemPoint> line{{"x", 0.0, 10.0, 10.0}, {"y", 10.0, 0.0, 0.0}};
    const auto f = fit_degradation(line, Metric::Tos, true);
    CHECK(f.slope == doctest::Approx(-1.0));
    CHECK(f.intercept == doctest::Approx(10.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_degradation(line, Metric::Tos, false), ValidationError);
    const std::vector<SystemPoint> flat{{"x", 5.0, 10.0, 10.0}, {"y", 5.0, 20.0, 0.0}};
    CHECK_THROWS_AS(fit_degradation(flat, Metric::Aos), ValidationError);
}

TEST_CASE("build_system_points") {
    std::mt19937 rng(64);
    auto reference = testing::synthetic_corpus(rng, 1, 10, 10);
    reference[0].answers = {{WordSpan{2, 4}}};

    SUBCASE("identical system") {
        const auto points = build_system_points(reference, {as_system("MAN", reference)});
        REQUIRE(points.size() == 1);
        CHECK(points[0].wer == 0.0);
        CHECK(points[0].mean_tos == 100.0);
        CHECK(points[0].mean_aos == 100.0);
    }
    SUBCASE("one substitution in ten words") {
        auto hyp = reference;
        hyp[0].words[3].text = "zzzzzzzz";
        const auto points = build_system_points(reference, {as_system("ASR", hyp)});
        CHECK(points[0].wer == doctest::Approx(10.0));
        CHECK(points[0].mean_tos == doctest::Approx(50.0));
        CHECK(points[0].mean_aos == doctest::Approx(100.0));
    }
    SUBCASE("id mismatch lists the ids") {
        auto other = reference;
        other[0].id = "elsewhere";
        try {
            build_system_points(reference, {as_system("X", other)});
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find(reference[0].id) != std::string::npos);
            CHECK(msg.find("elsewhere") != std::string::npos);
        }
    }
}

TEST_CASE("system points csv") {
    std::istringstream in("system,wer,tos,aos\nA,18.4,46.9,51.8\n\nB,20,45.8,51.5\n");
    const auto p = parse_system_points_csv(in);
    REQUIRE(p.size() == 2);
    CHECK(p[1].wer == 20.0);
    std::istringstream bad_header("name,wer,tos,aos\n");
    CHECK_THROWS_AS(parse_system_points_csv(bad_header), ParseError);
    std::istringstream bad_value("system,wer,tos,aos\nA,x,1,2\n");
    CHECK_THROWS_AS(parse_system_points_csv(bad_value), ParseError);
}

TEST_CASE("emit_report") {
    testing::TempDir dir;
    auto points = system_points(false);
    std::reverse(points.begin(), points.end());
    SUBCASE("table and fits") {
        const std::vector<DegradationFit> fits{fit_degradation(points, Metric::Tos),
                                               fit_degradation(points, Metric::Aos)};
        const auto files = emit_report(points, fits, dir.path() / "out");
        CHECK(files.written.size() == 5);
        const auto table = testing::read_file(dir / "out/systems.csv");
        CHECK(table ==
              "system,wer,tos,aos\n"
              "A,18.4,46.9,51.8\n"
              "B,20.0,45.8,51.5\n"
              "C,26.2,41.4,49.6\n"
              "D,35.3,37.8,47.8\n"
              "E,46.9,32.1,44.8\n");
        std::istringstream back(testing::read_file(dir / "out/systems_full.csv"));
        const auto reread = parse_system_points_csv(back);
        CHECK(reread.front().mean_tos == 46.9);
        const auto curve = testing::read_file(dir / "out/degradation.csv");
        CHECK(curve.find("tos,observed,18.4,46.9\n") != std::string::npos);
        CHECK(curve.find("aos,fit,47.0,") != std::string::npos);
    }
    SUBCASE("fit line sampled at integer WER") {
        DegradationFit f;
        f.metric = Metric::Tos;
        f.slope = -0.5;
        f.intercept = 60.0;
        f.n_points = 5;
        emit_report(points, std::vector{f}, dir.path());
        const auto curve = testing::read_file(dir / "degradation_full.csv");
        CHECK(curve.find("tos,fit,20,50\n") != std::string::npos);
    }
    SUBCASE("no fits") {
        const auto files = emit_report(points, {}, dir.path());
        CHECK(files.written.size() == 2);
        CHECK(files.warnings.size() == 1);
        CHECK_FALSE(std::filesystem::exists(dir / "fits.csv"));
    }
    SUBCASE("unwritable destination") {
        testing::write_file(dir / "file", "x");
        CHECK_THROWS_AS(emit_report(points, {}, dir / "file/sub"), Error);
    }
}
