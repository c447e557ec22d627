#include "sqa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqa/align.hpp"
#include "sqa/error.hpp"
#include "sqa/output.hpp"
#include "sqa/parallel.hpp"

namespace sqa {

std::string_view to_string(Metric metric) {
    return metric == Metric::Tos ? "tos" : "aos";
}

DegradationFit fit_degradation(std::span<const SystemPoint> points, Metric metric,
                               bool include_reference) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : points) {
        if (!include_reference && p.wer == 0.0) {
            continue;
        }
        x.push_back(p.wer);
        y.push_back(p.score(metric));
    }
    if (x.size() < 2) {
        throw ValidationError(fmt::format("degenerate {} fit: need at least 2 points, have {}",
                                          to_string(metric), x.size()));
    }
    const double n = static_cast<double>(x.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mean_x) * (x[i] - mean_x);
        sxy += (x[i] - mean_x) * (y[i] - mean_y);
        syy += (y[i] - mean_y) * (y[i] - mean_y);
    }
    if (sxx == 0.0) {
        throw ValidationError(
            fmt::format("degenerate {} fit: all {} points share WER {}", to_string(metric), x.size(), x[0]));
    }
    DegradationFit fit;
    fit.metric = metric;
    fit.n_points = x.size();
    fit.include_reference = include_reference;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    if (syy == 0.0) {
        fit.r_squared = 1.0;
    } else {
        double residual = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - fit.predict(x[i]);
            residual += e * e;
        }
        fit.r_squared = std::clamp(1.0 - residual / syy, 0.0, 1.0);
    }
    return fit;
}

std::vector<SystemPoint> build_system_points(const std::vector<ResponseRecord>& reference,
                                             const std::vector<SystemTranscripts>& systems,
                                             const EvalOptions& options) {
    std::map<std::string, const ResponseRecord*> by_id;
    for (const auto& r : reference) {
        if (!by_id.emplace(r.id, &r).second) {
            throw ValidationError(fmt::format("reference has duplicate sample id '{}'", r.id));
        }
    }

    std::vector<SystemPoint> points;
    for (const auto& system : systems) {
        std::map<std::string, const ResponseRecord*> hyp_by_id;
        for (const auto& t : system.transcripts) {
            hyp_by_id.emplace(t.id, &t);
        }
        std::vector<std::string> missing;
        std::vector<std::string> extra;
        for (const auto& [id, ref] : by_id) {
            if (!hyp_by_id.contains(id)) {
                missing.push_back(id);
            } else if (!system.predictions.contains(id)) {
                missing.push_back(id + " (prediction)");
            }
        }
        for (const auto& [id, hyp] : hyp_by_id) {
            if (!by_id.contains(id)) {
                extra.push_back(id);
            }
        }
        if (!missing.empty() || !extra.empty()) {
            throw ValidationError(fmt::format(
                "system '{}' does not cover the reference sample ids; missing: [{}]; unknown: [{}]",
                system.name, fmt::join(missing, ", "), fmt::join(extra, ", ")));
        }

        std::vector<EvalItem> items(reference.size());
        std::vector<WerBreakdown> errors(reference.size());
        parallel_for(reference.size(), options.jobs, [&](std::size_t i) {
            const auto& ref = reference[i];
            const auto& hyp = *hyp_by_id.at(ref.id);
            const auto ref_words = ref.word_texts();
            const auto hyp_words = hyp.word_texts();
            errors[i] = wer(ref_words, hyp_words);
            items[i].sample = SqaSample::from_record(ref);
            items[i].predicted = system.predictions.at(ref.id);
            items[i].transcript = transfer_times(ref.words, hyp_words);
        });

        WerBreakdown total;
        for (const auto& e : errors) {
            total += e;
        }
        const auto report = evaluate_corpus(items, options);
        if (!report.errors.empty()) {
            throw ValidationError(fmt::format("system '{}': {}", system.name, report.errors.front()));
        }
        const auto* all = report.find("all");
        points.push_back({system.name, 100.0 * total.wer, 100.0 * all->mean_tos, 100.0 * all->mean_aos});
    }
    return points;
}

std::vector<SystemPoint> parse_system_points_csv(std::istream& in) {
    std::vector<SystemPoint> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line_no == 1) {
            if (line != "system,wer,tos,aos") {
                throw ParseError(fmt::format("points csv: expected header 'system,wer,tos,aos', got '{}'", line));
            }
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1) {
            fields.push_back(line.substr(start, comma - start));
        }
        fields.push_back(line.substr(start));
        if (fields.size() != 4) {
            throw ParseError(fmt::format("points csv line {}: expected 4 fields", line_no));
        }
        SystemPoint p;
        p.system_name = fields[0];
        try {
            std::size_t used = 0;
            for (auto [field, target] : {std::pair{&fields[1], &p.wer}, std::pair{&fields[2], &p.mean_tos},
                                         std::pair{&fields[3], &p.mean_aos}}) {
                *target = std::stod(*field, &used);
                if (used != field->size()) {
                    throw std::invalid_argument(*field);
                }
            }
        } catch (const std::logic_error&) {
            throw ParseError(fmt::format("points csv line {}: non-numeric value", line_no));
        }
        if (p.wer < 0.0 || p.mean_tos < 0.0 || p.mean_tos > 100.0 || p.mean_aos < 0.0 ||
            p.mean_aos > 100.0) {
            throw ValidationError(fmt::format("points csv line {}: value out of range", line_no));
        }
        points.push_back(std::move(p));
    }
    return points;
}

ReportFiles emit_report(std::span<const SystemPoint> points, std::span<const DegradationFit> fits,
                        const std::filesystem::path& directory) {
    if (points.empty()) {
        throw ValidationError("no system points to report");
    }
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw Error(fmt::format("cannot create '{}': {}", directory.string(), ec.message()));
    }

    std::vector<SystemPoint> sorted(points.begin(), points.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const SystemPoint& a, const SystemPoint& b) {
        return a.wer < b.wer || (a.wer == b.wer && a.system_name < b.system_name);
    });

    ReportFiles files;
    OutputSet outputs;
    auto& table = outputs.open(directory / "systems.csv");
    auto& table_full = outputs.open(directory / "systems_full.csv");
    table << "system,wer,tos,aos\n";
    table_full << "system,wer,tos,aos\n";
    for (const auto& p : sorted) {
        fmt::print(table, "{},{:.1f},{:.1f},{:.1f}\n", p.system_name, p.wer, p.mean_tos, p.mean_aos);
        fmt::print(table_full, "{},{},{},{}\n", p.system_name, p.wer, p.mean_tos, p.mean_aos);
    }

    if (fits.empty()) {
        files.warnings.push_back("no degradation fits; fit files not written");
    } else {
        auto& curve = outputs.open(directory / "degradation.csv");
        auto& curve_full = outputs.open(directory / "degradation_full.csv");
        auto& fit_table = outputs.open(directory / "fits.csv");
        curve << "metric,kind,wer,score\n";
        curve_full << "metric,kind,wer,score\n";
        fit_table << "metric,slope,intercept,r_squared,n_points,include_reference\n";
        const double max_wer = sorted.back().wer;
        const auto last_sample = static_cast<int>(std::ceil(max_wer));
        for (const auto& fit : fits) {
            const auto name = to_string(fit.metric);
            fmt::print(fit_table, "{},{},{},{},{},{}\n", name, fit.slope, fit.intercept, fit.r_squared,
                       fit.n_points, fit.include_reference ? 1 : 0);
            for (const auto& p : sorted) {
                fmt::print(curve, "{},observed,{:.1f},{:.1f}\n", name, p.wer, p.score(fit.metric));
                fmt::print(curve_full, "{},observed,{},{}\n", name, p.wer, p.score(fit.metric));
            }
            for (int w = 0; w <= last_sample; ++w) {
                const double score = fit.predict(static_cast<double>(w));
                fmt::print(curve, "{},fit,{:.1f},{:.1f}\n", name, static_cast<double>(w), score);
                fmt::print(curve_full, "{},fit,{},{}\n", name, static_cast<double>(w), score);
            }
        }
    }
    outputs.commit();
    files.written = outputs.paths();
    return files;
}

} // namespace sqa
