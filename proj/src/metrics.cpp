#include "sqa/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqa/error.hpp"
#include "sqa/parallel.hpp"

namespace sqa {

TosMode parse_tos_mode(std::string_view text) {
    if (text == "set") {
        return TosMode::Set;
    }
    if (text == "multiset") {
        return TosMode::Multiset;
    }
    throw ValidationError(fmt::format("unknown TOS mode '{}' (expected set or multiset)", text));
}

double tos(std::span<const std::string> pred, std::span<const std::string> truth, TosMode mode) {
    if (pred.empty() && truth.empty()) {
        return 1.0;
    }
    if (pred.empty() || truth.empty()) {
        return 0.0;
    }
    std::vector<std::string> a(pred.begin(), pred.end());
    std::vector<std::string> b(truth.begin(), truth.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (mode == TosMode::Set) {
        a.erase(std::unique(a.begin(), a.end()), a.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }
    // Sorted-merge walk: on sorted multisets this yields sum(min) for the
    // intersection and sum(max) for the union.
    std::size_t shared = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++shared;
            ++i;
            ++j;
        }
    }
    const std::size_t combined = a.size() + b.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(combined);
}

std::vector<TimeInterval> merge_intervals(std::span<const TimeInterval> intervals) {
    std::vector<TimeInterval> sorted(intervals.begin(), intervals.end());
    std::sort(sorted.begin(), sorted.end(), [](const TimeInterval& x, const TimeInterval& y) {
        return x.start < y.start || (x.start == y.start && x.end < y.end);
    });
    std::vector<TimeInterval> merged;
    for (const auto& iv : sorted) {
        if (!merged.empty() && iv.start <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, iv.end);
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

namespace {

double total_duration(const std::vector<TimeInterval>& merged) {
    double total = 0.0;
    for (const auto& iv : merged) {
        total += iv.duration();
    }
    return total;
}

} // namespace

double aos(std::span<const TimeInterval> pred, std::span<const TimeInterval> truth) {
    if (pred.empty() && truth.empty()) {
        return 1.0;
    }
    if (pred.empty() || truth.empty()) {
        return 0.0;
    }
    const auto a = merge_intervals(pred);
    const auto b = merge_intervals(truth);
    double shared = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].start, b[j].start);
        const double hi = std::min(a[i].end, b[j].end);
        if (hi > lo) {
            shared += hi - lo;
        }
        if (a[i].end < b[j].end) {
            ++i;
        } else {
            ++j;
        }
    }
    const double combined = total_duration(a) + total_duration(b) - shared;
    if (combined <= 0.0) {
        // Only zero-length intervals: score by whether the points coincide.
        return a == b ? 1.0 : 0.0;
    }
    return std::clamp(shared / combined, 0.0, 1.0);
}

WerBreakdown& WerBreakdown::operator+=(const WerBreakdown& other) {
    substitutions += other.substitutions;
    deletions += other.deletions;
    insertions += other.insertions;
    ref_length += other.ref_length;
    wer = ref_length > 0 ? static_cast<double>(errors()) / static_cast<double>(ref_length) : 0.0;
    return *this;
}

WerBreakdown wer(std::span<const std::string> ref, std::span<const std::string> hyp) {
    if (ref.empty() && !hyp.empty()) {
        throw ValidationError("WER undefined: empty reference with non-empty hypothesis");
    }
    const auto alignment = word_edit_alignment(ref, hyp, CostConfig::unit());
    WerBreakdown b;
    b.substitutions = alignment.count(EditKind::Substitute);
    b.deletions = alignment.count(EditKind::Delete);
    b.insertions = alignment.count(EditKind::Insert);
    b.ref_length = ref.size();
    b.wer = b.ref_length > 0 ? static_cast<double>(b.errors()) / static_cast<double>(b.ref_length)
                             : 0.0;
    return b;
}

// ---------------------------------------------------------------------------
// SQuAD EM/F1

namespace {

std::vector<std::string> squad_tokens(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (const char c : text) {
        if (std::ispunct(static_cast<unsigned char>(c)) == 0) {
            cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    std::vector<std::string> tokens;
    for (auto& t : split_whitespace(cleaned)) {
        if (t != "a" && t != "an" && t != "the") {
            tokens.push_back(std::move(t));
        }
    }
    return tokens;
}

} // namespace

std::string squad_normalize(std::string_view text) {
    std::string out;
    for (const auto& t : squad_tokens(text)) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += t;
    }
    return out;
}

double token_f1(std::span<const std::string> pred, std::span<const std::string> gold) {
    if (pred.empty() || gold.empty()) {
        return pred.empty() && gold.empty() ? 1.0 : 0.0;
    }
    std::map<std::string_view, std::size_t> counts;
    for (const auto& t : gold) {
        ++counts[t];
    }
    std::size_t shared = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++shared;
        }
    }
    if (shared == 0) {
        return 0.0;
    }
    const double precision = static_cast<double>(shared) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(shared) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

int squad_em(std::string_view pred, std::span<const std::string> golds) {
    const auto p = squad_normalize(pred);
    if (golds.empty()) {
        return p.empty() ? 1 : 0;
    }
    for (const auto& g : golds) {
        if (squad_normalize(g) == p) {
            return 1;
        }
    }
    return 0;
}

double squad_f1(std::string_view pred, std::span<const std::string> golds) {
    const auto p = squad_tokens(pred);
    if (golds.empty()) {
        return p.empty() ? 1.0 : 0.0;
    }
    double best = 0.0;
    for (const auto& g : golds) {
        best = std::max(best, token_f1(p, squad_tokens(g)));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Corpus evaluation

const SectionScore* EvalReport::find(std::string_view section) const {
    for (const auto& s : sections) {
        if (s.section == section) {
            return &s;
        }
    }
    return nullptr;
}

SampleScore score_sample(const EvalItem& item, TosMode mode) {
    const auto& response = item.sample.response;
    const auto& pred_words = item.transcript ? *item.transcript : response.words;

    std::vector<std::string> pred_text;
    std::vector<TimeInterval> pred_time;
    if (item.predicted) {
        const auto interval = project_span_to_time(*item.predicted, pred_words);
        for (std::size_t k = item.predicted->first; k <= item.predicted->last; ++k) {
            pred_text.push_back(pred_words[k].text);
        }
        pred_time.push_back(interval);
    }

    // Multiple gold regions score as their union.
    std::vector<bool> in_gold(response.words.size(), false);
    std::vector<TimeInterval> gold_time;
    for (const auto& a : item.sample.gold_answers) {
        if (!a.span) {
            continue;
        }
        gold_time.push_back(project_span_to_time(*a.span, response.words));
        for (std::size_t k = a.span->first; k <= a.span->last; ++k) {
            in_gold[k] = true;
        }
    }
    std::vector<std::string> gold_text;
    for (std::size_t k = 0; k < in_gold.size(); ++k) {
        if (in_gold[k]) {
            gold_text.push_back(response.words[k].text);
        }
    }

    SampleScore score;
    score.id = response.id;
    score.section = response.section;
    score.tos = tos(pred_text, gold_text, mode);
    score.aos = aos(pred_time, gold_time);
    return score;
}

EvalReport evaluate_corpus(std::span<const EvalItem> items, const EvalOptions& options) {
    std::vector<std::optional<SampleScore>> scores(items.size());
    std::vector<std::string> errors(items.size());
    parallel_for(items.size(), options.jobs, [&](std::size_t i) {
        try {
            scores[i] = score_sample(items[i], options.tos_mode);
        } catch (const Error& e) {
            errors[i] = fmt::format("sample '{}': {}", items[i].sample.response.id, e.what());
        }
    });

    EvalReport report;
    struct Accumulator {
        std::size_t n = 0;
        std::size_t excluded = 0;
        double tos = 0.0;
        double aos = 0.0;
    };
    std::map<Section, Accumulator> by_section;
    Accumulator overall;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto& acc = by_section[items[i].sample.response.section];
        if (!scores[i]) {
            ++acc.excluded;
            ++overall.excluded;
            report.errors.push_back(errors[i]);
            continue;
        }
        for (auto* a : {&acc, &overall}) {
            ++a->n;
            a->tos += scores[i]->tos;
            a->aos += scores[i]->aos;
        }
        report.samples.push_back(std::move(*scores[i]));
    }
    const auto finish = [](std::string name, const Accumulator& a) {
        SectionScore s;
        s.section = std::move(name);
        s.n = a.n;
        s.excluded = a.excluded;
        if (a.n > 0) {
            s.mean_tos = a.tos / static_cast<double>(a.n);
            s.mean_aos = a.aos / static_cast<double>(a.n);
        }
        return s;
    };
    for (const auto& [section, acc] : by_section) {
        report.sections.push_back(finish(std::string(to_string(section)), acc));
    }
    report.sections.push_back(finish("all", overall));
    return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    out << "section,n,mean_tos,mean_aos,excluded\n";
    for (const auto& s : report.sections) {
        fmt::print(out, "{},{},{},{},{}\n", s.section, s.n, s.mean_tos, s.mean_aos, s.excluded);
    }
}

void write_sample_scores_csv(std::ostream& out, const EvalReport& report) {
    out << "id,section,tos,aos\n";
    for (const auto& s : report.samples) {
        fmt::print(out, "{},{},{},{}\n", s.id, to_string(s.section), s.tos, s.aos);
    }
}

} // namespace sqa
