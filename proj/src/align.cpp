#include "sqa/align.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sqa/error.hpp"

namespace sqa {

std::string_view to_string(EditKind kind) {
    switch (kind) {
    case EditKind::Match:
        return "match";
    case EditKind::Substitute:
        return "substitute";
    case EditKind::Insert:
        return "insert";
    case EditKind::Delete:
        return "delete";
    case EditKind::Transpose:
        return "transpose";
    }
    return "?";
}

std::size_t WordAlignment::count(EditKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(ops.begin(), ops.end(), [&](const AlignmentOp& op) { return op.kind == kind; }));
}

double normalized_char_distance(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) {
        return 0.0;
    }
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            row[j] = std::min({above + 1, row[j - 1] + 1, diagonal + (a[i - 1] == b[j - 1] ? 0U : 1U)});
            diagonal = above;
        }
    }
    return static_cast<double>(row[b.size()]) / static_cast<double>(longest);
}

double CostConfig::substitution_cost(std::string_view a, std::string_view b) const {
    if (a == b) {
        return 0.0;
    }
    if (weighting == SubstitutionWeighting::Unit) {
        return 1.0;
    }
    const double distance = normalized_char_distance(a, b);
    if (1.0 - distance < similarity_threshold) {
        return 1.0;
    }
    return std::max(min_substitution_cost, distance);
}

namespace {

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

WordAlignment word_edit_alignment(std::span<const std::string> ref,
                                  std::span<const std::string> hyp, const CostConfig& costs) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    const std::size_t width = m + 1;

    std::vector<double> sub(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            sub[i * m + j] = costs.substitution_cost(ref[i], hyp[j]);
        }
    }
    const auto sub_at = [&](std::size_t i, std::size_t j) { return sub[(i - 1) * m + (j - 1)]; };
    const auto transposable = [&](std::size_t i, std::size_t j) {
        return costs.allow_transpose && i > 1 && j > 1 && ref[i - 1] == hyp[j - 2] &&
               ref[i - 2] == hyp[j - 1] && ref[i - 1] != ref[i - 2];
    };

    std::vector<double> table((n + 1) * width);
    const auto at = [&](std::size_t i, std::size_t j) -> double& { return table[i * width + j]; };
    for (std::size_t i = 1; i <= n; ++i) {
        at(i, 0) = at(i - 1, 0) + costs.delete_cost;
    }
    for (std::size_t j = 1; j <= m; ++j) {
        at(0, j) = at(0, j - 1) + costs.insert_cost;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            double best = at(i - 1, j - 1) + sub_at(i, j);
            best = std::min(best, at(i - 1, j) + costs.delete_cost);
            best = std::min(best, at(i, j - 1) + costs.insert_cost);
            if (transposable(i, j)) {
                best = std::min(best, at(i - 2, j - 2) + costs.transpose_cost);
            }
            at(i, j) = best;
        }
    }

    WordAlignment alignment;
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        const double here = at(i, j);
        if (i > 0 && j > 0 && nearly_equal(here, at(i - 1, j - 1) + sub_at(i, j))) {
            const double c = sub_at(i, j);
            alignment.ops.push_back(
                {c == 0.0 ? EditKind::Match : EditKind::Substitute, i - 1, j - 1, c});
            --i;
            --j;
        } else if (transposable(i, j) && nearly_equal(here, at(i - 2, j - 2) + costs.transpose_cost)) {
            alignment.ops.push_back({EditKind::Transpose, i - 2, j - 2, costs.transpose_cost});
            i -= 2;
            j -= 2;
        } else if (i > 0 && nearly_equal(here, at(i - 1, j) + costs.delete_cost)) {
            alignment.ops.push_back({EditKind::Delete, i - 1, std::nullopt, costs.delete_cost});
            --i;
        } else {
            alignment.ops.push_back({EditKind::Insert, std::nullopt, j - 1, costs.insert_cost});
            --j;
        }
    }
    std::reverse(alignment.ops.begin(), alignment.ops.end());
    for (const auto& op : alignment.ops) {
        alignment.total_cost += op.cost;
    }
    return alignment;
}

std::vector<TimedWord> transfer_times(std::span<const TimedWord> ref,
                                      std::span<const std::string> hyp) {
    if (hyp.empty()) {
        return {};
    }
    if (ref.empty()) {
        throw Error("cannot transfer times: reference transcript is empty");
    }
    std::vector<std::string> ref_texts;
    ref_texts.reserve(ref.size());
    for (const auto& w : ref) {
        ref_texts.push_back(w.text);
    }
    const auto alignment = word_edit_alignment(ref_texts, hyp, CostConfig::forced_alignment());

    std::vector<std::optional<TimeInterval>> anchors(hyp.size());
    const auto interval = [&](std::size_t r) {
        return TimeInterval{ref[r].start_time, ref[r].end_time};
    };
    for (const auto& op : alignment.ops) {
        switch (op.kind) {
        case EditKind::Match:
        case EditKind::Substitute:
            anchors[*op.hyp_index] = interval(*op.ref_index);
            break;
        case EditKind::Transpose:
            anchors[*op.hyp_index] = interval(*op.ref_index);
            anchors[*op.hyp_index + 1] = interval(*op.ref_index + 1);
            break;
        case EditKind::Insert:
        case EditKind::Delete:
            break;
        }
    }

    std::vector<TimedWord> out(hyp.size());
    std::size_t k = 0;
    while (k < hyp.size()) {
        if (anchors[k]) {
            out[k] = {hyp[k], anchors[k]->start, anchors[k]->end};
            ++k;
            continue;
        }
        std::size_t run_end = k;
        while (run_end < hyp.size() && !anchors[run_end]) {
            ++run_end;
        }
        const bool has_prev = k > 0;
        const bool has_next = run_end < hyp.size();
        double gap_start = has_prev ? anchors[k - 1]->end : ref.front().start_time;
        double gap_end = has_next ? anchors[run_end]->start : ref.back().end_time;
        if (gap_end < gap_start) {
            if (has_next) {
                gap_start = gap_end;
            } else {
                gap_end = gap_start;
            }
        }
        const std::size_t count = run_end - k;
        const double step = (gap_end - gap_start) / static_cast<double>(count);
        for (std::size_t t = 0; t < count; ++t) {
            const double start = gap_start + step * static_cast<double>(t);
            const double end = t + 1 == count ? gap_end : gap_start + step * static_cast<double>(t + 1);
            out[k + t] = {hyp[k + t], start, end};
        }
        k = run_end;
    }
    return out;
}

TimeInterval project_span_to_time(WordSpan span, std::span<const TimedWord> words) {
    if (span.first > span.last || span.last >= words.size()) {
        throw ValidationError(fmt::format("span [{}, {}] outside {} words", span.first, span.last,
                                          words.size()));
    }
    return {words[span.first].start_time, words[span.last].end_time};
}

std::string format_alignment(const WordAlignment& alignment, std::span<const std::string> ref,
                             std::span<const std::string> hyp) {
    struct Column {
        std::string ref, op, hyp;
    };
    static constexpr std::string_view kGap = "***";
    std::vector<Column> columns;
    for (const auto& op : alignment.ops) {
        switch (op.kind) {
        case EditKind::Match:
            columns.push_back({ref[*op.ref_index], ".", hyp[*op.hyp_index]});
            break;
        case EditKind::Substitute:
            columns.push_back({ref[*op.ref_index], "S", hyp[*op.hyp_index]});
            break;
        case EditKind::Insert:
            columns.push_back({std::string(kGap), "I", hyp[*op.hyp_index]});
            break;
        case EditKind::Delete:
            columns.push_back({ref[*op.ref_index], "D", std::string(kGap)});
            break;
        case EditKind::Transpose:
            columns.push_back({ref[*op.ref_index], "T", hyp[*op.hyp_index]});
            columns.push_back({ref[*op.ref_index + 1], "T", hyp[*op.hyp_index + 1]});
            break;
        }
    }
    std::string rows[3] = {"REF:", "OPS:", "HYP:"};
    for (const auto& c : columns) {
        const std::size_t w = std::max({c.ref.size(), c.op.size(), c.hyp.size()});
        rows[0] += fmt::format(" {:<{}}", c.ref, w);
        rows[1] += fmt::format(" {:<{}}", c.op, w);
        rows[2] += fmt::format(" {:<{}}", c.hyp, w);
    }
    std::string out;
    for (auto& row : rows) {
        row.erase(row.find_last_not_of(' ') + 1);
        out += row;
        out += '\n';
    }
    return out;
}

} // namespace sqa
