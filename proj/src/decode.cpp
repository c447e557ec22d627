#include "sqa/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sqa/error.hpp"

namespace sqa {

void validate_logits(const TokenLogits& logits) {
    const auto fail = [&](const std::string& what) {
        throw ValidationError(
            fmt::format("logits '{}' seed '{}': {}", logits.sample_id, logits.seed_id, what));
    };
    if (logits.tokens.empty()) {
        fail("no tokens (position 0 must hold the null sentinel)");
    }
    if (logits.start_scores.size() != logits.tokens.size() ||
        logits.end_scores.size() != logits.tokens.size()) {
        fail(fmt::format("{} tokens but {} start and {} end scores", logits.tokens.size(),
                         logits.start_scores.size(), logits.end_scores.size()));
    }
    if (logits.tokens[0].char_start != logits.tokens[0].char_end) {
        fail("position 0 must be the null sentinel with empty offsets");
    }
    std::size_t previous_end = 0;
    for (std::size_t i = 1; i < logits.tokens.size(); ++i) {
        const auto& t = logits.tokens[i];
        if (t.char_end < t.char_start) {
            fail(fmt::format("token {} has end {} before start {}", i, t.char_end, t.char_start));
        }
        if (t.char_start < previous_end) {
            fail(fmt::format("token {} overlaps or precedes token {}", i, i - 1));
        }
        previous_end = t.char_end;
    }
    for (std::size_t i = 0; i < logits.tokens.size(); ++i) {
        for (const double s : {logits.start_scores[i], logits.end_scores[i]}) {
            if (std::isnan(s) || s == std::numeric_limits<double>::infinity()) {
                fail(fmt::format("score at position {} is not a number below +inf", i));
            }
        }
    }
}

std::vector<double> normalize_scores(std::span<const double> scores, ScoreKind kind) {
    std::vector<double> out(scores.begin(), scores.end());
    if (out.empty()) {
        return out;
    }
    if (kind == ScoreKind::Logits) {
        const double peak = *std::max_element(out.begin(), out.end());
        for (auto& v : out) {
            v = std::exp(v - peak);
        }
    }
    double total = 0.0;
    for (const double v : out) {
        total += v;
    }
    if (!(total > 0.0)) {
        throw ValidationError("cannot normalize scores that sum to zero");
    }
    for (auto& v : out) {
        v /= total;
    }
    return out;
}

TokenLogits ensemble(std::span<const TokenLogits> seeds) {
    if (seeds.empty()) {
        throw ValidationError("ensemble needs at least one seed");
    }
    const auto& first = seeds.front();
    for (const auto& s : seeds) {
        validate_logits(s);
        if (s.sample_id != first.sample_id) {
            throw ValidationError(fmt::format("ensemble mixes samples '{}' and '{}'",
                                              first.sample_id, s.sample_id));
        }
        if (s.tokens != first.tokens) {
            throw ValidationError(fmt::format("sample '{}': seed '{}' token sequence differs from seed '{}'",
                                              first.sample_id, s.seed_id, first.seed_id));
        }
    }

    const std::size_t n = first.tokens.size();
    std::vector<std::vector<double>> starts;
    std::vector<std::vector<double>> ends;
    for (const auto& s : seeds) {
        starts.push_back(normalize_scores(s.start_scores, s.kind));
        ends.push_back(normalize_scores(s.end_scores, s.kind));
    }

    // Summing each position's values in sorted order makes the mean exactly
    // independent of seed order.
    const auto average = [&](const std::vector<std::vector<double>>& rows) {
        std::vector<double> out(n);
        std::vector<double> column(rows.size());
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                column[r] = rows[r][p];
            }
            std::sort(column.begin(), column.end());
            double total = 0.0;
            for (const double v : column) {
                total += v;
            }
            out[p] = total / static_cast<double>(rows.size());
        }
        return out;
    };

    TokenLogits out;
    out.sample_id = first.sample_id;
    out.seed_id = std::string(kEnsembleSeed);
    out.tokens = first.tokens;
    out.start_scores = average(starts);
    out.end_scores = average(ends);
    out.kind = ScoreKind::Probabilities;
    return out;
}

SpanPrediction decode_span(const TokenLogits& logits, const DecodeOptions& options) {
    validate_logits(logits);
    if (options.max_answer_tokens < 1) {
        throw ValidationError("max_answer_tokens must be at least 1");
    }
    SpanPrediction pred;
    pred.sample_id = logits.sample_id;
    const auto& start = logits.start_scores;
    const auto& end = logits.end_scores;
    const std::size_t n = logits.tokens.size();
    pred.null_score = start[0] + end[0];
    if (n < 2) {
        pred.degenerate = true;
        pred.score = pred.null_score;
        return pred;
    }

    double best = -std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_span{1, 1};
    bool found = false;
    for (std::size_t s = 1; s < n; ++s) {
        const std::size_t last = std::min(n - 1, s + options.max_answer_tokens - 1);
        for (std::size_t e = s; e <= last; ++e) {
            const double score = start[s] + end[e];
            if (!found || score > best) {
                best = score;
                best_span = {s, e};
                found = true;
            }
        }
    }
    pred.score = best;
    if (pred.null_score + options.null_threshold >= best) {
        return pred;
    }
    pred.token_span = best_span;
    pred.char_span =
        CharSpan{logits.tokens[best_span.first].char_start, logits.tokens[best_span.second].char_end};
    return pred;
}

WordSpan tokens_to_words(CharSpan chars, std::span<const CharSpan> word_offsets) {
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t w = 0; w < word_offsets.size(); ++w) {
        const auto& word = word_offsets[w];
        if (word.begin < chars.end && word.end > chars.begin) {
            if (!first) {
                first = w;
            }
            last = w;
        }
    }
    if (!first) {
        throw ValidationError(
            fmt::format("character range [{}, {}) covers no word", chars.begin, chars.end));
    }
    return {*first, last};
}

} // namespace sqa
