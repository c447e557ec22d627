#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqa/corpus.hpp"
#include "sqa/text.hpp"

namespace sqa {

inline constexpr int kLogitsVersion = 1;
inline constexpr int kPredictionVersion = 1;

// Seed id given to the output of ensemble().
inline constexpr std::string_view kEnsembleSeed = "ensemble";

struct Token {
    std::string text;
    std::size_t char_start = 0; // code points into the normalized passage
    std::size_t char_end = 0;

    bool operator==(const Token&) const = default;
};

enum class ScoreKind { Logits, Probabilities };

// Per-token start/end scores from an extractive QA model. Position 0 is the
// null sentinel with empty offsets.
struct TokenLogits {
    std::string sample_id;
    std::string seed_id;
    std::vector<Token> tokens;
    std::vector<double> start_scores;
    std::vector<double> end_scores;
    ScoreKind kind = ScoreKind::Logits;

    bool operator==(const TokenLogits&) const = default;
};

void validate_logits(const TokenLogits& logits);

// Logits are softmax-normalized; probabilities are rescaled to sum to one.
std::vector<double> normalize_scores(std::span<const double> scores, ScoreKind kind);

// Averages per-seed normalized start and end distributions position by
// position. All inputs must share sample id and token sequence.
TokenLogits ensemble(std::span<const TokenLogits> seeds);

struct DecodeOptions {
    std::size_t max_answer_tokens = 30;
    double null_threshold = 0.0;
};

struct SpanPrediction {
    std::string sample_id;
    std::optional<std::pair<std::size_t, std::size_t>> token_span; // inclusive
    std::optional<CharSpan> char_span;
    std::optional<WordSpan> word_span;
    double score = 0.0;      // best start + end over candidate spans
    double null_score = 0.0; // start[0] + end[0]
    bool degenerate = false; // sentinel-only input

    bool is_no_answer() const { return !token_span && !char_span && !word_span; }
    bool operator==(const SpanPrediction&) const = default;
};

// Best (s, e) with 1 <= s <= e < n and e - s < max_answer_tokens by
// start[s] + end[e]; earliest start then earliest end wins ties. Returns
// no-answer when null_score + null_threshold >= that best score.
SpanPrediction decode_span(const TokenLogits& logits, const DecodeOptions& options = {});

// Word index range covered by a character range, rounded outward to whole
// words. Throws when the range touches no word.
WordSpan tokens_to_words(CharSpan chars, std::span<const CharSpan> word_offsets);

// ---------------------------------------------------------------------------
// Interchange files (one JSON object per line)

std::vector<TokenLogits> parse_logits(std::istream& in);
std::vector<TokenLogits> load_logits(const std::filesystem::path& path);
std::string serialize_logits(const TokenLogits& logits);

std::vector<SpanPrediction> parse_predictions(std::istream& in);
std::vector<SpanPrediction> load_predictions(const std::filesystem::path& path);
std::string serialize_prediction(const SpanPrediction& prediction);
void write_predictions(std::ostream& out, const std::vector<SpanPrediction>& predictions);

} // namespace sqa
