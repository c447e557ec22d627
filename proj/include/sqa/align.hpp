#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqa/corpus.hpp"

namespace sqa {

enum class EditKind { Match, Substitute, Insert, Delete, Transpose };

std::string_view to_string(EditKind kind);

// A transpose covers ref[ref_index], ref[ref_index + 1] against
// hyp[hyp_index + 1], hyp[hyp_index]; every other kind covers at most one
// index on each side.
struct AlignmentOp {
    EditKind kind = EditKind::Match;
    std::optional<std::size_t> ref_index;
    std::optional<std::size_t> hyp_index;
    double cost = 0.0;

    bool operator==(const AlignmentOp&) const = default;
};

struct WordAlignment {
    std::vector<AlignmentOp> ops;
    double total_cost = 0.0;

    std::size_t count(EditKind kind) const;
};

enum class SubstitutionWeighting {
    Unit,              // every substitution costs 1
    CharacterDistance, // normalized character Levenshtein, floored
};

struct CostConfig {
    double insert_cost = 1.0;
    double delete_cost = 1.0;
    double transpose_cost = 1.0;
    bool allow_transpose = true;
    SubstitutionWeighting weighting = SubstitutionWeighting::CharacterDistance;
    // Pairs whose character similarity (1 - normalized distance) falls below
    // this pay the full unit cost.
    double similarity_threshold = 0.5;
    double min_substitution_cost = 0.1;

    // Word-level Damerau-Levenshtein with character-weighted substitutions;
    // used for time transfer and span projection.
    static CostConfig forced_alignment() { return {}; }

    // Plain Levenshtein with unit costs and no transpositions; used for WER.
    static CostConfig unit() {
        CostConfig c;
        c.allow_transpose = false;
        c.weighting = SubstitutionWeighting::Unit;
        return c;
    }

    // Cost of replacing a with b. 0 when equal.
    double substitution_cost(std::string_view a, std::string_view b) const;
};

// Levenshtein distance over bytes divided by the longer length; 0 for two
// empty strings.
double normalized_char_distance(std::string_view a, std::string_view b);

// Minimum-cost edit script turning ref into hyp. On equal-cost alternatives
// the backtrace prefers match/substitute, then transpose, then delete, then
// insert.
WordAlignment word_edit_alignment(std::span<const std::string> ref,
                                  std::span<const std::string> hyp,
                                  const CostConfig& costs = CostConfig::forced_alignment());

struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }
    bool operator==(const TimeInterval&) const = default;
};

// Gives every hyp word a time interval by aligning it against a timed
// reference. Aligned words inherit the reference interval; transposed pairs
// keep the reference intervals in positional order; inserted words split the
// gap between anchored neighbours evenly.
std::vector<TimedWord> transfer_times(std::span<const TimedWord> ref,
                                      std::span<const std::string> hyp);

TimeInterval project_span_to_time(WordSpan span, std::span<const TimedWord> words);

// Three-row debug rendering:
//   REF: the cat *** sat
//   OPS: .   S   I   .
//   HYP: the hat on  sat
std::string format_alignment(const WordAlignment& alignment, std::span<const std::string> ref,
                             std::span<const std::string> hyp);

} // namespace sqa
