#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqa/align.hpp"
#include "sqa/corpus.hpp"

namespace sqa {

enum class TosMode { Set, Multiset };

TosMode parse_tos_mode(std::string_view text);

// Text overlap score: intersection over union of the predicted and gold
// answer words. Set semantics by default. Both empty scores 1, one empty 0.
double tos(std::span<const std::string> pred, std::span<const std::string> truth,
           TosMode mode = TosMode::Set);

// Audio overlap score: total duration of the intersection of the two
// interval sets over the total duration of their union. Same empty-set
// conventions as tos.
double aos(std::span<const TimeInterval> pred, std::span<const TimeInterval> truth);

// Sorted, overlap-free cover of the input intervals.
std::vector<TimeInterval> merge_intervals(std::span<const TimeInterval> intervals);

struct WerBreakdown {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t ref_length = 0;
    double wer = 0.0;

    std::size_t errors() const { return substitutions + deletions + insertions; }

    // Adds counts and recomputes the ratio from the totals.
    WerBreakdown& operator+=(const WerBreakdown& other);
};

// Standard word error rate: unit costs, no transpositions. Throws when ref is
// empty and hyp is not.
WerBreakdown wer(std::span<const std::string> ref, std::span<const std::string> hyp);

// SQuAD answer normalization: lowercase, drop punctuation and articles,
// collapse whitespace.
std::string squad_normalize(std::string_view text);

// An empty gold list means the question is unanswerable; only an empty
// prediction matches it.
int squad_em(std::string_view pred, std::span<const std::string> golds);
double squad_f1(std::string_view pred, std::span<const std::string> golds);

// Token F1 between two token lists, treated as multisets.
double token_f1(std::span<const std::string> pred, std::span<const std::string> gold);

// ---------------------------------------------------------------------------
// Corpus evaluation

struct EvalItem {
    SqaSample sample;
    std::optional<WordSpan> predicted; // nullopt = predicted no-answer
    // Timed words the prediction indexes into (e.g. an ASR transcript with
    // transferred times). Defaults to the sample's own response.
    std::optional<std::vector<TimedWord>> transcript;
};

struct SampleScore {
    std::string id;
    Section section = Section::E;
    double tos = 0.0;
    double aos = 0.0;
};

struct SectionScore {
    std::string section; // "C", "D", "E" or "all"
    std::size_t n = 0;
    double mean_tos = 0.0;
    double mean_aos = 0.0;
    std::size_t excluded = 0;
};

struct EvalReport {
    std::vector<SectionScore> sections; // present sections, then "all"
    std::vector<SampleScore> samples;
    std::vector<std::string> errors;    // one line per excluded sample

    const SectionScore* find(std::string_view section) const;
};

struct EvalOptions {
    TosMode tos_mode = TosMode::Set;
    unsigned jobs = 1;
};

SampleScore score_sample(const EvalItem& item, TosMode mode = TosMode::Set);

EvalReport evaluate_corpus(std::span<const EvalItem> items, const EvalOptions& options = {});

// Header: section,n,mean_tos,mean_aos,excluded
void write_report_csv(std::ostream& out, const EvalReport& report);

// Header: id,section,tos,aos
void write_sample_scores_csv(std::ostream& out, const EvalReport& report);

} // namespace sqa
