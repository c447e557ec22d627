#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqa/text.hpp"

namespace sqa {

// Version written into, and required from, every SQA record line.
inline constexpr int kSqaRecordVersion = 1;

enum class Section { C, D, E };

std::string_view to_string(Section section);
Section parse_section(std::string_view text);

struct TimedWord {
    std::string text;
    double start_time = 0.0; // seconds
    double end_time = 0.0;   // seconds

    bool operator==(const TimedWord&) const = default;
};

// Inclusive word index pair.
struct WordSpan {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t length() const { return last - first + 1; }
    bool operator==(const WordSpan&) const = default;
};

// A gold answer region, or an explicit "this response does not answer".
struct AnswerAnnotation {
    std::optional<WordSpan> span;

    static AnswerAnnotation no_answer() { return {}; }
    bool is_no_answer() const { return !span.has_value(); }
    bool operator==(const AnswerAnnotation&) const = default;
};

struct ResponseRecord {
    std::string id;
    Section section = Section::E;
    std::string prompt;
    std::vector<TimedWord> words;
    std::vector<AnswerAnnotation> answers;
    std::optional<double> grade;
    std::string transcript_source = "manual"; // manual | asr:<name> | gec

    std::vector<std::string> word_texts() const;
    bool operator==(const ResponseRecord&) const = default;
};

// <prompt, response, answer>: the unit of evaluation.
struct SqaSample {
    std::string prompt;
    ResponseRecord response;
    std::vector<AnswerAnnotation> gold_answers;

    static SqaSample from_record(ResponseRecord record);
};

// Throws ValidationError naming the offending word or annotation.
void validate_record(const ResponseRecord& record);

std::vector<ResponseRecord> parse_sqa_corpus(std::istream& in);
std::vector<ResponseRecord> load_sqa_corpus(const std::filesystem::path& path);
std::string serialize_record(const ResponseRecord& record);
void write_sqa_corpus(std::ostream& out, const std::vector<ResponseRecord>& records);

// Keeps records with no word equal to the (normalized) marker.
std::vector<ResponseRecord> filter_unclear(const std::vector<ResponseRecord>& records,
                                           std::string_view marker);

// CEFR level to the 0-6 scale: A1..C2 map to 1..6, below-A1 maps to 0.
int map_grade(std::string_view cefr);

// ---------------------------------------------------------------------------
// Corpus statistics

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;      // sample standard deviation (n - 1)
    bool degenerate = false; // n < 2, std forced to 0
};

Summary summarize(const std::vector<double>& values);

struct SectionStats {
    Section section = Section::E;
    std::size_t samples = 0;
    Summary prompt_words;
    Summary response_words;
    Summary answer_words;     // over records with at least one answer span
    Summary response_seconds; // first word start to last word end
    Summary answer_seconds;   // summed over annotated spans
};

struct CorpusStats {
    std::vector<SectionStats> sections; // only sections present, in C, D, E order
};

CorpusStats corpus_stats(const std::vector<ResponseRecord>& records);

// Long-format CSV, header: section,statistic,n,mean,std,degenerate
void write_stats_csv(std::ostream& out, const CorpusStats& stats);

// ---------------------------------------------------------------------------
// SQuAD 2.0 text corpora. Character spans are Unicode code point offsets, as
// in the published files.

struct SquadAnswer {
    CharSpan span;
    std::string text;

    bool operator==(const SquadAnswer&) const = default;
};

struct SquadSample {
    std::string id;
    std::string title;
    std::string passage_id; // "<title>#<paragraph index>"
    std::string question;
    std::string passage;
    std::vector<SquadAnswer> gold_answers;
    bool is_impossible = false;

    bool operator==(const SquadSample&) const = default;
};

void validate_squad_sample(const SquadSample& sample);

std::vector<SquadSample> parse_squad(std::istream& in);
std::vector<SquadSample> load_squad(const std::filesystem::path& path);

// Writes the standard layout, grouping consecutive samples that share a title
// and passage into one paragraph.
void write_squad(std::ostream& out, const std::vector<SquadSample>& samples);

} // namespace sqa
