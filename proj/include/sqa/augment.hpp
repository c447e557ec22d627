#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqa/corpus.hpp"

namespace sqa {

// Batched text-in/text-out machine translation. Implementations return one
// best hypothesis per input, in input order, deterministically.
class TranslationClient {
public:
    virtual ~TranslationClient() = default;
    virtual std::vector<std::string> translate(const std::vector<std::string>& texts,
                                               std::string_view source_language,
                                               std::string_view target_language) = 0;
};

// Returns its input unchanged.
class IdentityTranslationClient final : public TranslationClient {
public:
    std::vector<std::string> translate(const std::vector<std::string>& texts, std::string_view,
                                       std::string_view) override {
        return texts;
    }
};

// Talks to a translation server over HTTP:
//   POST <path>  {"texts": [...], "source": "en", "target": "fr"}
//   200          {"texts": [...]}
class HttpTranslationClient final : public TranslationClient {
public:
    // url like "http://localhost:8080/translate"
    explicit HttpTranslationClient(std::string url, int timeout_seconds = 600);

    std::vector<std::string> translate(const std::vector<std::string>& texts,
                                       std::string_view source_language,
                                       std::string_view target_language) override;

private:
    std::string base_;
    std::string path_;
    int timeout_seconds_;
};

// Sentences packed greedily into chunks of at most soft_cap characters; a
// sentence longer than the cap becomes its own chunk.
std::vector<std::string> chunk_sentences(std::string_view passage, std::size_t soft_cap = 400);

// en -> pivot -> en round trip, chunk by chunk, chunks re-joined with single
// spaces. Client failures are rethrown as Error naming passage_id.
std::string back_translate_passage(std::string_view passage, std::string_view pivot,
                                   TranslationClient& client, std::string_view passage_id = "",
                                   std::size_t soft_cap = 400);

enum class RelocationOutcome { Exact, Fuzzy, Dropped };

std::string_view to_string(RelocationOutcome outcome);

struct RelocationResult {
    RelocationOutcome outcome = RelocationOutcome::Dropped;
    std::optional<CharSpan> char_span; // code points into the new passage
    double match_score = 0.0;
};

struct RelocationOptions {
    double fuzzy_threshold = 0.8;
    std::size_t window_slack = 2;
};

// Finds answer_text in a rewritten passage: case-insensitive exact search
// first, then the token window (answer length +/- slack) with the highest
// token F1, accepted when F1 >= threshold.
RelocationResult relocate_answer(std::string_view answer_text, std::string_view new_passage,
                                 const RelocationOptions& options = {});

struct Provenance {
    enum class Kind { Original, BackTranslation, TtsAsr };
    Kind kind = Kind::Original;
    std::string pivot; // back-translation only

    std::string label() const; // original | back_translation:<pivot> | tts_asr
};

struct AugmentedSample {
    SquadSample sample;
    Provenance provenance;
    std::string source_id;
    RelocationOutcome outcome = RelocationOutcome::Exact;
    double match_score = 1.0;
};

struct GeneratorReport {
    std::string generator;       // provenance label
    std::size_t attempted = 0;   // answerable samples offered
    std::size_t retained = 0;    // answerable samples kept
    std::size_t unanswerable = 0;
    std::size_t failed = 0;      // generator errors

    double retention() const {
        return attempted == 0 ? 0.0 : static_cast<double>(retained) / static_cast<double>(attempted);
    }
};

struct AugmentConfig {
    std::vector<std::string> pivots = {"fr", "de"};
    bool back_translation = true;
    RelocationOptions relocation;
    std::size_t chunk_soft_cap = 400;
    // passage_id or sample id -> TTS->ASR transcript; enables that generator.
    std::optional<std::map<std::string, std::string>> tts_transcripts;
    unsigned jobs = 1;
};

struct AugmentResult {
    std::vector<AugmentedSample> samples;
    std::vector<GeneratorReport> reports;
    std::vector<std::string> warnings;
};

// Originals plus one copy per sample per enabled generator. Answerable copies
// whose answers cannot be relocated are dropped; unanswerable copies keep
// is_impossible. Output order: each base sample followed by its copies.
AugmentResult build_augmented_set(const std::vector<SquadSample>& base, const AugmentConfig& config,
                                  TranslationClient* client);

// Reads a line-delimited {"passage_id": ..., "transcript": ...} file. Keys
// match SquadSample::passage_id, or a sample id.
std::map<std::string, std::string> load_transcript_map(const std::filesystem::path& path);
std::map<std::string, std::string> parse_transcript_map(std::istream& in);

AugmentResult import_tts_asr_passages(const std::map<std::string, std::string>& transcripts,
                                      const std::vector<SquadSample>& base,
                                      const RelocationOptions& options = {});
AugmentResult import_tts_asr_passages(const std::filesystem::path& path,
                                      const std::vector<SquadSample>& base,
                                      const RelocationOptions& options = {});

// SQuAD layout of the samples plus a sidecar with one line per sample:
// {"id", "source_id", "provenance", "outcome", "match_score"}.
void write_augmented(std::ostream& squad_out, std::ostream& provenance_out,
                     const std::vector<AugmentedSample>& samples);

} // namespace sqa
