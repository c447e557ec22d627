#include "sqa/augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "sqa/error.hpp"
#include "sqa/metrics.hpp"
#include "sqa/parallel.hpp"

namespace sqa {

namespace {

bool is_sentence_end(char c) {
    return c == '.' || c == '!' || c == '?';
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || (static_cast<unsigned char>(c) & 0x80U) != 0;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n\f\v");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_sentences(std::string_view passage) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < passage.size()) {
        if (is_sentence_end(passage[i])) {
            std::size_t j = i + 1;
            while (j < passage.size() && (is_sentence_end(passage[j]) || passage[j] == '"' ||
                                          passage[j] == '\'' || passage[j] == ')')) {
                ++j;
            }
            if (j == passage.size() || is_space(passage[j])) {
                auto sentence = trim(passage.substr(start, j - start));
                if (!sentence.empty()) {
                    sentences.push_back(std::move(sentence));
                }
                start = j;
            }
            i = j;
            continue;
        }
        ++i;
    }
    auto tail = trim(passage.substr(start));
    if (!tail.empty()) {
        sentences.push_back(std::move(tail));
    }
    return sentences;
}

std::size_t byte_to_code_point(std::string_view text, std::size_t byte_offset) {
    return code_point_length(text.substr(0, byte_offset));
}

struct PassageToken {
    std::string normalized;
    std::size_t begin = 0; // bytes
    std::size_t end = 0;
};

std::vector<PassageToken> tokenize_with_offsets(std::string_view text) {
    std::vector<PassageToken> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) {
            ++i;
        }
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) {
            ++i;
        }
        if (i > start) {
            auto normalized = normalize_word(text.substr(start, i - start));
            if (!normalized.empty()) {
                tokens.push_back({std::move(normalized), start, i});
            }
        }
    }
    return tokens;
}

} // namespace

std::vector<std::string> chunk_sentences(std::string_view passage, std::size_t soft_cap) {
    std::vector<std::string> chunks;
    std::string current;
    for (auto& sentence : split_sentences(passage)) {
        if (current.empty()) {
            current = std::move(sentence);
        } else if (code_point_length(current) + 1 + code_point_length(sentence) <= soft_cap) {
            current += ' ';
            current += sentence;
        } else {
            chunks.push_back(std::move(current));
            current = std::move(sentence);
        }
    }
    if (!current.empty()) {
        chunks.push_back(std::move(current));
    }
    return chunks;
}

std::string back_translate_passage(std::string_view passage, std::string_view pivot,
                                   TranslationClient& client, std::string_view passage_id,
                                   std::size_t soft_cap) {
    const auto chunks = chunk_sentences(passage, soft_cap);
    if (chunks.empty()) {
        return {};
    }
    std::vector<std::string> back;
    try {
        const auto forward = client.translate(chunks, "en", pivot);
        if (forward.size() != chunks.size()) {
            throw Error(fmt::format("en->{} returned {} outputs for {} inputs", pivot, forward.size(),
                                    chunks.size()));
        }
        back = client.translate(forward, pivot, "en");
        if (back.size() != chunks.size()) {
            throw Error(fmt::format("{}->en returned {} outputs for {} inputs", pivot, back.size(),
                                    chunks.size()));
        }
    } catch (const std::exception& e) {
        throw Error(fmt::format("passage '{}': back-translation via {} failed: {}", passage_id, pivot,
                                e.what()));
    }
    std::string out;
    for (const auto& piece : back) {
        if (!out.empty()) {
            out += ' ';
        }
        out += piece;
    }
    return out;
}

std::string_view to_string(RelocationOutcome outcome) {
    switch (outcome) {
    case RelocationOutcome::Exact:
        return "exact";
    case RelocationOutcome::Fuzzy:
        return "fuzzy";
    case RelocationOutcome::Dropped:
        return "dropped";
    }
    return "?";
}

RelocationResult relocate_answer(std::string_view answer_text, std::string_view new_passage,
                                 const RelocationOptions& options) {
    RelocationResult result;
    const std::string needle = to_lower(trim(answer_text));
    if (needle.empty()) {
        return result;
    }

    // Exact: case-insensitive, and not starting or ending inside a word.
    const std::string haystack = to_lower(new_passage);
    for (auto pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
        const std::size_t end = pos + needle.size();
        const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]) || !is_word_char(needle.front());
        const bool right_ok =
            end == haystack.size() || !is_word_char(haystack[end]) || !is_word_char(needle.back());
        if (left_ok && right_ok) {
            result.outcome = RelocationOutcome::Exact;
            result.char_span =
                CharSpan{byte_to_code_point(new_passage, pos), byte_to_code_point(new_passage, end)};
            result.match_score = 1.0;
            return result;
        }
    }

    const auto answer_tokens = normalize_words(answer_text);
    const auto tokens = tokenize_with_offsets(new_passage);
    if (answer_tokens.empty() || tokens.empty()) {
        return result;
    }
    const std::size_t m = answer_tokens.size();
    const std::size_t shortest = m > options.window_slack ? m - options.window_slack : 1;
    const std::size_t longest = m + options.window_slack;

    double best = 0.0;
    std::size_t best_start = 0;
    std::size_t best_length = 0;
    std::vector<std::string> window;
    for (std::size_t start = 0; start < tokens.size(); ++start) {
        for (std::size_t length = std::max<std::size_t>(1, shortest);
             length <= longest && start + length <= tokens.size(); ++length) {
            window.clear();
            for (std::size_t k = start; k < start + length; ++k) {
                window.push_back(tokens[k].normalized);
            }
            const double f1 = token_f1(window, answer_tokens);
            if (f1 > best) {
                best = f1;
                best_start = start;
                best_length = length;
            }
        }
    }
    result.match_score = best;
    if (best_length > 0 && best >= options.fuzzy_threshold) {
        const std::size_t begin = tokens[best_start].begin;
        const std::size_t end = tokens[best_start + best_length - 1].end;
        result.outcome = RelocationOutcome::Fuzzy;
        result.char_span =
            CharSpan{byte_to_code_point(new_passage, begin), byte_to_code_point(new_passage, end)};
    }
    return result;
}

std::string Provenance::label() const {
    switch (kind) {
    case Kind::Original:
        return "original";
    case Kind::BackTranslation:
        return "back_translation:" + pivot;
    case Kind::TtsAsr:
        return "tts_asr";
    }
    return "?";
}

namespace {

std::string id_suffix(const Provenance& p) {
    return p.kind == Provenance::Kind::BackTranslation ? "bt-" + p.pivot : "tts";
}

// Builds the copy of `base` whose passage became `passage`, or nullopt when an
// answerable sample loses all of its answers.
std::optional<AugmentedSample> make_copy(const SquadSample& base, const std::string& passage,
                                         const Provenance& provenance,
                                         const RelocationOptions& options) {
    AugmentedSample out;
    out.provenance = provenance;
    out.source_id = base.id;
    out.sample = base;
    out.sample.id = fmt::format("{}#{}", base.id, id_suffix(provenance));
    out.sample.passage_id = fmt::format("{}#{}", base.passage_id, id_suffix(provenance));
    out.sample.passage = passage;
    out.sample.gold_answers.clear();
    if (base.is_impossible) {
        return out;
    }
    out.outcome = RelocationOutcome::Exact;
    out.match_score = 1.0;
    for (const auto& answer : base.gold_answers) {
        const auto r = relocate_answer(answer.text, passage, options);
        if (r.outcome == RelocationOutcome::Dropped) {
            continue;
        }
        out.sample.gold_answers.push_back({*r.char_span, utf8_substr(passage, *r.char_span)});
        if (r.outcome == RelocationOutcome::Fuzzy) {
            out.outcome = RelocationOutcome::Fuzzy;
        }
        out.match_score = std::min(out.match_score, r.match_score);
    }
    if (out.sample.gold_answers.empty()) {
        return std::nullopt;
    }
    return out;
}

// One generator's rewritten passage per base sample (nullopt = failed or not
// covered), plus the copies and report built from them.
struct GeneratorRun {
    Provenance provenance;
    std::vector<std::optional<AugmentedSample>> copies;
    GeneratorReport report;
};

GeneratorRun run_generator(const std::vector<SquadSample>& base, const Provenance& provenance,
                           const std::vector<std::optional<std::string>>& passages,
                           const RelocationOptions& options, unsigned jobs) {
    GeneratorRun run;
    run.provenance = provenance;
    run.report.generator = provenance.label();
    run.copies.resize(base.size());
    parallel_for(base.size(), jobs, [&](std::size_t i) {
        if (passages[i]) {
            run.copies[i] = make_copy(base[i], *passages[i], provenance, options);
        }
    });
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (!passages[i]) {
            continue;
        }
        if (base[i].is_impossible) {
            ++run.report.unanswerable;
            continue;
        }
        ++run.report.attempted;
        if (run.copies[i]) {
            ++run.report.retained;
        }
    }
    return run;
}

AugmentResult assemble(const std::vector<SquadSample>& base, bool include_originals,
                       std::vector<GeneratorRun>& runs) {
    AugmentResult result;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (include_originals) {
            AugmentedSample original;
            original.sample = base[i];
            original.source_id = base[i].id;
            result.samples.push_back(std::move(original));
        }
        for (auto& run : runs) {
            if (run.copies[i]) {
                result.samples.push_back(std::move(*run.copies[i]));
            }
        }
    }
    for (const auto& run : runs) {
        result.reports.push_back(run.report);
    }
    return result;
}

std::vector<std::optional<std::string>> match_transcripts(
    const std::map<std::string, std::string>& transcripts, const std::vector<SquadSample>& base,
    std::vector<std::string>& warnings) {
    std::vector<std::optional<std::string>> passages(base.size());
    std::set<std::string> used;
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (const auto* key : {&base[i].passage_id, &base[i].id}) {
            if (const auto it = transcripts.find(*key); it != transcripts.end()) {
                passages[i] = it->second;
                used.insert(*key);
                break;
            }
        }
    }
    for (const auto& [key, text] : transcripts) {
        if (!used.contains(key)) {
            warnings.push_back(fmt::format("transcript '{}' matches no base passage or sample", key));
        }
    }
    return passages;
}

} // namespace

AugmentResult build_augmented_set(const std::vector<SquadSample>& base, const AugmentConfig& config,
                                  TranslationClient* client) {
    for (const auto& s : base) {
        validate_squad_sample(s);
    }
    std::vector<GeneratorRun> runs;
    std::vector<std::string> warnings;
    if (config.back_translation && !config.pivots.empty()) {
        if (client == nullptr) {
            throw Error("back-translation enabled but no translation client configured");
        }
        // Many questions share a passage; translate each distinct passage once.
        std::vector<std::string> unique;
        std::vector<std::string> unique_ids;
        std::map<std::string, std::size_t> slot;
        std::vector<std::size_t> sample_slot(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            const auto [it, inserted] = slot.emplace(base[i].passage, unique.size());
            if (inserted) {
                unique.push_back(base[i].passage);
                unique_ids.push_back(base[i].passage_id);
            }
            sample_slot[i] = it->second;
        }
        for (const auto& pivot : config.pivots) {
            std::vector<std::optional<std::string>> translated(unique.size());
            std::vector<std::string> errors(unique.size());
            parallel_for(unique.size(), config.jobs, [&](std::size_t u) {
                try {
                    translated[u] = back_translate_passage(unique[u], pivot, *client,
                                                           unique_ids[u],
                                                           config.chunk_soft_cap);
                } catch (const std::exception& e) {
                    errors[u] = e.what();
                }
            });
            std::vector<std::optional<std::string>> passages(base.size());
            std::size_t failed = 0;
            for (std::size_t i = 0; i < base.size(); ++i) {
                passages[i] = translated[sample_slot[i]];
                if (!passages[i]) {
                    ++failed;
                    warnings.push_back(
                        fmt::format("sample '{}' skipped: {}", base[i].id, errors[sample_slot[i]]));
                }
            }
            Provenance p{Provenance::Kind::BackTranslation, pivot};
            runs.push_back(run_generator(base, p, passages, config.relocation, config.jobs));
            runs.back().report.failed = failed;
        }
    }
    if (config.tts_transcripts) {
        const auto passages = match_transcripts(*config.tts_transcripts, base, warnings);
        runs.push_back(run_generator(base, {Provenance::Kind::TtsAsr, {}}, passages,
                                     config.relocation, config.jobs));
    }
    auto result = assemble(base, true, runs);
    result.warnings = std::move(warnings);
    return result;
}

std::map<std::string, std::string> parse_transcript_map(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            auto id = j.at("passage_id").get<std::string>();
            auto text = j.at("transcript").get<std::string>();
            if (!out.emplace(std::move(id), std::move(text)).second) {
                throw ValidationError(fmt::format("transcripts line {}: duplicate passage_id", line_no));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fmt::format("transcripts line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

std::map<std::string, std::string> load_transcript_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    return parse_transcript_map(in);
}

AugmentResult import_tts_asr_passages(const std::map<std::string, std::string>& transcripts,
                                      const std::vector<SquadSample>& base,
                                      const RelocationOptions& options) {
    std::vector<std::string> warnings;
    const auto passages = match_transcripts(transcripts, base, warnings);
    std::vector<GeneratorRun> runs;
    runs.push_back(run_generator(base, {Provenance::Kind::TtsAsr, {}}, passages, options, 1));
    auto result = assemble(base, false, runs);
    result.warnings = std::move(warnings);
    return result;
}

AugmentResult import_tts_asr_passages(const std::filesystem::path& path,
                                      const std::vector<SquadSample>& base,
                                      const RelocationOptions& options) {
    return import_tts_asr_passages(load_transcript_map(path), base, options);
}

void write_augmented(std::ostream& squad_out, std::ostream& provenance_out,
                     const std::vector<AugmentedSample>& samples) {
    std::vector<SquadSample> plain;
    plain.reserve(samples.size());
    for (const auto& s : samples) {
        plain.push_back(s.sample);
        nlohmann::ordered_json j;
        j["id"] = s.sample.id;
        j["source_id"] = s.source_id;
        j["provenance"] = s.provenance.label();
        j["outcome"] = s.sample.is_impossible ? "unanswerable" : std::string(to_string(s.outcome));
        j["match_score"] = s.match_score;
        provenance_out << j.dump() << '\n';
    }
    write_squad(squad_out, plain);
}

} // namespace sqa
