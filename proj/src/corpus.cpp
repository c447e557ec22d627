#include "sqa/corpus.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqa/error.hpp"

namespace sqa {

std::string_view to_string(Section section) {
    switch (section) {
    case Section::C:
        return "C";
    case Section::D:
        return "D";
    case Section::E:
        return "E";
    }
    return "?";
}

Section parse_section(std::string_view text) {
    if (text == "C") {
        return Section::C;
    }
    if (text == "D") {
        return Section::D;
    }
    if (text == "E") {
        return Section::E;
    }
    throw ParseError(fmt::format("unknown section '{}' (expected C, D or E)", text));
}

std::vector<std::string> ResponseRecord::word_texts() const {
    std::vector<std::string> out;
    out.reserve(words.size());
    for (const auto& w : words) {
        out.push_back(w.text);
    }
    return out;
}

SqaSample SqaSample::from_record(ResponseRecord record) {
    SqaSample sample;
    sample.prompt = record.prompt;
    sample.gold_answers = record.answers;
    sample.response = std::move(record);
    return sample;
}

void validate_record(const ResponseRecord& record) {
    const auto fail = [&](const std::string& what) {
        throw ValidationError(fmt::format("record '{}': {}", record.id, what));
    };
    if (record.id.empty()) {
        fail("empty id");
    }
    const auto& source = record.transcript_source;
    if (source != "manual" && source != "gec" && !(source.starts_with("asr:") && source.size() > 4)) {
        fail(fmt::format("transcript_source '{}' is not manual, gec or asr:<name>", source));
    }
    if (record.grade && !(*record.grade >= 0.0 && *record.grade <= 6.0)) {
        fail(fmt::format("grade {} outside 0-6", *record.grade));
    }
    for (std::size_t i = 0; i < record.words.size(); ++i) {
        const auto& w = record.words[i];
        if (w.text.empty()) {
            fail(fmt::format("word {} is empty after normalization", i));
        }
        if (!std::isfinite(w.start_time) || !std::isfinite(w.end_time)) {
            fail(fmt::format("word {} has a non-finite timestamp", i));
        }
        if (w.start_time < 0.0) {
            fail(fmt::format("word {} starts before 0 ({})", i, w.start_time));
        }
        if (w.end_time < w.start_time) {
            fail(fmt::format("word {} ends before it starts ({} < {})", i, w.end_time, w.start_time));
        }
        if (i > 0 && w.start_time < record.words[i - 1].start_time) {
            fail(fmt::format("word {} starts before word {}", i, i - 1));
        }
    }
    for (std::size_t a = 0; a < record.answers.size(); ++a) {
        const auto& span = record.answers[a].span;
        if (!span) {
            continue;
        }
        if (span->first > span->last || span->last >= record.words.size()) {
            fail(fmt::format("answer {} span [{}, {}] outside {} words", a, span->first, span->last,
                             record.words.size()));
        }
    }
}

std::vector<ResponseRecord> filter_unclear(const std::vector<ResponseRecord>& records,
                                           std::string_view marker) {
    const std::string normalized = normalize_word(marker);
    if (normalized.empty()) {
        throw ValidationError("unclear-word marker must be non-empty");
    }
    std::vector<ResponseRecord> out;
    for (const auto& record : records) {
        bool has_marker = false;
        for (const auto& w : record.words) {
            if (w.text == normalized) {
                has_marker = true;
                break;
            }
        }
        if (!has_marker) {
            out.push_back(record);
        }
    }
    return out;
}

int map_grade(std::string_view cefr) {
    static const std::map<std::string, int, std::less<>> grades = {
        {"a1", 1}, {"a2", 2}, {"b1", 3}, {"b2", 4}, {"c1", 5}, {"c2", 6},
        {"below-a1", 0}, {"pre-a1", 0}, {"below a1", 0},
    };
    const auto it = grades.find(to_lower(cefr));
    if (it == grades.end()) {
        throw ValidationError(fmt::format("unknown CEFR grade '{}'", cefr));
    }
    return it->second;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) {
        s.degenerate = true;
        return s;
    }
    double total = 0.0;
    for (const double v : values) {
        total += v;
    }
    s.mean = total / static_cast<double>(s.n);
    if (s.n < 2) {
        s.degenerate = true;
        return s;
    }
    double squares = 0.0;
    for (const double v : values) {
        squares += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(squares / static_cast<double>(s.n - 1));
    return s;
}

CorpusStats corpus_stats(const std::vector<ResponseRecord>& records) {
    struct Columns {
        std::size_t samples = 0;
        std::vector<double> prompt_words, response_words, answer_words, response_seconds,
            answer_seconds;
    };
    std::map<Section, Columns> by_section;
    for (const auto& r : records) {
        auto& c = by_section[r.section];
        ++c.samples;
        c.prompt_words.push_back(static_cast<double>(normalize_words(r.prompt).size()));
        c.response_words.push_back(static_cast<double>(r.words.size()));
        c.response_seconds.push_back(
            r.words.empty() ? 0.0 : r.words.back().end_time - r.words.front().start_time);

        double words = 0.0;
        double seconds = 0.0;
        bool answered = false;
        for (const auto& a : r.answers) {
            if (!a.span) {
                continue;
            }
            answered = true;
            words += static_cast<double>(a.span->length());
            seconds += r.words[a.span->last].end_time - r.words[a.span->first].start_time;
        }
        if (answered) {
            c.answer_words.push_back(words);
            c.answer_seconds.push_back(seconds);
        }
    }

    CorpusStats stats;
    for (const auto& [section, c] : by_section) {
        SectionStats s;
        s.section = section;
        s.samples = c.samples;
        s.prompt_words = summarize(c.prompt_words);
        s.response_words = summarize(c.response_words);
        s.answer_words = summarize(c.answer_words);
        s.response_seconds = summarize(c.response_seconds);
        s.answer_seconds = summarize(c.answer_seconds);
        stats.sections.push_back(s);
    }
    return stats;
}

void write_stats_csv(std::ostream& out, const CorpusStats& stats) {
    out << "section,statistic,n,mean,std,degenerate\n";
    for (const auto& s : stats.sections) {
        const auto row = [&](std::string_view name, const Summary& v) {
            fmt::print(out, "{},{},{},{},{},{}\n", to_string(s.section), name, v.n, v.mean, v.std,
                       v.degenerate ? 1 : 0);
        };
        fmt::print(out, "{},samples,{},{},0,0\n", to_string(s.section), s.samples, s.samples);
        row("prompt_words", s.prompt_words);
        row("response_words", s.response_words);
        row("answer_words", s.answer_words);
        row("response_seconds", s.response_seconds);
        row("answer_seconds", s.answer_seconds);
    }
}

void validate_squad_sample(const SquadSample& sample) {
    const auto fail = [&](const std::string& what) {
        throw ValidationError(fmt::format("sample '{}': {}", sample.id, what));
    };
    if (sample.is_impossible != sample.gold_answers.empty()) {
        fail(sample.is_impossible ? "flagged impossible but has gold answers"
                                  : "answerable but has no gold answers");
    }
    const std::size_t length = code_point_length(sample.passage);
    for (const auto& a : sample.gold_answers) {
        if (a.span.begin > a.span.end || a.span.end > length) {
            fail(fmt::format("answer span [{}, {}) outside passage of {} characters", a.span.begin,
                             a.span.end, length));
        }
        const auto actual = utf8_substr(sample.passage, a.span);
        if (actual != a.text) {
            fail(fmt::format("answer text '{}' does not match passage substring '{}'", a.text,
                             actual));
        }
    }
}

} // namespace sqa
