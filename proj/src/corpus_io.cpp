#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "sqa/corpus.hpp"
#include "sqa/error.hpp"

namespace sqa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kNoAnswer = "no-answer";

// Tracks where in the input we are so every error can name it.
struct RecordContext {
    std::size_t line = 0;
    std::size_t index = 0;

    [[noreturn]] void fail(std::string_view field, std::string_view what) const {
        throw ParseError(
            fmt::format("line {}, record {}: field '{}': {}", line, index, field, what));
    }
};

const json& require(const json& obj, const char* key, const RecordContext& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        ctx.fail(key, "missing");
    }
    return *it;
}

std::string require_string(const json& obj, const char* key, const RecordContext& ctx) {
    const auto& v = require(obj, key, ctx);
    if (!v.is_string()) {
        ctx.fail(key, "expected a string");
    }
    return v.get<std::string>();
}

double require_number(const json& v, const std::string& field, const RecordContext& ctx) {
    if (!v.is_number()) {
        ctx.fail(field, "expected a number");
    }
    return v.get<double>();
}

std::size_t require_index(const json& v, const std::string& field, const RecordContext& ctx) {
    if (!v.is_number_unsigned()) {
        ctx.fail(field, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, std::string_view where,
                    const RecordContext& ctx) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            ctx.fail(fmt::format("{}{}", where, key), "unknown field");
        }
    }
}

ResponseRecord parse_record(const json& j, const RecordContext& ctx) {
    if (!j.is_object()) {
        ctx.fail("<record>", "expected a JSON object");
    }
    reject_unknown(j,
                   {"version", "id", "section", "prompt", "words", "answers", "grade",
                    "transcript_source"},
                   "", ctx);
    const auto& version = require(j, "version", ctx);
    if (!version.is_number_integer() || version.get<int>() != kSqaRecordVersion) {
        ctx.fail("version", fmt::format("unsupported version {}", version.dump()));
    }

    ResponseRecord r;
    r.id = require_string(j, "id", ctx);
    try {
        r.section = parse_section(require_string(j, "section", ctx));
    } catch (const ParseError& e) {
        ctx.fail("section", e.what());
    }
    r.prompt = require_string(j, "prompt", ctx);
    r.transcript_source = require_string(j, "transcript_source", ctx);

    const auto& words = require(j, "words", ctx);
    if (!words.is_array()) {
        ctx.fail("words", "expected an array");
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        const std::string field = fmt::format("words[{}]", i);
        if (!w.is_object()) {
            ctx.fail(field, "expected an object");
        }
        reject_unknown(w, {"text", "start", "end"}, field + ".", ctx);
        TimedWord word;
        const auto& text = require(w, "text", ctx);
        if (!text.is_string()) {
            ctx.fail(field + ".text", "expected a string");
        }
        word.text = normalize_word(text.get<std::string>());
        word.start_time = require_number(require(w, "start", ctx), field + ".start", ctx);
        word.end_time = require_number(require(w, "end", ctx), field + ".end", ctx);
        r.words.push_back(std::move(word));
    }

    const auto& answers = require(j, "answers", ctx);
    if (!answers.is_array()) {
        ctx.fail("answers", "expected an array");
    }
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto& a = answers[i];
        const std::string field = fmt::format("answers[{}]", i);
        if (a.is_string() && a.get<std::string>() == kNoAnswer) {
            r.answers.push_back(AnswerAnnotation::no_answer());
            continue;
        }
        if (!a.is_object()) {
            ctx.fail(field, "expected {first, last} or \"no-answer\"");
        }
        reject_unknown(a, {"first", "last"}, field + ".", ctx);
        WordSpan span;
        span.first = require_index(require(a, "first", ctx), field + ".first", ctx);
        span.last = require_index(require(a, "last", ctx), field + ".last", ctx);
        r.answers.push_back({span});
    }

    if (const auto it = j.find("grade"); it != j.end() && !it->is_null()) {
        r.grade = require_number(*it, "grade", ctx);
    }
    return r;
}

} // namespace

std::vector<ResponseRecord> parse_sqa_corpus(std::istream& in) {
    std::vector<ResponseRecord> records;
    std::string line;
    RecordContext ctx;
    while (std::getline(in, line)) {
        ++ctx.line;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(
                fmt::format("line {}, record {}: invalid JSON: {}", ctx.line, ctx.index, e.what()));
        }
        auto record = parse_record(j, ctx);
        try {
            validate_record(record);
        } catch (const ValidationError& e) {
            throw ValidationError(
                fmt::format("line {}, record {}: {}", ctx.line, ctx.index, e.what()));
        }
        records.push_back(std::move(record));
        ++ctx.index;
    }
    return records;
}

std::vector<ResponseRecord> load_sqa_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    return parse_sqa_corpus(in);
}

std::string serialize_record(const ResponseRecord& record) {
    ordered_json j;
    j["version"] = kSqaRecordVersion;
    j["id"] = record.id;
    j["section"] = std::string(to_string(record.section));
    j["prompt"] = record.prompt;
    auto words = ordered_json::array();
    for (const auto& w : record.words) {
        words.push_back({{"text", w.text}, {"start", w.start_time}, {"end", w.end_time}});
    }
    j["words"] = std::move(words);
    auto answers = ordered_json::array();
    for (const auto& a : record.answers) {
        if (a.span) {
            answers.push_back({{"first", a.span->first}, {"last", a.span->last}});
        } else {
            answers.push_back(std::string(kNoAnswer));
        }
    }
    j["answers"] = std::move(answers);
    if (record.grade) {
        j["grade"] = *record.grade;
    }
    j["transcript_source"] = record.transcript_source;
    return j.dump();
}

void write_sqa_corpus(std::ostream& out, const std::vector<ResponseRecord>& records) {
    for (const auto& r : records) {
        out << serialize_record(r) << '\n';
    }
}

// ---------------------------------------------------------------------------
// SQuAD

std::vector<SquadSample> parse_squad(std::istream& in) {
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("invalid SQuAD JSON: {}", e.what()));
    }
    const auto fail = [](const std::string& where, std::string_view what) {
        throw ParseError(fmt::format("SQuAD {}: {}", where, what));
    };
    if (!root.is_object() || !root.contains("data") || !root["data"].is_array()) {
        fail("root", "expected an object with a 'data' array");
    }

    std::vector<SquadSample> samples;
    const auto& data = root["data"];
    for (std::size_t a = 0; a < data.size(); ++a) {
        const auto& article = data[a];
        const std::string where_article = fmt::format("data[{}]", a);
        if (!article.is_object() || !article.contains("paragraphs") ||
            !article["paragraphs"].is_array()) {
            fail(where_article, "expected an object with a 'paragraphs' array");
        }
        const std::string title = article.value("title", std::string{});
        const auto& paragraphs = article["paragraphs"];
        for (std::size_t p = 0; p < paragraphs.size(); ++p) {
            const auto& para = paragraphs[p];
            const std::string where_para = fmt::format("{}.paragraphs[{}]", where_article, p);
            if (!para.is_object() || !para.contains("context") || !para["context"].is_string() ||
                !para.contains("qas") || !para["qas"].is_array()) {
                fail(where_para, "expected 'context' string and 'qas' array");
            }
            const std::string context = para["context"].get<std::string>();
            for (const auto& qa : para["qas"]) {
                if (!qa.is_object() || !qa.contains("id") || !qa.contains("question") ||
                    !qa["id"].is_string() || !qa["question"].is_string()) {
                    fail(where_para, "qa entry needs string 'id' and 'question'");
                }
                SquadSample s;
                s.id = qa["id"].get<std::string>();
                s.title = title;
                s.passage_id = fmt::format("{}#{}", title, p);
                s.question = qa["question"].get<std::string>();
                s.passage = context;
                s.is_impossible = qa.value("is_impossible", false);
                if (const auto it = qa.find("answers"); it != qa.end()) {
                    if (!it->is_array()) {
                        fail(s.id, "'answers' must be an array");
                    }
                    for (const auto& ans : *it) {
                        if (!ans.is_object() || !ans.contains("text") ||
                            !ans.contains("answer_start") || !ans["text"].is_string() ||
                            !ans["answer_start"].is_number_unsigned()) {
                            fail(s.id, "answer needs string 'text' and integer 'answer_start'");
                        }
                        SquadAnswer answer;
                        answer.text = ans["text"].get<std::string>();
                        answer.span.begin = ans["answer_start"].get<std::size_t>();
                        answer.span.end = answer.span.begin + code_point_length(answer.text);
                        s.gold_answers.push_back(std::move(answer));
                    }
                }
                validate_squad_sample(s);
                samples.push_back(std::move(s));
            }
        }
    }
    return samples;
}

std::vector<SquadSample> load_squad(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    return parse_squad(in);
}

void write_squad(std::ostream& out, const std::vector<SquadSample>& samples) {
    ordered_json data = ordered_json::array();
    for (const auto& s : samples) {
        if (data.empty() || data.back()["title"] != s.title) {
            data.push_back({{"title", s.title}, {"paragraphs", ordered_json::array()}});
        }
        auto& paragraphs = data.back()["paragraphs"];
        if (paragraphs.empty() || paragraphs.back()["context"] != s.passage) {
            paragraphs.push_back({{"context", s.passage}, {"qas", ordered_json::array()}});
        }
        auto answers = ordered_json::array();
        for (const auto& a : s.gold_answers) {
            answers.push_back({{"text", a.text}, {"answer_start", a.span.begin}});
        }
        paragraphs.back()["qas"].push_back({{"id", s.id},
                                            {"question", s.question},
                                            {"answers", std::move(answers)},
                                            {"is_impossible", s.is_impossible}});
    }
    ordered_json root;
    root["version"] = "v2.0";
    root["data"] = std::move(data);
    out << root.dump() << '\n';
}

} // namespace sqa
