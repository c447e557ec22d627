#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "sqa/decode.hpp"
#include "sqa/error.hpp"

namespace sqa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Calls parse(json, line) for every non-blank line, wrapping JSON and type
// errors with the line number.
template <typename T, typename Parse>
std::vector<T> parse_lines(std::istream& in, std::string_view what, Parse&& parse) {
    std::vector<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(parse(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("{} line {}: {}", what, line_no, e.what()));
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("{} line {}: {}", what, line_no, e.what()));
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{} line {}: {}", what, line_no, e.what()));
        }
    }
    return out;
}

void require_version(const json& j, int expected) {
    if (!j.is_object()) {
        throw ParseError("expected a JSON object");
    }
    const auto it = j.find("version");
    if (it == j.end()) {
        throw ParseError("field 'version': missing");
    }
    if (!it->is_number_integer() || it->get<int>() != expected) {
        throw ParseError(fmt::format("field 'version': unsupported version {}", it->dump()));
    }
}

double score_from_json(const json& v) {
    if (v.is_null()) {
        return -std::numeric_limits<double>::infinity();
    }
    return v.get<double>();
}

std::vector<double> scores_from_json(const json& v) {
    std::vector<double> out;
    for (const auto& x : v) {
        out.push_back(score_from_json(x));
    }
    return out;
}

std::optional<std::pair<std::size_t, std::size_t>> pair_from_json(const json& v) {
    if (v.is_null()) {
        return std::nullopt;
    }
    if (!v.is_array() || v.size() != 2) {
        throw ParseError("expected [first, last] or null");
    }
    return std::pair{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

TokenLogits logits_from_json(const json& j) {
    require_version(j, kLogitsVersion);
    TokenLogits l;
    l.sample_id = j.at("sample_id").get<std::string>();
    l.seed_id = j.at("seed_id").get<std::string>();
    const auto kind = j.value("score_type", std::string("logits"));
    if (kind == "logits") {
        l.kind = ScoreKind::Logits;
    } else if (kind == "probabilities") {
        l.kind = ScoreKind::Probabilities;
    } else {
        throw ParseError(fmt::format("field 'score_type': unknown value '{}'", kind));
    }
    for (const auto& t : j.at("tokens")) {
        l.tokens.push_back({t.at("text").get<std::string>(), t.at("start").get<std::size_t>(),
                            t.at("end").get<std::size_t>()});
    }
    l.start_scores = scores_from_json(j.at("start_scores"));
    l.end_scores = scores_from_json(j.at("end_scores"));
    validate_logits(l);
    return l;
}

SpanPrediction prediction_from_json(const json& j) {
    require_version(j, kPredictionVersion);
    SpanPrediction p;
    p.sample_id = j.at("sample_id").get<std::string>();
    if (const auto span = pair_from_json(j.value("word_span", json())); span) {
        if (span->first > span->second) {
            throw ValidationError(fmt::format("prediction '{}': word_span first after last", p.sample_id));
        }
        p.word_span = WordSpan{span->first, span->second};
    }
    if (const auto span = pair_from_json(j.value("char_span", json())); span) {
        if (span->first > span->second) {
            throw ValidationError(fmt::format("prediction '{}': char_span begin after end", p.sample_id));
        }
        p.char_span = CharSpan{span->first, span->second};
    }
    p.score = score_from_json(j.at("score"));
    p.null_score = score_from_json(j.at("null_score"));
    return p;
}

} // namespace

std::vector<TokenLogits> parse_logits(std::istream& in) {
    return parse_lines<TokenLogits>(in, "logits", logits_from_json);
}

std::vector<TokenLogits> load_logits(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    return parse_logits(in);
}

std::string serialize_logits(const TokenLogits& logits) {
    ordered_json j;
    j["version"] = kLogitsVersion;
    j["sample_id"] = logits.sample_id;
    j["seed_id"] = logits.seed_id;
    j["score_type"] = logits.kind == ScoreKind::Logits ? "logits" : "probabilities";
    auto tokens = ordered_json::array();
    for (const auto& t : logits.tokens) {
        tokens.push_back({{"text", t.text}, {"start", t.char_start}, {"end", t.char_end}});
    }
    j["tokens"] = std::move(tokens);
    j["start_scores"] = logits.start_scores;
    j["end_scores"] = logits.end_scores;
    return j.dump();
}

std::vector<SpanPrediction> parse_predictions(std::istream& in) {
    return parse_lines<SpanPrediction>(in, "predictions", prediction_from_json);
}

std::vector<SpanPrediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    return parse_predictions(in);
}

std::string serialize_prediction(const SpanPrediction& prediction) {
    ordered_json j;
    j["version"] = kPredictionVersion;
    j["sample_id"] = prediction.sample_id;
    j["word_span"] = prediction.word_span
                         ? ordered_json::array({prediction.word_span->first, prediction.word_span->last})
                         : ordered_json();
    j["char_span"] = prediction.char_span
                         ? ordered_json::array({prediction.char_span->begin, prediction.char_span->end})
                         : ordered_json();
    j["score"] = prediction.score;
    j["null_score"] = prediction.null_score;
    return j.dump();
}

void write_predictions(std::ostream& out, const std::vector<SpanPrediction>& predictions) {
    for (const auto& p : predictions) {
        out << serialize_prediction(p) << '\n';
    }
}

} // namespace sqa
