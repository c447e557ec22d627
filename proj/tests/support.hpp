#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "oracles.hpp"
#include "sqa/align.hpp"
#include "sqa/corpus.hpp"

namespace testing {

// Checks that an alignment is a well-formed edit script over ref/hyp and
// returns its cost recomputed with the oracle cost function. Returns a
// message on the first structural problem.
struct ScriptCheck {
    std::string problem;
    double cost = 0.0;
};

inline ScriptCheck check_script(const sqa::WordAlignment& a, const oracle::Words& ref,
                                const oracle::Words& hyp, bool weighted = true) {
    ScriptCheck out;
    std::size_t i = 0;
    std::size_t j = 0;
    double op_sum = 0.0;
    const auto fail = [&](std::size_t k, const char* what) {
        out.problem = fmt::format("op {}: {}", k, what);
        return out;
    };
    for (std::size_t k = 0; k < a.ops.size(); ++k) {
        const auto& op = a.ops[k];
        op_sum += op.cost;
        switch (op.kind) {
        case sqa::EditKind::Match:
        case sqa::EditKind::Substitute: {
            if (op.ref_index != i || op.hyp_index != j || i >= ref.size() || j >= hyp.size()) {
                return fail(k, "bad indices");
            }
            const bool same = ref[i] == hyp[j];
            if (same != (op.kind == sqa::EditKind::Match)) {
                return fail(k, "match/substitute mislabelled");
            }
            out.cost += weighted ? oracle::substitution_cost(ref[i], hyp[j]) : (same ? 0.0 : 1.0);
            ++i;
            ++j;
            break;
        }
        case sqa::EditKind::Delete:
            if (op.ref_index != i || op.hyp_index || i >= ref.size()) {
                return fail(k, "bad delete");
            }
            out.cost += 1.0;
            ++i;
            break;
        case sqa::EditKind::Insert:
            if (op.hyp_index != j || op.ref_index || j >= hyp.size()) {
                return fail(k, "bad insert");
            }
            out.cost += 1.0;
            ++j;
            break;
        case sqa::EditKind::Transpose:
            if (op.ref_index != i || op.hyp_index != j || i + 1 >= ref.size() || j + 1 >= hyp.size() ||
                ref[i] != hyp[j + 1] || ref[i + 1] != hyp[j]) {
                return fail(k, "bad transpose");
            }
            out.cost += 1.0;
            i += 2;
            j += 2;
            break;
        }
    }
    if (i != ref.size() || j != hyp.size()) {
        out.problem = "script does not consume both sequences";
    } else if (std::abs(op_sum - a.total_cost) > 1e-9) {
        out.problem = "total_cost differs from the sum of op costs";
    }
    return out;
}

// Self-removing scratch directory.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                fmt::format("sqa-test-{}-{}", static_cast<long>(::getpid()), counter++);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string random_word(std::mt19937& rng) {
    std::uniform_int_distribution<int> length(4, 8);
    std::uniform_int_distribution<int> letter('a', 'z');
    std::string word(static_cast<std::size_t>(length(rng)), 'a');
    for (auto& c : word) {
        c = static_cast<char>(letter(rng));
    }
    return word;
}

// Synthetic timed corpus: words are random letter strings, unique within their response, words
// are back to back with small pauses, and each response carries one or two
// answer spans (or no-answer for every seventh record).
inline std::vector<sqa::ResponseRecord> synthetic_corpus(std::mt19937& rng, std::size_t count,
                                                         std::size_t min_words = 12,
                                                         std::size_t max_words = 40) {
    std::uniform_int_distribution<std::size_t> length(min_words, max_words);
    std::uniform_real_distribution<double> dur(0.15, 0.6);
    std::uniform_real_distribution<double> pause(0.0, 0.2);
    std::vector<sqa::ResponseRecord> out;
    for (std::size_t r = 0; r < count; ++r) {
        sqa::ResponseRecord rec;
        rec.id = fmt::format("s{:04}", r);
        rec.section = static_cast<sqa::Section>(r % 3);
        rec.prompt = fmt::format("prompt number {} for the speaker", r % 17);
        const std::size_t n = length(rng);
        double t = pause(rng);
        std::set<std::string> used;
        for (std::size_t w = 0; w < n; ++w) {
            const double d = dur(rng);
            std::string word;
            do {
                word = random_word(rng);
            } while (!used.insert(word).second);
            rec.words.push_back({word, t, t + d});
            t += d + pause(rng);
        }
        if (r % 7 == 6) {
            rec.answers.push_back(sqa::AnswerAnnotation::no_answer());
        } else {
            std::uniform_int_distribution<std::size_t> first(0, n - 4);
            std::uniform_int_distribution<std::size_t> len(1, 3);
            const std::size_t f = first(rng);
            rec.answers.push_back({sqa::WordSpan{f, f + len(rng) - 1}});
            if (r % 5 == 0 && f + 5 < n) {
                rec.answers.push_back({sqa::WordSpan{f + 4, std::min(n - 1, f + 5)}});
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace testing
