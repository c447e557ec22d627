#include "sqa/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace sqa {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::size_t sequence_width(unsigned char lead) {
    if ((lead & 0xE0U) == 0xC0U) {
        return 2;
    }
    if ((lead & 0xF0U) == 0xE0U) {
        return 3;
    }
    if ((lead & 0xF8U) == 0xF0U) {
        return 4;
    }
    return 1;
}

} // namespace

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string normalize_word(std::string_view word) {
    std::size_t first = 0;
    std::size_t last = word.size();
    while (first < last && (is_punct(word[first]) || is_space(word[first]))) {
        ++first;
    }
    while (last > first && (is_punct(word[last - 1]) || is_space(word[last - 1]))) {
        --last;
    }
    std::string out;
    out.reserve(last - first);
    bool in_space = false;
    for (std::size_t i = first; i < last; ++i) {
        const char c = word[i];
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space) {
            out.push_back(' ');
            in_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
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
            out.emplace_back(text.substr(start, i - start));
        }
    }
    return out;
}

std::vector<std::string> normalize_words(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& piece : split_whitespace(text)) {
        auto word = normalize_word(piece);
        if (!word.empty()) {
            out.push_back(std::move(word));
        }
    }
    return out;
}

Passage join_words(const std::vector<std::string>& words) {
    Passage passage;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) {
            passage.text.push_back(' ');
            ++cursor;
        }
        const std::size_t length = code_point_length(words[i]);
        passage.word_offsets.push_back({cursor, cursor + length});
        passage.text += words[i];
        cursor += length;
    }
    return passage;
}

std::vector<std::size_t> code_point_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    std::size_t i = 0;
    while (i < text.size()) {
        offsets.push_back(i);
        i = std::min(text.size(), i + sequence_width(static_cast<unsigned char>(text[i])));
    }
    offsets.push_back(text.size());
    return offsets;
}

std::size_t code_point_length(std::string_view text) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < text.size(); ++count) {
        i += sequence_width(static_cast<unsigned char>(text[i]));
    }
    return count;
}

std::string utf8_substr(std::string_view text, CharSpan code_points) {
    const auto offsets = code_point_offsets(text);
    if (code_points.begin > code_points.end || code_points.end >= offsets.size()) {
        throw std::out_of_range("code point range past end of text");
    }
    const std::size_t begin = offsets[code_points.begin];
    return std::string(text.substr(begin, offsets[code_points.end] - begin));
}

} // namespace sqa
