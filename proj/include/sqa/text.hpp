#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sqa {

// Half-open range [begin, end). Units depend on context; data structures
// that cross file boundaries use Unicode code points.
struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const CharSpan&) const = default;
};

std::string to_lower(std::string_view text);

// Canonical transcript form: ASCII-lowercased, leading/trailing punctuation
// removed, internal whitespace runs collapsed to one space.
std::string normalize_word(std::string_view word);

std::vector<std::string> split_whitespace(std::string_view text);

// Splits on whitespace and normalizes each piece, dropping pieces that
// normalize to nothing.
std::vector<std::string> normalize_words(std::string_view text);

// Words joined by single spaces together with each word's code point range
// in the joined text. This is the passage the QA model sees for a response.
struct Passage {
    std::string text;
    std::vector<CharSpan> word_offsets;
};

Passage join_words(const std::vector<std::string>& words);

// Byte offset of every code point boundary; size is code point count + 1.
// Invalid UTF-8 lead bytes are treated as single-byte code points.
std::vector<std::size_t> code_point_offsets(std::string_view text);

std::size_t code_point_length(std::string_view text);

// Substring by code point range. Throws std::out_of_range past the end.
std::string utf8_substr(std::string_view text, CharSpan code_points);

} // namespace sqa
