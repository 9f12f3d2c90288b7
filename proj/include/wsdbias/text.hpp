#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace wsdbias {

// Decodes the UTF-8 sequence starting at s[pos] and advances pos past it.
// Returns -1 for a malformed sequence (pos advances by one byte).
int32_t utf8_next(std::string_view s, std::size_t& pos);

void utf8_append(std::string& out, int32_t cp);

// Returns false and sets bad_pos (byte offset) on the first malformed sequence.
bool valid_utf8(std::string_view s, std::size_t* bad_pos = nullptr);

// Unicode whitespace: ASCII controls/space plus the common space separators
// (NBSP, en/em spaces, line/paragraph separators, ideographic space).
bool is_space_cp(int32_t cp);

// Punctuation: ASCII punctuation plus frequent general-punctuation code
// points (dashes, curly quotes, guillemets, ellipsis, CJK full stop).
bool is_punct_cp(int32_t cp);

// Case folding over ASCII and Latin-1 (covers German/French letters).
int32_t lower_cp(int32_t cp);

std::string lowercase(std::string_view s);

}  // namespace wsdbias
