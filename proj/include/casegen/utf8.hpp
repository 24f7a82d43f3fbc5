#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace casegen::utf8 {

// Decodes UTF-8 into unicode scalar values. Invalid bytes are decoded
// permissively, one byte at a time, so the function is total and
// deterministic on arbitrary input.
std::u32string decode(std::string_view text);

std::size_t scalar_count(std::string_view text);

// White_Space property, the set relevant for tokenization.
bool is_whitespace(char32_t cp);

// ASCII punctuation only; tokenization strips these from token edges.
bool is_edge_punct(char32_t cp);

char32_t to_lower(char32_t cp);

// Encodes a single scalar value back to UTF-8 and appends it.
void append(std::string& out, char32_t cp);

}  // namespace casegen::utf8
