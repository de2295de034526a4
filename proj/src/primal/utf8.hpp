#pragma once

#include <string>
#include <string_view>

namespace primal::utf8 {

// Decodes UTF-8 into a sequence of Unicode scalar values. Throws
// primal::Error on malformed input (truncated sequences, overlong
// encodings, surrogates, out-of-range code points).
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);

// Trims leading/trailing whitespace (ASCII space/tab/newline family plus
// U+00A0 and U+3000).
std::u32string trim(std::u32string_view s);

}  // namespace primal::utf8
