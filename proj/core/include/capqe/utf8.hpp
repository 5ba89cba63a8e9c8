#pragma once

#include <string>
#include <string_view>

namespace capqe::utf8 {

// Decodes UTF-8 into code points. Malformed sequences decode to U+FFFD, one
// replacement per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view code_points);

bool is_whitespace(char32_t c);

// Punctuation set used by the standard metric tokenizer:
//   ASCII punctuation and symbols (!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~)
//   Latin-1 punctuation U+00A1, U+00A7, U+00AB, U+00B6, U+00B7, U+00BB, U+00BF
//   General Punctuation U+2010..U+2027, U+2030..U+205E
//   Arabic-script punctuation U+060C, U+060D, U+061B, U+061E, U+061F,
//     U+066A..U+066D, U+06D4 (Urdu full stop)
//   CJK punctuation U+3001..U+3003, U+3008..U+3011
//   Fullwidth forms U+FF01..U+FF0F, U+FF1A..U+FF20, U+FF3B..U+FF40, U+FF5B..U+FF65
bool is_punctuation(char32_t c);

}  // namespace capqe::utf8
