#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace clinigym::text {

/// Split into lowercase word tokens. Token characters are ASCII
/// alphanumerics and non-ASCII codepoints; everything else separates.
/// Common Latin diacritics are folded to their ASCII base letter.
std::vector<std::string> word_tokens(std::string_view input);

/// Porter (1980) stemmer. Applied to lowercase, pure-alphabetic tokens;
/// other tokens are returned unchanged.
std::string porter_stem(std::string_view word);

/// word_tokens followed by porter_stem on each token. This is the index
/// tokenizer for the knowledge store and the term basis for soft accuracy.
std::vector<std::string> stem_tokens(std::string_view input);

/// Whitespace-plus-punctuation token count used for response-length
/// accounting when no tokenizing policy supplied a count.
std::size_t approx_token_count(std::string_view input);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Answer normalization for exact-match accuracy: trim, casefold, strip
/// trailing punctuation; a leading option letter followed only by
/// punctuation ("b)", "C.") collapses to the bare letter.
std::string normalize_answer(std::string_view answer);

}  // namespace clinigym::text
