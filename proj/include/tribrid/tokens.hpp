#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tribrid {

// A surface token plus its lowercase form used for matching and hashing.
struct Token {
  std::string text;   // original spelling (case preserved)
  std::string lower;  // lowercased, curly apostrophes normalized
};

// Splits on whitespace, detaches terminal punctuation into its own token and
// separates "n't" from its host ("aren't" -> are + n't, "can't" -> can + n't).
std::vector<Token> tokenize(std::string_view text);

// Lowercase forms only, as consumed by the encoder.
std::vector<std::string> tokenize_lower(std::string_view text);

// Inverse of tokenize up to spacing: punctuation and "n't" reattach without a
// leading space.
std::string detokenize(const std::vector<Token>& tokens);

bool is_punctuation(std::string_view tok);

}  // namespace tribrid
