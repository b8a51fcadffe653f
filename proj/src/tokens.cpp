#include "tribrid/tokens.hpp"

#include <cctype>

namespace tribrid {

namespace {

const std::string_view kPunct = ".,!?;:\"()";

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    // UTF-8 right single quote U+2019 -> ASCII apostrophe
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
  }
  return out;
}

// Hosts whose n't contraction is irregular.
std::string expand_host(const std::string& lower_host) {
  if (lower_host == "ca") return "can";
  if (lower_host == "wo") return "will";
  if (lower_host == "sha") return "shall";
  return lower_host;
}

void push_chunk(std::vector<Token>& out, std::string_view chunk) {
  if (chunk.empty()) return;

  // Peel trailing punctuation, collecting the peeled tokens in reverse.
  std::vector<Token> tail;
  while (chunk.size() > 1 && kPunct.find(chunk.back()) != std::string_view::npos) {
    tail.push_back({std::string(1, chunk.back()), std::string(1, chunk.back())});
    chunk.remove_suffix(1);
  }

  std::string lower = to_lower(chunk);
  if (lower.size() > 3 && lower.ends_with("n't")) {
    std::string host = expand_host(lower.substr(0, lower.size() - 3));
    std::string host_text = host;
    if (std::isupper(static_cast<unsigned char>(chunk.front())))
      host_text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(host_text[0])));
    out.push_back({std::move(host_text), std::move(host)});
    out.push_back({"n't", "n't"});
  } else {
    out.push_back({std::string(chunk), std::move(lower)});
  }
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) out.push_back(std::move(*it));
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  size_t start = std::string_view::npos;
  for (size_t i = 0; i <= text.size(); ++i) {
    bool ws = i == text.size() || std::isspace(static_cast<unsigned char>(text[i]));
    if (!ws && start == std::string_view::npos) start = i;
    if (ws && start != std::string_view::npos) {
      push_chunk(out, text.substr(start, i - start));
      start = std::string_view::npos;
    }
  }
  return out;
}

std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.lower));
  return out;
}

bool is_punctuation(std::string_view tok) {
  if (tok.empty()) return false;
  for (char c : tok)
    if (kPunct.find(c) == std::string_view::npos) return false;
  return true;
}

std::string detokenize(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && !is_punctuation(t.text) && t.lower != "n't") out.push_back(' ');
    out += t.text;
  }
  return out;
}

}  // namespace tribrid
