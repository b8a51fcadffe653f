#include "tribrid/negation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace tribrid {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

PatternElement parse_premise_element(const std::string& tok, int line) {
  if (tok == "[X]") return {PatternElement::Kind::VarX, {}};
  if (tok == "[Y]") return {PatternElement::Kind::VarY, {}};
  if (tok == "<VERB>") return {PatternElement::Kind::Verb, {}};
  if (tok.find('/') != std::string::npos) {
    auto alts = split(tok, '/');
    for (const auto& a : alts)
      if (a.empty()) throw ParseError(line, "empty alternative in '" + tok + "'");
    return {PatternElement::Kind::Alternation, std::move(alts)};
  }
  return {PatternElement::Kind::Literal, {tok}};
}

RewriteElement parse_rewrite_element(const std::string& tok, int line) {
  RewriteElement e;
  if (tok == "[X]") {
    e.kind = RewriteElement::Kind::VarX;
    return e;
  }
  if (tok == "[Y]") {
    e.kind = RewriteElement::Kind::VarY;
    return e;
  }
  if (tok.size() > 1 && tok[0] == '$') {
    size_t pos = 1;
    while (pos < tok.size() && std::isdigit(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos == 1) throw ParseError(line, "bad back-reference '" + tok + "'");
    e.group = std::stoi(tok.substr(1, pos - 1));
    if (pos == tok.size()) {
      e.kind = RewriteElement::Kind::BackRef;
      return e;
    }
    if (tok[pos] != ':') throw ParseError(line, "bad back-reference '" + tok + "'");
    e.kind = RewriteElement::Kind::Selector;
    e.alternatives = split(tok.substr(pos + 1), '/');
    for (const auto& a : e.alternatives)
      if (a.empty()) throw ParseError(line, "empty alternative in '" + tok + "'");
    return e;
  }
  e.kind = RewriteElement::Kind::Literal;
  e.literal = tok;
  return e;
}

Template parse_rule_line(const std::string& line_text, int line) {
  auto arrow = line_text.find("=>");
  if (arrow == std::string::npos) throw ParseError(line, "missing '=>'");

  std::istringstream lhs(line_text.substr(0, arrow));
  std::istringstream rhs(line_text.substr(arrow + 2));
  Template t;
  t.source_line = line_text;
  std::string tok;
  while (lhs >> tok) t.premise.push_back(parse_premise_element(tok, line));
  while (rhs >> tok) t.rewrite.push_back(parse_rewrite_element(tok, line));

  // [X] must open and [Y] must close the premise; everything between is the anchor.
  int anchors = 0, groups = 0;
  for (size_t i = 0; i < t.premise.size(); ++i) {
    const auto& e = t.premise[i];
    if (e.kind == PatternElement::Kind::VarX && i != 0)
      throw ParseError(line, "[X] must be the first premise element");
    if (e.kind == PatternElement::Kind::VarY && i + 1 != t.premise.size())
      throw ParseError(line, "[Y] must be the last premise element");
    if (e.kind != PatternElement::Kind::VarX && e.kind != PatternElement::Kind::VarY) ++anchors;
    if (e.kind == PatternElement::Kind::Alternation || e.kind == PatternElement::Kind::Verb)
      ++groups;
  }
  if (t.premise.empty() || t.premise.front().kind != PatternElement::Kind::VarX ||
      t.premise.back().kind != PatternElement::Kind::VarY)
    throw ParseError(line, "premise must be of the form '[X] ... [Y]'");
  if (anchors == 0) throw ParseError(line, "premise needs at least one anchor element");
  if (t.rewrite.empty()) throw ParseError(line, "empty rewrite");

  for (const auto& e : t.rewrite) {
    if (e.kind == RewriteElement::Kind::BackRef || e.kind == RewriteElement::Kind::Selector) {
      if (e.group < 1 || e.group > groups)
        throw ParseError(line, "back-reference $" + std::to_string(e.group) +
                                   " does not resolve to a premise group");
      if (e.kind == RewriteElement::Kind::Selector) {
        // Selector arity must match the referenced alternation.
        int g = 0;
        for (const auto& p : t.premise) {
          if (p.kind == PatternElement::Kind::Alternation || p.kind == PatternElement::Kind::Verb)
            ++g;
          if (g == e.group) {
            if (p.kind != PatternElement::Kind::Alternation ||
                p.alternatives.size() != e.alternatives.size())
              throw ParseError(line, "selector arity mismatch for $" + std::to_string(e.group));
            break;
          }
        }
      }
    }
  }
  return t;
}

// The promoted rule: anchor is a single alternation covering exactly {not, n't}.
bool is_not_deletion_rule(const Template& t) {
  if (t.premise.size() != 3) return false;
  const auto& a = t.premise[1];
  if (a.kind != PatternElement::Kind::Alternation || a.alternatives.size() != 2) return false;
  bool has_not = false, has_nt = false;
  for (const auto& alt : a.alternatives) {
    if (alt == "not") has_not = true;
    if (alt == "n't") has_nt = true;
  }
  return has_not && has_nt;
}

struct Match {
  int begin = 0;
  int end = 0;                       // anchor token interval [begin, end)
  std::vector<Token> group_tokens;   // matched token per group, 1-based at idx-1
  std::vector<int> group_alt;        // matched alternative index per group
};

bool element_matches(const PatternElement& e, const Token& tok, const RuleSet& rs, int* alt_idx) {
  switch (e.kind) {
    case PatternElement::Kind::Literal:
      *alt_idx = 0;
      return tok.lower == e.alternatives[0];
    case PatternElement::Kind::Alternation:
      for (size_t i = 0; i < e.alternatives.size(); ++i)
        if (tok.lower == e.alternatives[i]) {
          *alt_idx = static_cast<int>(i);
          return true;
        }
      return false;
    case PatternElement::Kind::Verb:
      *alt_idx = 0;
      return rs.is_verb(tok.lower);
    default:
      return false;
  }
}

std::optional<Match> match_at(const Template& t, const RuleSet& rs,
                              const std::vector<Token>& toks, int start) {
  Match m;
  m.begin = start;
  int pos = start;
  for (const auto& e : t.premise) {
    if (e.kind == PatternElement::Kind::VarX || e.kind == PatternElement::Kind::VarY) continue;
    if (pos >= static_cast<int>(toks.size())) return std::nullopt;
    int alt = 0;
    if (!element_matches(e, toks[pos], rs, &alt)) return std::nullopt;
    if (e.kind != PatternElement::Kind::Literal) {
      m.group_tokens.push_back(toks[pos]);
      m.group_alt.push_back(alt);
    }
    ++pos;
  }
  m.end = pos;
  return m;
}

bool has_verb_element(const Template& t) {
  return std::any_of(t.premise.begin(), t.premise.end(), [](const PatternElement& e) {
    return e.kind == PatternElement::Kind::Verb;
  });
}

// Offset of the verb element inside the anchor, or -1.
int verb_offset(const Template& t) {
  int off = 0;
  for (const auto& e : t.premise) {
    if (e.kind == PatternElement::Kind::VarX || e.kind == PatternElement::Kind::VarY) continue;
    if (e.kind == PatternElement::Kind::Verb) return off;
    ++off;
  }
  return -1;
}

}  // namespace

bool RuleSet::is_verb(const std::string& lower) const {
  if (verb_lexicon.count(lower)) return true;
  // Inflection heuristic over the lexicon base forms.
  auto in = [&](const std::string& s) { return verb_lexicon.count(s) > 0; };
  size_t n = lower.size();
  if (n > 4 && lower.ends_with("ing")) {
    std::string base = lower.substr(0, n - 3);
    if (in(base) || in(base + "e")) return true;
    if (base.size() > 1 && base[base.size() - 1] == base[base.size() - 2] &&
        in(base.substr(0, base.size() - 1)))
      return true;
  }
  if (n > 3 && lower.ends_with("ed")) {
    std::string base = lower.substr(0, n - 2);
    if (in(base) || in(base + "e")) return true;
    if (base.size() > 1 && base[base.size() - 1] == base[base.size() - 2] &&
        in(base.substr(0, base.size() - 1)))
      return true;
  }
  if (n > 2 && lower.ends_with("es") && in(lower.substr(0, n - 2))) return true;
  if (n > 1 && lower.ends_with("s") && in(lower.substr(0, n - 1))) return true;
  return false;
}

RuleSet parse_ruleset(std::string_view source, const std::vector<std::string>& verb_lexicon) {
  RuleSet rs;
  for (const auto& v : verb_lexicon) rs.verb_lexicon.insert(v);

  std::istringstream in{std::string(source)};
  std::string line_text;
  int line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    auto first = line_text.find_first_not_of(" \t\r");
    if (first == std::string::npos || line_text[first] == '#') continue;
    rs.rules.push_back(parse_rule_line(line_text, line));
  }

  auto it = std::find_if(rs.rules.begin(), rs.rules.end(), is_not_deletion_rule);
  if (it != rs.rules.end() && it != rs.rules.begin())
    std::rotate(rs.rules.begin(), it, it + 1);
  for (size_t i = 0; i < rs.rules.size(); ++i) rs.rules[i].index = static_cast<int>(i);
  return rs;
}

RuleSet load_ruleset(const std::string& rules_path, const std::string& verbs_path) {
  std::ifstream rf(rules_path);
  if (!rf) throw std::runtime_error("cannot open rule file: " + rules_path);
  std::stringstream rbuf;
  rbuf << rf.rdbuf();

  std::vector<std::string> verbs;
  std::ifstream vf(verbs_path);
  if (!vf) throw std::runtime_error("cannot open verb lexicon: " + verbs_path);
  std::string line;
  while (std::getline(vf, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    verbs.push_back(line.substr(first, last - first + 1));
  }
  return parse_ruleset(rbuf.str(), verbs);
}

std::optional<NegationResult> apply_template(const Template& t, const RuleSet& rs,
                                             const std::vector<Token>& sentence) {
  int n = static_cast<int>(sentence.size());
  std::optional<Match> m;

  if (has_verb_element(t)) {
    // Prefer the leftmost verb right after "to" (infinitives), then any verb.
    int voff = verb_offset(t);
    for (int s = 0; s <= n && !m; ++s) {
      auto cand = match_at(t, rs, sentence, s);
      if (cand && s + voff > 0 && sentence[s + voff - 1].lower == "to") m = cand;
    }
  }
  for (int s = 0; s <= n && !m; ++s) m = match_at(t, rs, sentence, s);
  if (!m) return std::nullopt;

  std::vector<Token> out;
  for (const auto& e : t.rewrite) {
    switch (e.kind) {
      case RewriteElement::Kind::VarX:
        out.insert(out.end(), sentence.begin(), sentence.begin() + m->begin);
        break;
      case RewriteElement::Kind::VarY:
        out.insert(out.end(), sentence.begin() + m->end, sentence.end());
        break;
      case RewriteElement::Kind::Literal:
        out.push_back({e.literal, e.literal});
        break;
      case RewriteElement::Kind::BackRef:
        out.push_back(m->group_tokens[e.group - 1]);
        break;
      case RewriteElement::Kind::Selector: {
        const auto& alt = e.alternatives[m->group_alt[e.group - 1]];
        out.push_back({alt, alt});
        break;
      }
    }
  }

  NegationResult r{detokenize(out), t.index, m->begin, m->end};
  if (r.negated_text == detokenize(sentence)) return std::nullopt;
  return r;
}

std::optional<NegationResult> negate(const RuleSet& rs, std::string_view sentence) {
  auto toks = tokenize(sentence);
  if (toks.empty()) return std::nullopt;
  for (const auto& t : rs.rules) {
    if (auto r = apply_template(t, rs, toks)) return r;
  }
  return std::nullopt;
}

AppSuffResult negate_appsuff(std::string_view sentence) {
  AppSuffResult r;
  r.text = std::string(sentence) + " but this is not true";
  r.degenerate = sentence.empty();
  return r;
}

std::optional<std::string> negate_delnot(std::string_view sentence) {
  auto toks = tokenize(sentence);
  for (size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].lower == "not" || toks[i].lower == "n't") {
      toks.erase(toks.begin() + static_cast<long>(i));
      return detokenize(toks);
    }
  }
  return std::nullopt;
}

CoverageReport coverage(const RuleSet& rs, const std::vector<std::string>& corpus) {
  CoverageReport rep;
  rep.total = static_cast<long>(corpus.size());
  if (corpus.empty()) {
    rep.empty_corpus = true;
    return rep;
  }
  for (const auto& s : corpus)
    if (negate(rs, s)) ++rep.covered;
  rep.rate = static_cast<double>(rep.covered) / static_cast<double>(rep.total);
  return rep;
}

}  // namespace tribrid
