#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tribrid/tokens.hpp"

namespace tribrid {

// Raised on a malformed rule file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// One premise element: a literal, an alternation of word forms, a variable
// slot, or the verb wildcard.
struct PatternElement {
  enum class Kind { Literal, Alternation, VarX, VarY, Verb };
  Kind kind;
  std::vector<std::string> alternatives;  // Literal: one entry; Alternation: 2+
};

// One rewrite element.  Selector pairs an alternation with a premise group:
// "$1:don't/doesn't" emits the alternative at the index group 1 matched.
struct RewriteElement {
  enum class Kind { Literal, VarX, VarY, BackRef, Selector };
  Kind kind;
  std::string literal;
  int group = 0;                          // BackRef / Selector: 1-based group
  std::vector<std::string> alternatives;  // Selector only
};

struct Template {
  std::vector<PatternElement> premise;
  std::vector<RewriteElement> rewrite;
  int index = 0;  // position in the rule file (0-based, after promotion)
  std::string source_line;
};

struct RuleSet {
  std::vector<Template> rules;
  std::unordered_set<std::string> verb_lexicon;

  bool is_verb(const std::string& lower) const;
};

struct NegationResult {
  std::string negated_text;
  int rule_index = 0;
  int anchor_begin = 0;  // token interval of the matched anchor
  int anchor_end = 0;
};

// Parses the template DSL.  One rule per non-comment line, file order kept
// except the not/n't-deletion rule which is promoted to position 0.
RuleSet parse_ruleset(std::string_view source, const std::vector<std::string>& verb_lexicon);
RuleSet load_ruleset(const std::string& rules_path, const std::string& verbs_path);

std::optional<NegationResult> apply_template(const Template& t, const RuleSet& rs,
                                             const std::vector<Token>& sentence);

// First matching rule wins.
std::optional<NegationResult> negate(const RuleSet& rs, std::string_view sentence);

// Literature baselines.
struct AppSuffResult {
  std::string text;
  bool degenerate = false;  // empty input
};
AppSuffResult negate_appsuff(std::string_view sentence);
std::optional<std::string> negate_delnot(std::string_view sentence);

struct CoverageReport {
  long covered = 0;
  long total = 0;
  double rate = 0.0;
  bool empty_corpus = false;
};

CoverageReport coverage(const RuleSet& rs, const std::vector<std::string>& corpus);

}  // namespace tribrid
