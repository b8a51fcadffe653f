#include "tribrid/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tribrid {

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw std::runtime_error("unknown split: '" + s + "'");
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

Label parse_label(const std::string& s) {
  if (s == "support") return Label::Support;
  if (s == "oppose") return Label::Oppose;
  throw std::runtime_error("unknown label: '" + s + "'");
}

std::string label_name(Label l) { return l == Label::Support ? "support" : "oppose"; }

std::vector<ExamplePair> load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<ExamplePair> out;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    try {
      ExamplePair p;
      p.id = j.at("id").get<std::string>();
      p.claim = j.at("claim").get<std::string>();
      p.perspective = j.at("perspective").get<std::string>();
      p.label = parse_label(j.at("label").get<std::string>());
      p.split = parse_split(j.at("split").get<std::string>());
      if (!seen.insert(p.id).second)
        throw std::runtime_error("duplicate id '" + p.id + "'");
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_dataset(const std::vector<ExamplePair>& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& p : data) {
    nlohmann::json j{{"id", p.id},
                     {"claim", p.claim},
                     {"perspective", p.perspective},
                     {"label", label_name(p.label)},
                     {"split", split_name(p.split)}};
    os << j.dump() << "\n";
  }
}

std::vector<ExamplePair> filter_split(const std::vector<ExamplePair>& data, Split split) {
  std::vector<ExamplePair> out;
  for (const auto& p : data)
    if (p.split == split) out.push_back(p);
  return out;
}

std::vector<TrainExample> to_train_examples(const std::vector<ExamplePair>& pairs,
                                            const RuleSet* rs) {
  std::vector<TrainExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    TrainExample e;
    e.triple.id = p.id;
    e.triple.claim = p.claim;
    e.triple.perspective = p.perspective;
    if (rs) {
      if (auto neg = negate(*rs, p.perspective)) e.triple.negated_perspective = neg->negated_text;
    }
    e.label = p.label;
    out.push_back(std::move(e));
  }
  return out;
}

MetricsReport compute_metrics(const std::map<std::string, Stance>& predictions,
                              const std::vector<ExamplePair>& gold, Stance positive) {
  if (positive == Stance::Abstain)
    throw std::invalid_argument("compute_metrics: positive class cannot be Abstain");
  if (predictions.size() != gold.size())
    throw std::runtime_error("compute_metrics: prediction/gold id mismatch");

  MetricsReport r;
  for (const auto& g : gold) {
    auto it = predictions.find(g.id);
    if (it == predictions.end())
      throw std::runtime_error("compute_metrics: no prediction for id '" + g.id + "'");
    Stance pred = it->second;
    if (pred == Stance::Abstain) {
      ++r.abstained;
      continue;
    }
    bool pred_pos = pred == positive;
    bool gold_pos = (g.label == Label::Support) == (positive == Stance::Support);
    if (pred_pos && gold_pos) ++r.tp;
    else if (pred_pos && !gold_pos) ++r.fp;
    else if (!pred_pos && gold_pos) ++r.fn;
    else ++r.tn;
  }
  long m = static_cast<long>(gold.size());
  r.coverage = m == 0 ? 0.0 : static_cast<double>(m - r.abstained) / static_cast<double>(m);
  r.precision = (r.tp + r.fp) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::string format_metrics(const MetricsReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f, %.2f)", r.f1 * 100, r.precision * 100,
                r.recall * 100);
  return buf;
}

std::vector<ScoredExample> score_dataset(const EncoderParams& params,
                                         const std::vector<ExamplePair>& pairs, const RuleSet* rs) {
  std::vector<ScoredExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    InputTriple t;
    t.id = p.id;
    t.claim = p.claim;
    t.perspective = p.perspective;
    if (rs) {
      if (auto neg = negate(*rs, p.perspective)) t.negated_perspective = neg->negated_text;
    }
    out.push_back({p.id, p.label, forward(params, t)});
  }
  return out;
}

namespace {

double decision_gap(const ScoredExample& s, ThresholdFamily family) {
  return family == ThresholdFamily::Logit ? std::fabs(s.signals.lpos - s.signals.lneg)
                                          : std::fabs(s.signals.dist_p - s.signals.dist_np);
}

StanceDecision decide(const Signals& s, ThresholdFamily family, double tau) {
  return family == ThresholdFamily::Logit ? class_log(s, tau) : class_dist(s, tau);
}

MetricsReport metrics_on_scored(const std::vector<ScoredExample>& scored,
                                const std::map<std::string, Stance>& preds) {
  std::vector<ExamplePair> gold;
  gold.reserve(scored.size());
  for (const auto& s : scored) {
    ExamplePair g;
    g.id = s.id;
    g.label = s.gold;
    gold.push_back(std::move(g));
  }
  return compute_metrics(preds, gold);
}

}  // namespace

SweepReport sweep_filter(const std::vector<ScoredExample>& eval_set,
                         const std::vector<ScoredExample>& calibration, ThresholdFamily family,
                         const std::vector<double>& percentages) {
  SweepReport rep;
  rep.method = family == ThresholdFamily::Logit ? "log" : "dist";

  std::vector<double> gaps;
  for (const auto& s : calibration) {
    if (family == ThresholdFamily::Distance && !s.signals.has_negation) continue;
    gaps.push_back(decision_gap(s, family));
  }

  double prev = -1;
  for (double x : percentages) {
    if (x <= 0 || x >= 1)
      throw std::invalid_argument("sweep_filter: percentage outside (0,1)");
    if (x <= prev) throw std::invalid_argument("sweep_filter: percentages must increase");
    prev = x;
    double tau = calibrate_tau(gaps, x);
    std::map<std::string, Stance> preds;
    for (const auto& s : eval_set) preds[s.id] = decide(s.signals, family, tau).value;
    rep.rows.push_back({x, tau, metrics_on_scored(eval_set, preds)});
  }
  return rep;
}

MetricsReport agreement_analysis(const std::vector<ScoredExample>& scored) {
  std::vector<ScoredExample> with_neg;
  for (const auto& s : scored)
    if (s.signals.has_negation) with_neg.push_back(s);
  std::map<std::string, Stance> preds;
  for (const auto& s : with_neg) {
    auto agree = signals_agree(s.signals);
    preds[s.id] = agree ? *agree : Stance::Abstain;
  }
  return metrics_on_scored(with_neg, preds);
}

FlipReport flipped_cases(const EncoderParams& params, const RuleSet& rs,
                         const std::vector<ExamplePair>& pairs) {
  FlipReport rep;
  struct Negator {
    std::string name;
    std::function<std::optional<std::string>(const std::string&)> fn;
  };
  std::vector<Negator> negators{
      {"templates",
       [&rs](const std::string& s) -> std::optional<std::string> {
         if (auto r = negate(rs, s)) return r->negated_text;
         return std::nullopt;
       }},
      {"appsuff",
       [](const std::string& s) -> std::optional<std::string> { return negate_appsuff(s).text; }},
      {"delnot", [](const std::string& s) { return negate_delnot(s); }},
  };

  for (const auto& ng : negators) {
    FlipRow row;
    row.negator = ng.name;
    std::vector<ScoredExample> flipped_subset;
    std::map<std::string, Stance> flipped_preds;
    for (const auto& p : pairs) {
      auto negated = ng.fn(p.perspective);
      if (!negated) continue;
      ++row.negatable;
      InputTriple orig{p.id, p.claim, p.perspective, std::nullopt};
      InputTriple swapped{p.id, p.claim, *negated, std::nullopt};
      Stance s1 = class_log(forward(params, orig), 0.0).value;
      Stance s2 = class_log(forward(params, swapped), 0.0).value;
      if (s1 != s2) {
        ++row.flipped;
        flipped_subset.push_back({p.id, p.label, {}});
        flipped_preds[p.id] = s1;
      }
    }
    row.coverage = pairs.empty() ? 0.0
                                 : static_cast<double>(row.negatable) /
                                       static_cast<double>(pairs.size());
    row.f1_flipped =
        flipped_subset.empty() ? 0.0 : metrics_on_scored(flipped_subset, flipped_preds).f1;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<ExamplePair> generate_synthetic(const SyntheticConfig& cfg) {
  static const std::vector<std::string> subjects{
      "Sanctions",  "Tariffs",   "Curfews",  "Subsidies", "Vouchers", "Quotas",
      "Mandates",   "Lotteries", "Casinos",  "Pipelines", "Drones",   "Billboards",
      "Paywalls",   "Bailouts",  "Scooters", "Megadams",  "Tollways", "Curricula",
      "Referendums", "Stipends"};
  static const std::vector<std::pair<std::string, std::string>> adjectives{
      {"effective", "useless"},    {"beneficial", "harmful"},   {"safe", "dangerous"},
      {"fair", "unfair"},          {"necessary", "pointless"},  {"affordable", "wasteful"},
      {"humane", "cruel"},         {"sustainable", "ruinous"},  {"sensible", "foolish"},
      {"trustworthy", "deceptive"}};

  // Filler phrases dilute the mean-pooled embedding, spreading decision
  // confidence across a continuum so threshold sweeps have something to filter.
  static const std::vector<std::string> fillers{"overall", "frankly",  "in theory",
                                                "these days", "for now", "at scale"};

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> subj_d(0, static_cast<int>(subjects.size()) - 1);
  std::uniform_int_distribution<int> adj_d(0, static_cast<int>(adjectives.size()) - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> filler_count(0, 4);
  std::uniform_int_distribution<int> filler_d(0, static_cast<int>(fillers.size()) - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<ExamplePair> out;
  out.reserve(cfg.size);
  for (int i = 0; i < cfg.size; ++i) {
    const auto& subj = subjects[subj_d(rng)];
    auto [pos, neg] = adjectives[adj_d(rng)];
    // The claim may assert either side; stance is relative to the claim.
    std::string claim_adj = coin(rng) ? pos : neg;
    std::string other_adj = claim_adj == pos ? neg : pos;
    bool support = coin(rng) == 1;
    const std::string& agree_adj = support ? claim_adj : other_adj;

    ExamplePair p;
    p.id = "synth-" + std::to_string(10000 + i).substr(1);
    p.claim = subj + " are " + claim_adj;

    double variant = u(rng);
    if (variant < 0.10) {
      // no template anchor: not negatable
      p.perspective = "an obviously " + agree_adj + " policy overall";
    } else if (variant < 0.16) {
      // hedged and uninformative: the adjective ignores the label entirely
      p.perspective = subj + " seem " + (coin(rng) ? claim_adj : other_adj);
    } else if (variant < 0.37) {
      p.perspective = subj + " are " + agree_adj + " indeed";
    } else if (variant < 0.58) {
      p.perspective = subj + " are clearly " + agree_adj;
    } else if (variant < 0.79) {
      p.perspective = subj + " remain " + agree_adj;
    } else if (!support) {
      p.perspective = subj + " are not " + claim_adj;
    } else {
      p.perspective = subj + " are truly " + agree_adj;
    }
    for (int f = filler_count(rng); f > 0; --f) p.perspective += " " + fillers[filler_d(rng)];
    if (coin(rng)) p.perspective += ".";
    p.label = support ? Label::Support : Label::Oppose;

    double frac = static_cast<double>(i) / cfg.size;
    p.split = frac < cfg.train_fraction             ? Split::Train
              : frac < cfg.train_fraction + cfg.dev_fraction ? Split::Dev
                                                             : Split::Test;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tribrid
