#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "tribrid/eval.hpp"

using namespace tribrid;

namespace {

void write_file(const char* path, const std::string& body) {
  std::ofstream os(path);
  os << body;
}

const RuleSet& ruleset() {
  static RuleSet rs = load_ruleset(TRIBRID_TEMPLATES_PATH, TRIBRID_VERBS_PATH);
  return rs;
}

ExamplePair pair(std::string id, Label label) {
  ExamplePair p;
  p.id = std::move(id);
  p.label = label;
  return p;
}

Signals make_signals(double lpos, double lneg, double dp, double dnp, bool neg = true) {
  Signals s;
  s.lpos = lpos;
  s.lneg = lneg;
  s.dist_p = dp;
  s.dist_np = dnp;
  s.has_negation = neg;
  return s;
}

}  // namespace

TEST_CASE("split and label name round trips") {
  for (Split s : {Split::Train, Split::Dev, Split::Test}) CHECK(parse_split(split_name(s)) == s);
  for (Label l : {Label::Support, Label::Oppose}) CHECK(parse_label(label_name(l)) == l);
  CHECK_THROWS(parse_split("validation"));
  CHECK_THROWS(parse_label("neutral"));
}

TEST_CASE("load_dataset parses well-formed lines") {
  const char* path = "ds_ok.jsonl";
  write_file(path,
             R"({"id":"a","claim":"Zoos are cruel","perspective":"Zoos are cruel indeed","label":"support","split":"train"})"
             "\n\n"
             R"({"id":"b","claim":"Zoos are cruel","perspective":"Zoos are kind","label":"oppose","split":"test"})"
             "\n");
  auto data = load_dataset(path);
  std::remove(path);
  REQUIRE(data.size() == 2);
  CHECK(data[0].id == "a");
  CHECK(data[0].label == Label::Support);
  CHECK(data[0].split == Split::Train);
  CHECK(data[1].claim == "Zoos are cruel");
  CHECK(data[1].split == Split::Test);
}

TEST_CASE("load_dataset reports the offending line") {
  const char* path = "ds_bad.jsonl";
  auto expect_contains = [&](const std::string& body, const std::string& needle) {
    write_file(path, body);
    try {
      load_dataset(path);
      FAIL("expected a parse failure");
    } catch (const std::exception& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
    std::remove(path);
  };
  std::string good =
      R"({"id":"a","claim":"c","perspective":"p","label":"support","split":"train"})";
  expect_contains(good + "\nnot json\n", ":2: bad JSON");
  expect_contains(good + "\n" + R"({"id":"b","claim":"c","label":"support","split":"train"})" + "\n",
                  ":2:");
  expect_contains(good + "\n" + good + "\n", "duplicate id 'a'");
  expect_contains(R"({"id":"a","claim":"c","perspective":"p","label":"maybe","split":"train"})",
                  "unknown label");
  CHECK_THROWS(load_dataset("does_not_exist.jsonl"));
}

TEST_CASE("save/load dataset round trip") {
  std::vector<ExamplePair> data;
  for (int i = 0; i < 6; ++i) {
    ExamplePair p;
    p.id = "r" + std::to_string(i);
    p.claim = "Tolls are \"fair\"";
    p.perspective = "Tolls remain fair";
    p.label = i % 2 ? Label::Oppose : Label::Support;
    p.split = i < 3 ? Split::Train : Split::Dev;
    data.push_back(p);
  }
  const char* path = "ds_rt.jsonl";
  save_dataset(data, path);
  auto back = load_dataset(path);
  std::remove(path);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].id == data[i].id);
    CHECK(back[i].claim == data[i].claim);
    CHECK(back[i].perspective == data[i].perspective);
    CHECK(back[i].label == data[i].label);
    CHECK(back[i].split == data[i].split);
  }
}

TEST_CASE("filter_split") {
  std::vector<ExamplePair> data(5);
  data[0].split = data[2].split = Split::Train;
  data[1].split = Split::Dev;
  data[3].split = data[4].split = Split::Test;
  CHECK(filter_split(data, Split::Train).size() == 2);
  CHECK(filter_split(data, Split::Dev).size() == 1);
  CHECK(filter_split(data, Split::Test).size() == 2);
}

TEST_CASE("to_train_examples attaches negations when a rule fires") {
  std::vector<ExamplePair> pairs(2);
  pairs[0].id = "x";
  pairs[0].claim = "Tolls are fair";
  pairs[0].perspective = "Tolls are fair";
  pairs[1].id = "y";
  pairs[1].claim = "Tolls are fair";
  pairs[1].perspective = "an obviously fair policy overall";
  auto ex = to_train_examples(pairs, &ruleset());
  REQUIRE(ex.size() == 2);
  REQUIRE(ex[0].triple.negated_perspective.has_value());
  CHECK(*ex[0].triple.negated_perspective == "Tolls are not fair");
  CHECK_FALSE(ex[1].triple.negated_perspective.has_value());

  auto bare = to_train_examples(pairs, nullptr);
  CHECK_FALSE(bare[0].triple.negated_perspective.has_value());
}

TEST_CASE("compute_metrics hand counts") {
  std::vector<ExamplePair> gold{pair("1", Label::Support), pair("2", Label::Support),
                                pair("3", Label::Support), pair("4", Label::Oppose),
                                pair("5", Label::Oppose),  pair("6", Label::Oppose)};
  std::map<std::string, Stance> preds{{"1", Stance::Support}, {"2", Stance::Support},
                                      {"3", Stance::Oppose},  {"4", Stance::Support},
                                      {"5", Stance::Oppose},  {"6", Stance::Abstain}};
  auto r = compute_metrics(preds, gold);
  CHECK(r.tp == 2);
  CHECK(r.fn == 1);
  CHECK(r.fp == 1);
  CHECK(r.tn == 1);
  CHECK(r.abstained == 1);
  CHECK(r.coverage == doctest::Approx(5.0 / 6.0));
  CHECK(r.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));

  // swapping the positive class mirrors the confusion matrix
  auto o = compute_metrics(preds, gold, Stance::Oppose);
  CHECK(o.tp == 1);
  CHECK(o.fp == 1);
  CHECK(o.fn == 1);
  CHECK(o.tn == 2);
}

TEST_CASE("compute_metrics validation") {
  std::vector<ExamplePair> gold{pair("1", Label::Support)};
  std::map<std::string, Stance> preds{{"1", Stance::Support}};
  CHECK_THROWS_AS(compute_metrics(preds, gold, Stance::Abstain), std::invalid_argument);
  std::map<std::string, Stance> wrong_id{{"9", Stance::Support}};
  CHECK_THROWS_AS(compute_metrics(wrong_id, gold), std::runtime_error);
  std::map<std::string, Stance> empty;
  CHECK_THROWS_AS(compute_metrics(empty, gold), std::runtime_error);
}

TEST_CASE("format_metrics layout") {
  MetricsReport r;
  r.f1 = 0.8135;
  r.precision = 0.81;
  r.recall = 0.8171;
  CHECK(format_metrics(r) == "81.35 (81.00, 81.71)");
  MetricsReport zero;
  CHECK(format_metrics(zero) == "0.00 (0.00, 0.00)");
}

TEST_CASE("score_dataset carries ids, labels, and negation flags") {
  std::vector<ExamplePair> pairs(2);
  pairs[0].id = "x";
  pairs[0].claim = "Tolls are fair";
  pairs[0].perspective = "Tolls are fair";
  pairs[0].label = Label::Support;
  pairs[1].id = "y";
  pairs[1].claim = "Tolls are fair";
  pairs[1].perspective = "an obviously fair policy overall";
  pairs[1].label = Label::Oppose;
  auto params = init_params(256, 8, 2);
  auto scored = score_dataset(params, pairs, &ruleset());
  REQUIRE(scored.size() == 2);
  CHECK(scored[0].id == "x");
  CHECK(scored[0].gold == Label::Support);
  CHECK(scored[0].signals.has_negation);
  CHECK_FALSE(scored[1].signals.has_negation);
}

TEST_CASE("sweep_filter coverage falls as the filter tightens") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ScoredExample> scored;
  for (int i = 0; i < 200; ++i) {
    bool sup = i % 2 == 0;
    double conf = u(rng) * 3;
    auto s = sup ? make_signals(conf, 0, 1, 1 + conf) : make_signals(0, conf, 1 + conf, 1);
    scored.push_back({"s" + std::to_string(i), sup ? Label::Support : Label::Oppose, s});
  }
  for (ThresholdFamily fam : {ThresholdFamily::Logit, ThresholdFamily::Distance}) {
    auto rep = sweep_filter(scored, scored, fam, {0.1, 0.2, 0.3, 0.4, 0.5});
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.method == (fam == ThresholdFamily::Logit ? "log" : "dist"));
    double prev_cov = 1.1, prev_tau = -1;
    for (const auto& row : rep.rows) {
      CHECK(row.metrics.coverage <= prev_cov);
      CHECK(row.metrics.coverage <= 1.0 - row.filtered_percentage + 1e-12);
      CHECK(row.tau >= prev_tau);
      prev_cov = row.metrics.coverage;
      prev_tau = row.tau;
    }
  }
}

TEST_CASE("sweep_filter validates the percentage grid") {
  std::vector<ScoredExample> scored{{"a", Label::Support, make_signals(1, 0, 1, 2)}};
  CHECK_THROWS_AS(sweep_filter(scored, scored, ThresholdFamily::Logit, {0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep_filter(scored, scored, ThresholdFamily::Logit, {0.3, 0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep_filter(scored, scored, ThresholdFamily::Logit, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("agreement_analysis keeps only agreeing rows with negations") {
  std::vector<ScoredExample> scored{
      {"a", Label::Support, make_signals(2, 0, 1, 3)},          // agree support, correct
      {"b", Label::Oppose, make_signals(0, 2, 3, 1)},           // agree oppose, correct
      {"c", Label::Support, make_signals(2, 0, 3, 1)},          // families disagree -> abstain
      {"d", Label::Oppose, make_signals(0, 2, 3, 1, false)},    // excluded: no negation
  };
  auto r = agreement_analysis(scored);
  CHECK(r.tp == 1);
  CHECK(r.tn == 1);
  CHECK(r.abstained == 1);
  CHECK(r.coverage == doctest::Approx(2.0 / 3.0));  // of the 3 rows with negations
  CHECK(r.f1 == doctest::Approx(1.0));
}

TEST_CASE("flipped_cases reports all three negators") {
  std::vector<ExamplePair> pairs;
  for (int i = 0; i < 10; ++i) {
    ExamplePair p;
    p.id = "f" + std::to_string(i);
    p.claim = "Curfews are unfair";
    p.perspective = i % 2 ? "Curfews are unfair indeed" : "an unfair idea overall";
    p.label = i % 2 ? Label::Support : Label::Oppose;
    pairs.push_back(p);
  }
  auto params = init_params(256, 8, 4);
  auto rep = flipped_cases(params, ruleset(), pairs);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].negator == "templates");
  CHECK(rep.rows[1].negator == "appsuff");
  CHECK(rep.rows[2].negator == "delnot");
  // templates negate only the "are" sentences; appsuff negates everything;
  // delnot needs a "not" and finds none
  CHECK(rep.rows[0].negatable == 5);
  CHECK(rep.rows[0].coverage == doctest::Approx(0.5));
  CHECK(rep.rows[1].negatable == 10);
  CHECK(rep.rows[2].negatable == 0);
  for (const auto& row : rep.rows) {
    CHECK(row.flipped <= row.negatable);
    CHECK(row.f1_flipped >= 0);
    CHECK(row.f1_flipped <= 1);
  }
}

TEST_CASE("synthetic benchmark shape and determinism") {
  SyntheticConfig cfg;
  auto data = generate_synthetic(cfg);
  REQUIRE(static_cast<int>(data.size()) == cfg.size);
  CHECK(filter_split(data, Split::Train).size() == 1400);
  CHECK(filter_split(data, Split::Dev).size() == 300);
  CHECK(filter_split(data, Split::Test).size() == 300);

  std::set<std::string> ids;
  long support = 0;
  for (const auto& p : data) {
    ids.insert(p.id);
    if (p.label == Label::Support) ++support;
    CHECK(p.claim.find(" are ") != std::string::npos);
    CHECK_FALSE(p.perspective.empty());
  }
  CHECK(ids.size() == data.size());
  CHECK(support > cfg.size / 3);
  CHECK(support < 2 * cfg.size / 3);

  auto again = generate_synthetic(cfg);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(data[i].perspective == again[i].perspective);
    CHECK(data[i].label == again[i].label);
  }

  SyntheticConfig other;
  other.seed = 8;
  auto different = generate_synthetic(other);
  bool any_diff = false;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].perspective != different[i].perspective) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("most synthetic perspectives are negatable by the templates") {
  auto data = generate_synthetic(SyntheticConfig{});
  std::vector<std::string> corpus;
  for (const auto& p : data) corpus.push_back(p.perspective);
  auto rep = coverage(ruleset(), corpus);
  CHECK(rep.total == 2000);
  CHECK(rep.rate > 0.85);
  CHECK(rep.rate < 1.0);  // the "policy overall" variant has no anchor
}
