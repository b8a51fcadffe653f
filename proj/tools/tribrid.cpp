#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tribrid/eval.hpp"
#include "tribrid/label_model.hpp"
#include "tribrid/negation.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tribrid;

namespace {

struct Options {
  std::string dataset;
  std::string templates = "templates/tribrid14.rules";
  std::string verbs = "data/verbs.txt";
  std::string checkpoint;
  std::string model;
  std::string predictions;
  std::string negator = "templates";
  std::string mode = "log";
  std::string split = "test";
  std::string out = "out";
  double tau = 0.0;
  std::optional<double> discard;
  std::vector<double> tau_bank_log;
  std::vector<double> tau_bank_dist;
  double margin = 1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool no_negation = false;
  int epochs = 30;
  double learning_rate = 0.1;
  int batch_size = 32;
  std::size_t hash_size = 1u << 16;
  int dim = 64;
};

std::uint64_t effective_seed(const Options& o) {
  if (o.seed_given) return o.seed;
  if (const char* env = std::getenv("TRIBRID_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

void write_manifest(const Options& o, const std::string& command,
                    const std::vector<std::string>& artifacts) {
  ordered_json j;
  j["command"] = command;
  j["seed"] = effective_seed(o);
  j["dataset"] = o.dataset;
  if (!o.templates.empty()) j["templates"] = o.templates;
  if (!o.checkpoint.empty()) j["checkpoint"] = o.checkpoint;
  j["mode"] = o.mode;
  j["split"] = o.split;
  j["tau"] = o.tau;
  if (o.discard) j["discard"] = *o.discard;
  if (!o.tau_bank_log.empty()) j["tau_bank_log"] = o.tau_bank_log;
  if (!o.tau_bank_dist.empty()) j["tau_bank_dist"] = o.tau_bank_dist;
  j["margin"] = o.margin;
  j["artifacts"] = artifacts;
  std::ofstream os(fs::path(o.out) / "manifest.json");
  os << j.dump(2) << "\n";
}

Split parse_split_flag(const std::string& s) { return parse_split(s); }

std::vector<ExamplePair> load_split(const Options& o, const std::string& which) {
  auto data = load_dataset(o.dataset);
  if (which == "all") return data;
  return filter_split(data, parse_split_flag(which));
}

RuleSet load_rules(const Options& o) { return load_ruleset(o.templates, o.verbs); }

void write_decisions(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<StanceDecision>& decisions, const std::string& family,
                     double tau) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write decisions: " + path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ordered_json j;
    j["id"] = ids[i];
    j["stance"] = stance_code(decisions[i].value);
    j["confidence"] = decisions[i].confidence;
    j["family"] = family;
    j["tau"] = tau;
    if (decisions[i].no_negation) j["no_negation"] = true;
    os << j.dump() << "\n";
  }
}

int cmd_negate(const Options& o) {
  auto pairs = load_split(o, "all");
  fs::create_directories(o.out);

  auto rs = load_rules(o);
  std::string out_path = (fs::path(o.out) / "negated.jsonl").string();
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot write: " + out_path);
  long covered = 0;
  for (const auto& p : pairs) {
    ordered_json j;
    j["id"] = p.id;
    j["perspective"] = p.perspective;
    std::optional<std::string> negated;
    if (o.negator == "templates") {
      if (auto r = negate(rs, p.perspective)) {
        negated = r->negated_text;
        j["rule"] = r->rule_index;
      }
    } else if (o.negator == "appsuff") {
      auto r = negate_appsuff(p.perspective);
      if (!r.degenerate) negated = r.text;
    } else if (o.negator == "delnot") {
      negated = negate_delnot(p.perspective);
    } else {
      throw std::runtime_error("unknown negator: " + o.negator);
    }
    j["negated"] = negated ? ordered_json(*negated) : ordered_json(nullptr);
    if (negated) ++covered;
    os << j.dump() << "\n";
  }
  double rate = pairs.empty() ? 0.0 : static_cast<double>(covered) / pairs.size();
  std::printf("coverage %.3f (%ld/%zu)\n", rate, covered, pairs.size());
  write_manifest(o, "negate", {"negated.jsonl"});
  return 0;
}

int cmd_train(const Options& o) {
  auto pairs = load_split(o, "train");
  fs::create_directories(o.out);

  std::optional<RuleSet> rs;
  if (!o.no_negation) rs = load_rules(o);
  auto examples = to_train_examples(pairs, rs ? &*rs : nullptr);

  TrainConfig cfg;
  cfg.learning_rate = o.learning_rate;
  cfg.batch_size = o.batch_size;
  cfg.epochs = o.epochs;
  cfg.margin = o.margin;
  cfg.seed = effective_seed(o);

  auto params = init_params(o.hash_size, o.dim, cfg.seed);
  auto res = train(params, examples, cfg);

  std::string ckpt = (fs::path(o.out) / "checkpoint.bin").string();
  save_checkpoint(res.params, ckpt);

  ordered_json hist = ordered_json::array();
  for (const auto& e : res.history)
    hist.push_back({{"l_ce", e.l_ce}, {"l_cos", e.l_cos}, {"l_tri", e.l_tri}, {"total", e.total}});
  std::ofstream hs(fs::path(o.out) / "history.json");
  hs << hist.dump(2) << "\n";

  write_manifest(o, "train", {"checkpoint.bin", "history.json"});
  std::fprintf(stderr, "trained %d epochs, final loss %.4f\n", o.epochs,
               res.history.back().total);
  return 0;
}

int cmd_predict(const Options& o) {
  auto pairs = load_split(o, o.split);
  fs::create_directories(o.out);
  auto params = load_checkpoint(o.checkpoint);
  auto rs = load_rules(o);
  auto scored = score_dataset(params, pairs, &rs);

  double tau = o.tau;
  if (o.discard) {
    auto dev = score_dataset(params, load_split(o, "dev"), &rs);
    std::vector<double> gaps;
    for (const auto& s : dev) {
      if (o.mode == "dist" && !s.signals.has_negation) continue;
      gaps.push_back(o.mode == "dist" ? std::fabs(s.signals.dist_p - s.signals.dist_np)
                                      : std::fabs(s.signals.lpos - s.signals.lneg));
    }
    tau = calibrate_tau(gaps, *o.discard);
    std::fprintf(stderr, "calibrated tau %.6f at discard %.2f\n", tau, *o.discard);
  }

  std::vector<std::string> ids;
  std::vector<StanceDecision> decisions;
  for (const auto& s : scored) ids.push_back(s.id);

  if (o.mode == "log") {
    for (const auto& s : scored) decisions.push_back(class_log(s.signals, tau));
  } else if (o.mode == "dist") {
    for (const auto& s : scored) decisions.push_back(class_dist(s.signals, tau));
  } else if (o.mode == "agree") {
    for (const auto& s : scored) {
      StanceDecision d;
      auto agreed = signals_agree(s.signals);
      d.value = agreed ? *agreed : Stance::Abstain;
      d.confidence = std::min(std::fabs(s.signals.lpos - s.signals.lneg),
                              std::fabs(s.signals.dist_p - s.signals.dist_np));
      d.no_negation = !s.signals.has_negation;
      decisions.push_back(d);
    }
  } else if (o.mode == "weak") {
    if (o.tau_bank_log.empty() && o.tau_bank_dist.empty())
      throw std::runtime_error("mode weak requires --tau-bank-log and/or --tau-bank-dist");
    auto train_set = score_dataset(params, load_split(o, "train"), &rs);
    std::vector<Signals> train_sig, eval_sig;
    for (const auto& s : train_set) train_sig.push_back(s.signals);
    for (const auto& s : scored) eval_sig.push_back(s.signals);
    auto preds = fit_predict_pipeline(train_sig, eval_sig, o.tau_bank_log, o.tau_bank_dist);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      StanceDecision d;
      d.value = preds[i].stance;
      d.confidence = preds[i].posterior_support;
      d.no_negation = !eval_sig[i].has_negation;
      decisions.push_back(d);
    }
  } else if (o.mode == "majority") {
    if (o.tau_bank_log.empty() && o.tau_bank_dist.empty())
      throw std::runtime_error("mode majority requires --tau-bank-log and/or --tau-bank-dist");
    std::vector<Signals> eval_sig;
    for (const auto& s : scored) eval_sig.push_back(s.signals);
    auto matrix = build_label_matrix(eval_sig, o.tau_bank_log, o.tau_bank_dist);
    for (int r = 0; r < matrix.rows; ++r) {
      std::vector<signed char> row(matrix.values.begin() + static_cast<std::size_t>(r) * matrix.cols,
                                   matrix.values.begin() +
                                       static_cast<std::size_t>(r + 1) * matrix.cols);
      StanceDecision d;
      d.value = majority_vote(row, class_log(eval_sig[r], 0.0).value);
      int sum = 0;
      for (auto v : row) sum += v;
      d.confidence = matrix.cols ? std::fabs(sum) / static_cast<double>(matrix.cols) : 0.0;
      d.no_negation = !eval_sig[r].has_negation;
      decisions.push_back(d);
    }
  } else {
    throw std::runtime_error("unknown mode: " + o.mode);
  }

  std::string path = (fs::path(o.out) / "decisions.jsonl").string();
  write_decisions(path, ids, decisions, o.mode, tau);
  write_manifest(o, "predict", {"decisions.jsonl"});
  return 0;
}

int cmd_evaluate(const Options& o) {
  auto pairs = load_split(o, o.split);
  fs::create_directories(o.out);

  std::ifstream is(o.predictions);
  if (!is) throw std::runtime_error("cannot open predictions: " + o.predictions);
  std::map<std::string, Stance> preds;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    std::string code = j.at("stance").get<std::string>();
    Stance s = code == "S" ? Stance::Support : code == "O" ? Stance::Oppose : Stance::Abstain;
    preds[j.at("id").get<std::string>()] = s;
  }

  auto r = compute_metrics(preds, pairs);
  ordered_json j;
  j["f1"] = r.f1;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["coverage"] = r.coverage;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["tn"] = r.tn;
  j["abstained"] = r.abstained;
  std::ofstream os(fs::path(o.out) / "metrics.json");
  os << j.dump(2) << "\n";

  std::printf("F1 %s coverage %.3f\n", format_metrics(r).c_str(), r.coverage);
  write_manifest(o, "evaluate", {"metrics.json"});
  return 0;
}

int cmd_sweep(const Options& o) {
  auto eval_pairs = load_split(o, o.split);
  fs::create_directories(o.out);
  auto params = load_checkpoint(o.checkpoint);
  auto rs = load_rules(o);
  auto scored = score_dataset(params, eval_pairs, &rs);
  auto calibration = score_dataset(params, load_split(o, "dev"), &rs);

  ThresholdFamily family = o.mode == "dist" ? ThresholdFamily::Distance : ThresholdFamily::Logit;
  std::vector<double> percentages;
  for (int x = 10; x <= 90; x += 10) percentages.push_back(x / 100.0);
  auto rep = sweep_filter(scored, calibration, family, percentages);

  std::string path = (fs::path(o.out) / "sweep.csv").string();
  std::ofstream os(path);
  os << "method,filtered_percentage,tau,f1,precision,recall,coverage\n";
  for (const auto& row : rep.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.0f%%,%.6f,%.4f,%.4f,%.4f,%.4f\n", rep.method.c_str(),
                  row.filtered_percentage * 100, row.tau, row.metrics.f1, row.metrics.precision,
                  row.metrics.recall, row.metrics.coverage);
    os << buf;
  }
  write_manifest(o, "sweep", {"sweep.csv"});
  return 0;
}

int cmd_flip(const Options& o) {
  auto pairs = load_split(o, o.split);
  fs::create_directories(o.out);
  auto params = load_checkpoint(o.checkpoint);
  auto rs = load_rules(o);
  auto rep = flipped_cases(params, rs, pairs);

  std::string path = (fs::path(o.out) / "flip.csv").string();
  std::ofstream os(path);
  os << "negator,coverage,negatable,flipped,f1_flipped\n";
  for (const auto& row : rep.rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%.3f,%ld,%ld,%.4f\n", row.negator.c_str(), row.coverage,
                  row.negatable, row.flipped, row.f1_flipped);
    os << buf;
  }
  write_manifest(o, "flip", {"flip.csv"});
  return 0;
}

int cmd_ensemble_fit(const Options& o) {
  if (o.tau_bank_log.empty() && o.tau_bank_dist.empty())
    throw std::runtime_error("ensemble-fit requires --tau-bank-log and/or --tau-bank-dist");
  auto pairs = load_split(o, "train");
  fs::create_directories(o.out);
  auto params = load_checkpoint(o.checkpoint);
  auto rs = load_rules(o);
  auto scored = score_dataset(params, pairs, &rs);
  std::vector<Signals> sig;
  for (const auto& s : scored) sig.push_back(s.signals);
  auto matrix = build_label_matrix(sig, o.tau_bank_log, o.tau_bank_dist);
  auto model = estimate(matrix);
  save_label_matrix_csv(matrix, (fs::path(o.out) / "label_matrix.csv").string());
  save_label_model_json(model, (fs::path(o.out) / "label_model.json").string());
  write_manifest(o, "ensemble-fit", {"label_matrix.csv", "label_model.json"});
  return 0;
}

int cmd_ensemble_predict(const Options& o) {
  if (o.tau_bank_log.empty() && o.tau_bank_dist.empty())
    throw std::runtime_error("ensemble-predict requires --tau-bank-log and/or --tau-bank-dist");
  auto pairs = load_split(o, o.split);
  fs::create_directories(o.out);
  auto params = load_checkpoint(o.checkpoint);
  auto rs = load_rules(o);
  auto model = load_label_model_json(o.model);
  auto scored = score_dataset(params, pairs, &rs);
  std::vector<Signals> sig;
  for (const auto& s : scored) sig.push_back(s.signals);
  auto matrix = build_label_matrix(sig, o.tau_bank_log, o.tau_bank_dist);
  if (static_cast<std::size_t>(matrix.cols) != model.accuracies.size())
    throw std::runtime_error("tau banks do not match the fitted label model width");

  std::vector<std::string> ids;
  std::vector<StanceDecision> decisions;
  for (int r = 0; r < matrix.rows; ++r) {
    ids.push_back(scored[r].id);
    StanceDecision d;
    if (!sig[r].has_negation) {
      d.value = class_log(sig[r], 0.0).value;
      d.confidence = 1.0 / (1.0 + std::exp(-(sig[r].lpos - sig[r].lneg)));
      d.no_negation = true;
    } else {
      std::vector<signed char> row(matrix.values.begin() + static_cast<std::size_t>(r) * matrix.cols,
                                   matrix.values.begin() +
                                       static_cast<std::size_t>(r + 1) * matrix.cols);
      auto p = predict(model, row);
      d.value = p.stance;
      d.confidence = p.posterior_support;
    }
    decisions.push_back(d);
  }
  std::string path = (fs::path(o.out) / "decisions.jsonl").string();
  write_decisions(path, ids, decisions, "ensemble", 0.0);
  write_manifest(o, "ensemble-predict", {"decisions.jsonl"});
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool needs_dataset = true) {
  auto* ds = cmd->add_option("--dataset", o.dataset, "JSONL dataset path");
  if (needs_dataset) ds->required();
  cmd->add_option("--templates", o.templates, "negation template file");
  cmd->add_option("--verbs", o.verbs, "verb lexicon file");
  cmd->add_option("--seed", o.seed, "random seed (falls back to TRIBRID_SEED, then 0)")
      ->each([&o](const std::string&) { o.seed_given = true; });
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--split", o.split, "dataset split: train/dev/test/all");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective stance classification from claim/perspective pairs"};
  app.require_subcommand(1);
  Options o;

  auto* neg = app.add_subcommand("negate", "negate perspectives, report template coverage");
  add_common(neg, o);
  neg->add_option("--negator", o.negator, "templates / appsuff / delnot");

  auto* tr = app.add_subcommand("train", "train the triple-input classifier");
  add_common(tr, o);
  tr->add_option("--margin", o.margin, "triplet margin");
  tr->add_option("--epochs", o.epochs);
  tr->add_option("--learning-rate", o.learning_rate);
  tr->add_option("--batch-size", o.batch_size);
  tr->add_option("--hash-size", o.hash_size);
  tr->add_option("--dim", o.dim);
  tr->add_flag("--no-negation", o.no_negation, "train without negated perspectives");

  auto* pr = app.add_subcommand("predict", "emit stance decisions");
  add_common(pr, o);
  pr->add_option("--checkpoint", o.checkpoint)->required();
  pr->add_option("--mode", o.mode, "log / dist / agree / weak / majority");
  pr->add_option("--tau", o.tau, "abstention threshold");
  pr->add_option("--discard", [&o](const std::vector<std::string>& v) {
      o.discard = std::stod(v.front());
      return true;
    }, "calibrate tau to discard this fraction on the dev split");
  pr->add_option("--tau-bank-log", o.tau_bank_log, "logit-threshold bank");
  pr->add_option("--tau-bank-dist", o.tau_bank_dist, "distance-threshold bank");

  auto* ev = app.add_subcommand("evaluate", "score decisions against gold labels");
  add_common(ev, o);
  ev->add_option("--predictions", o.predictions, "decisions JSONL")->required();

  auto* sw = app.add_subcommand("sweep", "filter sweep at 10%..90%");
  add_common(sw, o);
  sw->add_option("--checkpoint", o.checkpoint)->required();
  sw->add_option("--mode", o.mode, "log / dist");

  auto* fl = app.add_subcommand("flip", "negation flip protocol over three negators");
  add_common(fl, o);
  fl->add_option("--checkpoint", o.checkpoint)->required();

  auto* ef = app.add_subcommand("ensemble-fit", "fit the label model on the train split");
  add_common(ef, o);
  ef->add_option("--checkpoint", o.checkpoint)->required();
  ef->add_option("--tau-bank-log", o.tau_bank_log, "logit-threshold bank");
  ef->add_option("--tau-bank-dist", o.tau_bank_dist, "distance-threshold bank");

  auto* ep = app.add_subcommand("ensemble-predict", "predict with a fitted label model");
  add_common(ep, o);
  ep->add_option("--checkpoint", o.checkpoint)->required();
  ep->add_option("--model", o.model, "label model JSON")->required();
  ep->add_option("--tau-bank-log", o.tau_bank_log, "logit-threshold bank");
  ep->add_option("--tau-bank-dist", o.tau_bank_dist, "distance-threshold bank");

  CLI11_PARSE(app, argc, argv);

  try {
    if (neg->parsed()) return cmd_negate(o);
    if (tr->parsed()) return cmd_train(o);
    if (pr->parsed()) return cmd_predict(o);
    if (ev->parsed()) return cmd_evaluate(o);
    if (sw->parsed()) return cmd_sweep(o);
    if (fl->parsed()) return cmd_flip(o);
    if (ef->parsed()) return cmd_ensemble_fit(o);
    if (ep->parsed()) return cmd_ensemble_predict(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
