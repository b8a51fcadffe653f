#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tribrid/decision.hpp"
#include "tribrid/encoder.hpp"
#include "tribrid/negation.hpp"
#include "tribrid/objective.hpp"

namespace tribrid {

enum class Split { Train, Dev, Test };

struct ExamplePair {
  std::string id;
  std::string claim;
  std::string perspective;
  Label label = Label::Support;
  Split split = Split::Train;
};

Split parse_split(const std::string& s);
std::string split_name(Split s);
Label parse_label(const std::string& s);
std::string label_name(Label l);

// One JSON object per line: {"id","claim","perspective","label","split"}.
std::vector<ExamplePair> load_dataset(const std::string& path);
void save_dataset(const std::vector<ExamplePair>& data, const std::string& path);

std::vector<ExamplePair> filter_split(const std::vector<ExamplePair>& data, Split split);

// Attaches negated perspectives via the rule set (no match -> absent).
std::vector<TrainExample> to_train_examples(const std::vector<ExamplePair>& pairs,
                                            const RuleSet* rs);

struct MetricsReport {
  double f1 = 0, precision = 0, recall = 0;
  double coverage = 0;
  long tp = 0, fp = 0, fn = 0, tn = 0, abstained = 0;
};

// Binary P/R/F1 over non-abstained predictions, aligned by id.
MetricsReport compute_metrics(const std::map<std::string, Stance>& predictions,
                              const std::vector<ExamplePair>& gold,
                              Stance positive = Stance::Support);

// "81.35 (81.00, 81.71)" style rendering, percentages.
std::string format_metrics(const MetricsReport& r);

struct ScoredExample {
  std::string id;
  Label gold;
  Signals signals;
};

std::vector<ScoredExample> score_dataset(const EncoderParams& params,
                                         const std::vector<ExamplePair>& pairs, const RuleSet* rs);

struct SweepRow {
  double filtered_percentage = 0;
  double tau = 0;
  MetricsReport metrics;
};

struct SweepReport {
  std::string method;  // "log" or "dist"
  std::vector<SweepRow> rows;
};

// tau calibrated per target discard fraction from calibration gaps (dev split
// by default; pass the eval gaps themselves to mirror in-sample sweeps).
SweepReport sweep_filter(const std::vector<ScoredExample>& eval_set,
                         const std::vector<ScoredExample>& calibration, ThresholdFamily family,
                         const std::vector<double>& percentages);

// Metrics on the subset where logit and distance signals point the same way.
MetricsReport agreement_analysis(const std::vector<ScoredExample>& scored);

struct FlipRow {
  std::string negator;  // templates / appsuff / delnot
  double coverage = 0;
  long negatable = 0;
  long flipped = 0;
  double f1_flipped = 0;
};

struct FlipReport {
  std::vector<FlipRow> rows;
};

// Counts predictions that change when the negated perspective replaces the
// original; the model should have been trained without negated inputs.
FlipReport flipped_cases(const EncoderParams& params, const RuleSet& rs,
                         const std::vector<ExamplePair>& pairs);

// --- bundled synthetic benchmark ---
struct SyntheticConfig {
  int size = 2000;
  std::uint64_t seed = 7;
  double train_fraction = 0.70;
  double dev_fraction = 0.15;
};

std::vector<ExamplePair> generate_synthetic(const SyntheticConfig& cfg);

}  // namespace tribrid
