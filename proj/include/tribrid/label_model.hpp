#pragma once

#include <string>
#include <vector>

#include "tribrid/decision.hpp"

namespace tribrid {

// m x 2n votes in {+1 support, -1 oppose, 0 abstain}. Columns are the logit
// bank followed by the distance bank, one column per threshold.
struct LabelMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<signed char> values;  // row-major
  std::vector<double> tau_log;
  std::vector<double> tau_dist;
  std::vector<std::string> column_names;  // "log:<tau>" / "dist:<tau>"

  signed char at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct LabelModelParams {
  std::vector<double> accuracies;   // a_i in [0.51, 0.99]
  std::vector<double> propensities; // non-abstain fraction per column
  double class_prior = 0.5;         // P(Support)
  std::vector<int> defaulted;       // columns whose accuracy fell back to 0.7
};

LabelMatrix build_label_matrix(const std::vector<Signals>& signals,
                               const std::vector<double>& tau_log,
                               const std::vector<double>& tau_dist);

// Sign of the non-abstaining votes; ties and all-abstain rows take the
// caller-provided fallback.
Stance majority_vote(const std::vector<signed char>& row, Stance fallback);

// Closed-form accuracy recovery from agreement moments over column triples;
// no gold labels involved.
LabelModelParams estimate(const LabelMatrix& matrix);

struct Prediction {
  Stance stance = Stance::Support;
  double posterior_support = 0.5;
};

Prediction predict(const LabelModelParams& params, const std::vector<signed char>& row);

// Pairwise agreement moment conditioned on joint non-abstention.
double pair_moment(const LabelMatrix& m, int i, int j);

// Fit on the training signals, predict every eval row. Rows that carry no
// negated perspective fall back to class_log at tau 0 (pair-only mode).
std::vector<Prediction> fit_predict_pipeline(const std::vector<Signals>& train_signals,
                                             const std::vector<Signals>& eval_signals,
                                             const std::vector<double>& tau_log,
                                             const std::vector<double>& tau_dist);

void save_label_matrix_csv(const LabelMatrix& m, const std::string& path);
LabelMatrix load_label_matrix_csv(const std::string& path);
void save_label_model_json(const LabelModelParams& p, const std::string& path);
LabelModelParams load_label_model_json(const std::string& path);

}  // namespace tribrid
