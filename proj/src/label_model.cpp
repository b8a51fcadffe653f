#include "tribrid/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tribrid {

namespace {

std::string format_tau(double tau) {
  std::ostringstream os;
  os << tau;
  return os.str();
}

signed char stance_vote(const StanceDecision& d) {
  switch (d.value) {
    case Stance::Support: return +1;
    case Stance::Oppose: return -1;
    case Stance::Abstain: return 0;
  }
  return 0;
}

}  // namespace

LabelMatrix build_label_matrix(const std::vector<Signals>& signals,
                               const std::vector<double>& tau_log,
                               const std::vector<double>& tau_dist) {
  for (double t : tau_log)
    if (t < 0) throw std::invalid_argument("build_label_matrix: negative tau");
  for (double t : tau_dist)
    if (t < 0) throw std::invalid_argument("build_label_matrix: negative tau");

  LabelMatrix m;
  m.rows = static_cast<int>(signals.size());
  m.cols = static_cast<int>(tau_log.size() + tau_dist.size());
  m.tau_log = tau_log;
  m.tau_dist = tau_dist;
  m.values.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (double t : tau_log) m.column_names.push_back("log:" + format_tau(t));
  for (double t : tau_dist) m.column_names.push_back("dist:" + format_tau(t));

  for (int r = 0; r < m.rows; ++r) {
    int c = 0;
    for (double t : tau_log)
      m.values[static_cast<std::size_t>(r) * m.cols + c++] = stance_vote(class_log(signals[r], t));
    for (double t : tau_dist)
      m.values[static_cast<std::size_t>(r) * m.cols + c++] = stance_vote(class_dist(signals[r], t));
  }
  return m;
}

Stance majority_vote(const std::vector<signed char>& row, Stance fallback) {
  int sum = 0;
  for (auto v : row) sum += v;
  if (sum > 0) return Stance::Support;
  if (sum < 0) return Stance::Oppose;
  return fallback;
}

double pair_moment(const LabelMatrix& m, int i, int j) {
  long n = 0;
  double s = 0;
  for (int r = 0; r < m.rows; ++r) {
    int a = m.at(r, i), b = m.at(r, j);
    if (a != 0 && b != 0) {
      s += a * b;
      ++n;
    }
  }
  return n == 0 ? 0.0 : s / static_cast<double>(n);
}

LabelModelParams estimate(const LabelMatrix& m) {
  if (m.cols < 3) throw std::invalid_argument("estimate: need at least 3 columns");
  if (m.rows < 1) throw std::invalid_argument("estimate: empty matrix");

  // Cache pairwise moments.
  std::vector<double> mom(static_cast<std::size_t>(m.cols) * m.cols, 0.0);
  for (int i = 0; i < m.cols; ++i)
    for (int j = i + 1; j < m.cols; ++j)
      mom[static_cast<std::size_t>(i) * m.cols + j] =
          mom[static_cast<std::size_t>(j) * m.cols + i] = pair_moment(m, i, j);
  auto M = [&](int i, int j) { return mom[static_cast<std::size_t>(i) * m.cols + j]; };

  LabelModelParams out;
  out.accuracies.resize(m.cols);
  out.propensities.resize(m.cols);

  for (int i = 0; i < m.cols; ++i) {
    std::vector<double> estimates;
    for (int j = 0; j < m.cols; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k < m.cols; ++k) {
        if (k == i) continue;
        double denom = M(j, k);
        if (std::fabs(denom) < 1e-6) continue;  // degenerate triple
        double prod = M(i, j) * M(i, k) / denom;
        estimates.push_back(std::sqrt(std::fabs(prod)));
      }
    }
    double rescaled;  // 2 a_i - 1, positive root (columns assumed better than random)
    if (estimates.empty()) {
      rescaled = 0.4;  // a_i = 0.7 fallback
      out.defaulted.push_back(i);
    } else {
      std::nth_element(estimates.begin(), estimates.begin() + estimates.size() / 2,
                       estimates.end());
      double hi = estimates[estimates.size() / 2];
      if (estimates.size() % 2 == 0) {
        double lo = *std::max_element(estimates.begin(), estimates.begin() + estimates.size() / 2);
        rescaled = 0.5 * (lo + hi);
      } else {
        rescaled = hi;
      }
    }
    out.accuracies[i] = std::clamp((rescaled + 1.0) / 2.0, 0.51, 0.99);

    long nz = 0;
    for (int r = 0; r < m.rows; ++r)
      if (m.at(r, i) != 0) ++nz;
    out.propensities[i] = static_cast<double>(nz) / static_cast<double>(m.rows);
  }

  // Class prior from the most accurate column's non-abstaining votes.
  int best = static_cast<int>(std::max_element(out.accuracies.begin(), out.accuracies.end()) -
                              out.accuracies.begin());
  long pos = 0, nz = 0;
  for (int r = 0; r < m.rows; ++r) {
    int v = m.at(r, best);
    if (v != 0) {
      ++nz;
      if (v > 0) ++pos;
    }
  }
  out.class_prior = nz == 0 ? 0.5 : static_cast<double>(pos) / static_cast<double>(nz);
  out.class_prior = std::clamp(out.class_prior, 0.01, 0.99);
  return out;
}

Prediction predict(const LabelModelParams& params, const std::vector<signed char>& row) {
  if (row.size() != params.accuracies.size())
    throw std::invalid_argument("predict: row width does not match model");
  double log_odds = std::log(params.class_prior / (1.0 - params.class_prior));
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == 0) continue;
    log_odds += row[i] * std::log(params.accuracies[i] / (1.0 - params.accuracies[i]));
  }
  Prediction p;
  p.stance = log_odds >= 0 ? Stance::Support : Stance::Oppose;
  p.posterior_support = 1.0 / (1.0 + std::exp(-log_odds));
  return p;
}

std::vector<Prediction> fit_predict_pipeline(const std::vector<Signals>& train_signals,
                                             const std::vector<Signals>& eval_signals,
                                             const std::vector<double>& tau_log,
                                             const std::vector<double>& tau_dist) {
  if (tau_log.empty() && tau_dist.empty())
    throw std::invalid_argument("fit_predict_pipeline: empty tau banks");
  auto train_matrix = build_label_matrix(train_signals, tau_log, tau_dist);
  auto params = estimate(train_matrix);
  auto eval_matrix = build_label_matrix(eval_signals, tau_log, tau_dist);

  std::vector<Prediction> out;
  out.reserve(eval_signals.size());
  for (int r = 0; r < eval_matrix.rows; ++r) {
    const Signals& s = eval_signals[r];
    if (!s.has_negation) {
      // pair-only fallback
      Prediction p;
      p.stance = class_log(s, 0.0).value;
      p.posterior_support = 1.0 / (1.0 + std::exp(-(s.lpos - s.lneg)));
      out.push_back(p);
      continue;
    }
    std::vector<signed char> row(eval_matrix.values.begin() +
                                     static_cast<std::size_t>(r) * eval_matrix.cols,
                                 eval_matrix.values.begin() +
                                     static_cast<std::size_t>(r + 1) * eval_matrix.cols);
    out.push_back(predict(params, row));
  }
  return out;
}

void save_label_matrix_csv(const LabelMatrix& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write label matrix: " + path);
  for (int c = 0; c < m.cols; ++c) os << (c ? "," : "") << m.column_names[c];
  os << "\n";
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) os << (c ? "," : "") << static_cast<int>(m.at(r, c));
    os << "\n";
  }
}

LabelMatrix load_label_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open label matrix: " + path);
  LabelMatrix m;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty label matrix file: " + path);
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      m.column_names.push_back(cell);
      auto colon = cell.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("bad label matrix header cell: " + cell);
      double tau = std::stod(cell.substr(colon + 1));
      if (cell.substr(0, colon) == "log")
        m.tau_log.push_back(tau);
      else if (cell.substr(0, colon) == "dist")
        m.tau_dist.push_back(tau);
      else
        throw std::runtime_error("unknown column family in header: " + cell);
    }
  }
  m.cols = static_cast<int>(m.column_names.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      int v = std::stoi(cell);
      if (v < -1 || v > 1) throw std::runtime_error("label matrix cell outside {-1,0,1}");
      m.values.push_back(static_cast<signed char>(v));
      ++c;
    }
    if (c != m.cols) throw std::runtime_error("ragged label matrix row");
    ++m.rows;
  }
  return m;
}

void save_label_model_json(const LabelModelParams& p, const std::string& path) {
  nlohmann::json j;
  j["accuracies"] = p.accuracies;
  j["propensities"] = p.propensities;
  j["class_prior"] = p.class_prior;
  j["defaulted_columns"] = p.defaulted;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write label model: " + path);
  os << j.dump(2) << "\n";
}

LabelModelParams load_label_model_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open label model: " + path);
  nlohmann::json j;
  is >> j;
  LabelModelParams p;
  p.accuracies = j.at("accuracies").get<std::vector<double>>();
  p.propensities = j.at("propensities").get<std::vector<double>>();
  p.class_prior = j.at("class_prior").get<double>();
  if (j.contains("defaulted_columns")) p.defaulted = j["defaulted_columns"].get<std::vector<int>>();
  return p;
}

}  // namespace tribrid
