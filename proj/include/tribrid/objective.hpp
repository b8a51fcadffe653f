#pragma once

#include <cstdint>
#include <vector>

#include "tribrid/encoder.hpp"

namespace tribrid {

enum class Label { Support, Oppose };

struct TrainExample {
  InputTriple triple;
  Label label = Label::Support;
};

struct LossBreakdown {
  double l_ce = 0;
  double l_cos = 0;
  double l_tri = 0;
  double total = 0;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 32;
  int epochs = 30;
  double margin = 1.0;  // triplet margin
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

// Gradient buffer mirroring EncoderParams.
struct ParamGrad {
  std::vector<double> embed, proj_w, proj_b, head_w, head_b;

  void resize_like(const EncoderParams& p);
  void zero();
  void scale(double s);
  void add(const ParamGrad& other);
};

// Eq.-level losses. y follows the paper's convention: +1 support, -1 oppose.
double cross_entropy(double lpos, double lneg, Label y);
double cosine_embedding_loss(const std::vector<double>& c, const std::vector<double>& p, int y);
double triplet_loss(const std::vector<double>& c, const std::vector<double>& pos,
                    const std::vector<double>& neg, double margin);

// Component switch, mainly for checking each gradient in isolation.
struct LossMask {
  bool ce = true;
  bool cos = true;
  bool tri = true;
};

// Analytic gradient of the summed loss for one example. Subgradient 0 at the
// hinge and clamp kinks. Without a negated perspective l_tri is 0.
LossBreakdown loss_and_gradient(const EncoderParams& params, const TrainExample& ex,
                                const TrainConfig& cfg, ParamGrad& grad, LossMask mask = {});

LossBreakdown loss_only(const EncoderParams& params, const TrainExample& ex,
                        const TrainConfig& cfg, LossMask mask = {});

struct TrainResult {
  EncoderParams params;
  std::vector<LossBreakdown> history;  // per-epoch means
};

// Mini-batch SGD with momentum; deterministic given cfg.seed.
TrainResult train(EncoderParams params, const std::vector<TrainExample>& dataset,
                  const TrainConfig& cfg);

}  // namespace tribrid
