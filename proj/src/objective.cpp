#include "tribrid/objective.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "tribrid/tokens.hpp"

namespace tribrid {

void ParamGrad::resize_like(const EncoderParams& p) {
  embed.assign(p.embed.size(), 0.0);
  proj_w.assign(p.proj_w.size(), 0.0);
  proj_b.assign(p.proj_b.size(), 0.0);
  head_w.assign(p.head_w.size(), 0.0);
  head_b.assign(p.head_b.size(), 0.0);
}

void ParamGrad::zero() {
  auto z = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
  z(embed);
  z(proj_w);
  z(proj_b);
  z(head_w);
  z(head_b);
}

void ParamGrad::scale(double s) {
  auto m = [s](std::vector<double>& v) {
    for (auto& x : v) x *= s;
  };
  m(embed);
  m(proj_w);
  m(proj_b);
  m(head_w);
  m(head_b);
}

void ParamGrad::add(const ParamGrad& o) {
  auto a = [](std::vector<double>& v, const std::vector<double>& w) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
  };
  a(embed, o.embed);
  a(proj_w, o.proj_w);
  a(proj_b, o.proj_b);
  a(head_w, o.head_w);
  a(head_b, o.head_b);
}

double cross_entropy(double lpos, double lneg, Label y) {
  if (!std::isfinite(lpos) || !std::isfinite(lneg))
    throw std::invalid_argument("cross_entropy: non-finite logits");
  double m = std::max(lpos, lneg);
  double lse = m + std::log(std::exp(lpos - m) + std::exp(lneg - m));
  return lse - (y == Label::Support ? lpos : lneg);
}

double cosine_embedding_loss(const std::vector<double>& c, const std::vector<double>& p, int y) {
  double cs = cosine(c, p);
  return y == 1 ? 1.0 - cs : std::max(0.0, cs);
}

double triplet_loss(const std::vector<double>& c, const std::vector<double>& pos,
                    const std::vector<double>& neg, double margin) {
  return std::max(margin + l2_distance(c, pos) - l2_distance(c, neg), 0.0);
}

namespace {

struct EncCache {
  std::vector<std::size_t> buckets;
  std::vector<double> u;  // mean embedding (pre-projection)
  std::vector<double> v;  // tanh(Wu + b)
};

EncCache encode_cached(const EncoderParams& p, std::string_view text) {
  const int d = p.dim;
  EncCache c;
  for (const auto& t : tokenize_lower(text)) c.buckets.push_back(token_bucket(t, p.hash_size));
  c.u.assign(d, 0.0);
  for (auto b : c.buckets) {
    const double* row = p.embed.data() + b * d;
    for (int i = 0; i < d; ++i) c.u[i] += row[i];
  }
  if (!c.buckets.empty())
    for (auto& x : c.u) x /= static_cast<double>(c.buckets.size());
  c.v.resize(d);
  for (int i = 0; i < d; ++i) {
    double z = p.proj_b[i];
    const double* wrow = p.proj_w.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) z += wrow[j] * c.u[j];
    c.v[i] = std::tanh(z);
  }
  return c;
}

// dv -> parameter grads for one text.
void backprop_text(const EncoderParams& p, const EncCache& c, const std::vector<double>& dv,
                   ParamGrad& g) {
  const int d = p.dim;
  std::vector<double> dz(d);
  for (int i = 0; i < d; ++i) dz[i] = dv[i] * (1.0 - c.v[i] * c.v[i]);

  for (int i = 0; i < d; ++i) {
    g.proj_b[i] += dz[i];
    double* grow = g.proj_w.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) grow[j] += dz[i] * c.u[j];
  }
  if (c.buckets.empty()) return;
  std::vector<double> du(d, 0.0);
  for (int i = 0; i < d; ++i) {
    const double* wrow = p.proj_w.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) du[j] += wrow[j] * dz[i];
  }
  double inv = 1.0 / static_cast<double>(c.buckets.size());
  for (auto b : c.buckets) {
    double* row = g.embed.data() + b * d;
    for (int j = 0; j < d; ++j) row[j] += du[j] * inv;
  }
}

// d cos(a,b) / da accumulated into out with weight w; zero vectors contribute 0.
void add_cosine_grad(const std::vector<double>& a, const std::vector<double>& b, double w,
                     std::vector<double>& out) {
  double dot = 0, na2 = 0, nb2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na2 += a[i] * a[i];
    nb2 += b[i] * b[i];
  }
  if (na2 == 0.0 || nb2 == 0.0) return;
  double na = std::sqrt(na2), nb = std::sqrt(nb2);
  double cs = dot / (na * nb);
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] += w * (b[i] / (na * nb) - cs * a[i] / na2);
}

// d ||c - x|| / dc accumulated with weight w (and -w into dx side by caller).
void add_dist_grad(const std::vector<double>& c, const std::vector<double>& x, double w,
                   std::vector<double>& dc, std::vector<double>& dx) {
  double dist = l2_distance(c, x);
  if (dist == 0.0) return;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double g = w * (c[i] - x[i]) / dist;
    dc[i] += g;
    dx[i] -= g;
  }
}

}  // namespace

LossBreakdown loss_and_gradient(const EncoderParams& params, const TrainExample& ex,
                                const TrainConfig& cfg, ParamGrad& grad, LossMask mask) {
  const int d = params.dim;
  EncCache cc = encode_cached(params, ex.triple.claim);
  EncCache pc = encode_cached(params, ex.triple.perspective);
  const auto& c = cc.v;
  const auto& p = pc.v;

  auto f = combine_features(c, p);
  auto [lpos, lneg] = classify(params, f);
  int y = ex.label == Label::Support ? 1 : -1;

  LossBreakdown lb;
  if (mask.ce) lb.l_ce = cross_entropy(lpos, lneg, ex.label);
  if (mask.cos) lb.l_cos = cosine_embedding_loss(c, p, y);

  std::vector<double> dc(d, 0.0), dp(d, 0.0), dnp;

  if (mask.ce) {
    // --- cross entropy through the head ---
    double m = std::max(lpos, lneg);
    double e0 = std::exp(lpos - m), e1 = std::exp(lneg - m);
    double dl[2] = {e0 / (e0 + e1), e1 / (e0 + e1)};
    dl[ex.label == Label::Support ? 0 : 1] -= 1.0;

    const std::size_t fd = static_cast<std::size_t>(params.feature_dim());
    std::vector<double> df(fd, 0.0);
    for (int k = 0; k < 2; ++k) {
      grad.head_b[k] += dl[k];
      double* gw = grad.head_w.data() + k * fd;
      const double* w = params.head_w.data() + k * fd;
      for (std::size_t j = 0; j < fd; ++j) {
        gw[j] += dl[k] * f[j];
        df[j] += dl[k] * w[j];
      }
    }
    // features -> (c, p)
    for (int i = 0; i < d; ++i) {
      dc[i] += df[i];
      dp[i] += df[d + i];
      double diff = c[i] - p[i];
      double sg = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      dc[i] += df[2 * d + i] * sg;
      dp[i] -= df[2 * d + i] * sg;
      dc[i] += df[3 * d + i] * p[i];
      dp[i] += df[3 * d + i] * c[i];
    }
    add_cosine_grad(c, p, df[4 * d], dc);
    add_cosine_grad(p, c, df[4 * d], dp);
  }

  if (mask.cos) {
    // --- cosine embedding loss ---
    double cs = cosine(c, p);
    if (y == 1) {
      add_cosine_grad(c, p, -1.0, dc);
      add_cosine_grad(p, c, -1.0, dp);
    } else if (cs > 0.0) {
      add_cosine_grad(c, p, 1.0, dc);
      add_cosine_grad(p, c, 1.0, dp);
    }
  }

  // --- triplet loss (needs a negated perspective) ---
  std::unique_ptr<EncCache> npc;
  if (mask.tri && ex.triple.negated_perspective) {
    npc = std::make_unique<EncCache>(encode_cached(params, *ex.triple.negated_perspective));
    dnp.assign(d, 0.0);
    const auto& np = npc->v;
    const auto& pos = y == 1 ? p : np;
    const auto& neg = y == 1 ? np : p;
    lb.l_tri = triplet_loss(c, pos, neg, cfg.margin);
    if (lb.l_tri > 0.0) {
      auto& dpos = y == 1 ? dp : dnp;
      auto& dneg = y == 1 ? dnp : dp;
      add_dist_grad(c, pos, 1.0, dc, dpos);
      add_dist_grad(c, neg, -1.0, dc, dneg);
    }
  }

  lb.total = lb.l_ce + lb.l_cos + lb.l_tri;

  backprop_text(params, cc, dc, grad);
  backprop_text(params, pc, dp, grad);
  if (npc) backprop_text(params, *npc, dnp, grad);
  return lb;
}

LossBreakdown loss_only(const EncoderParams& params, const TrainExample& ex,
                        const TrainConfig& cfg, LossMask mask) {
  auto c = encode(params, ex.triple.claim);
  auto p = encode(params, ex.triple.perspective);
  auto [lpos, lneg] = classify(params, combine_features(c, p));
  int y = ex.label == Label::Support ? 1 : -1;
  LossBreakdown lb;
  if (mask.ce) lb.l_ce = cross_entropy(lpos, lneg, ex.label);
  if (mask.cos) lb.l_cos = cosine_embedding_loss(c, p, y);
  if (mask.tri && ex.triple.negated_perspective) {
    auto np = encode(params, *ex.triple.negated_perspective);
    lb.l_tri = y == 1 ? triplet_loss(c, p, np, cfg.margin) : triplet_loss(c, np, p, cfg.margin);
  }
  lb.total = lb.l_ce + lb.l_cos + lb.l_tri;
  return lb;
}

TrainResult train(EncoderParams params, const std::vector<TrainExample>& dataset,
                  const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.learning_rate < 0) throw std::invalid_argument("train: negative learning rate");
  if (cfg.batch_size <= 0) throw std::invalid_argument("train: batch size must be positive");

  ParamGrad grad, vel;
  grad.resize_like(params);
  vel.resize_like(params);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult res;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown epoch_mean;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::size_t end = std::min(order.size(), b + cfg.batch_size);
      grad.zero();
      for (std::size_t i = b; i < end; ++i) {
        auto lb = loss_and_gradient(params, dataset[order[i]], cfg, grad);
        if (!std::isfinite(lb.total))
          throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", example " + dataset[order[i]].triple.id);
        epoch_mean.l_ce += lb.l_ce;
        epoch_mean.l_cos += lb.l_cos;
        epoch_mean.l_tri += lb.l_tri;
      }
      grad.scale(1.0 / static_cast<double>(end - b));

      auto step = [&](std::vector<double>& w, std::vector<double>& v,
                      const std::vector<double>& g) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i];
          w[i] += v[i];
        }
      };
      step(params.embed, vel.embed, grad.embed);
      step(params.proj_w, vel.proj_w, grad.proj_w);
      step(params.proj_b, vel.proj_b, grad.proj_b);
      step(params.head_w, vel.head_w, grad.head_w);
      step(params.head_b, vel.head_b, grad.head_b);
    }
    double inv = 1.0 / static_cast<double>(dataset.size());
    epoch_mean.l_ce *= inv;
    epoch_mean.l_cos *= inv;
    epoch_mean.l_tri *= inv;
    epoch_mean.total = epoch_mean.l_ce + epoch_mean.l_cos + epoch_mean.l_tri;
    res.history.push_back(epoch_mean);
  }
  res.params = std::move(params);
  return res;
}

}  // namespace tribrid
