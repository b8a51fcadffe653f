#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tribrid {

// Hashing bag-of-words encoder: mean of hashed token embeddings followed by
// one tanh projection. One parameter set serves claim, perspective and
// negated perspective alike.
struct EncoderParams {
  std::size_t hash_size = 1u << 16;
  int dim = 64;
  std::uint64_t seed = 0;

  std::vector<double> embed;   // hash_size x dim, row-major
  std::vector<double> proj_w;  // dim x dim, row-major
  std::vector<double> proj_b;  // dim
  std::vector<double> head_w;  // 2 x (4*dim+1), row-major
  std::vector<double> head_b;  // 2

  int feature_dim() const { return 4 * dim + 1; }
  std::size_t param_count() const {
    return embed.size() + proj_w.size() + proj_b.size() + head_w.size() + head_b.size();
  }
  bool shapes_ok() const;
};

EncoderParams init_params(std::size_t hash_size, int dim, std::uint64_t seed);

std::uint64_t fnv1a(std::string_view bytes);
std::size_t token_bucket(std::string_view token, std::size_t hash_size);

struct InputTriple {
  std::string id;
  std::string claim;
  std::string perspective;
  std::optional<std::string> negated_perspective;
};

struct Signals {
  double lpos = 0;  // support logit
  double lneg = 0;  // oppose logit
  double dist_p = 0;
  double dist_np = 0;
  double cos_p = 0;
  double cos_np = 0;
  bool has_negation = false;
};

std::vector<double> encode(const EncoderParams& params, std::string_view text);

// (c, x, |c-x|, c*x, cos(c,x)) -- length 4d+1.
std::vector<double> combine_features(const std::vector<double>& c, const std::vector<double>& x);

// (support logit, oppose logit)
std::pair<double, double> classify(const EncoderParams& params, const std::vector<double>& features);

Signals forward(const EncoderParams& params, const InputTriple& triple);

double l2_distance(const std::vector<double>& a, const std::vector<double>& b);
double cosine(const std::vector<double>& a, const std::vector<double>& b);  // 0 on zero vectors

// Versioned binary checkpoint; load rejects dimension mismatches.
void save_checkpoint(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace tribrid
