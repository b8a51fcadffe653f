#include "tribrid/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "tribrid/tokens.hpp"

namespace tribrid {

bool EncoderParams::shapes_ok() const {
  return dim > 0 && hash_size > 0 && embed.size() == hash_size * static_cast<std::size_t>(dim) &&
         proj_w.size() == static_cast<std::size_t>(dim) * dim &&
         proj_b.size() == static_cast<std::size_t>(dim) &&
         head_w.size() == 2u * static_cast<std::size_t>(feature_dim()) && head_b.size() == 2;
}

EncoderParams init_params(std::size_t hash_size, int dim, std::uint64_t seed) {
  EncoderParams p;
  p.hash_size = hash_size;
  p.dim = dim;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (auto& x : v) x = u(rng);
  };
  fill(p.embed, hash_size * static_cast<std::size_t>(dim));
  fill(p.proj_w, static_cast<std::size_t>(dim) * dim);
  fill(p.proj_b, static_cast<std::size_t>(dim));
  fill(p.head_w, 2u * static_cast<std::size_t>(p.feature_dim()));
  fill(p.head_b, 2);
  return p;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::size_t token_bucket(std::string_view token, std::size_t hash_size) {
  return static_cast<std::size_t>(fnv1a(token) % hash_size);
}

std::vector<double> encode(const EncoderParams& params, std::string_view text) {
  const int d = params.dim;
  std::vector<double> u(d, 0.0);
  auto toks = tokenize_lower(text);
  for (const auto& t : toks) {
    const double* row = params.embed.data() + token_bucket(t, params.hash_size) * d;
    for (int i = 0; i < d; ++i) u[i] += row[i];
  }
  if (!toks.empty())
    for (auto& x : u) x /= static_cast<double>(toks.size());

  std::vector<double> v(d);
  for (int i = 0; i < d; ++i) {
    double z = params.proj_b[i];
    const double* wrow = params.proj_w.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) z += wrow[j] * u[j];
    v[i] = std::tanh(z);
  }
  return v;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> combine_features(const std::vector<double>& c, const std::vector<double>& x) {
  if (c.size() != x.size()) throw std::invalid_argument("combine_features: dimension mismatch");
  const std::size_t d = c.size();
  std::vector<double> f;
  f.reserve(4 * d + 1);
  f.insert(f.end(), c.begin(), c.end());
  f.insert(f.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < d; ++i) f.push_back(std::fabs(c[i] - x[i]));
  for (std::size_t i = 0; i < d; ++i) f.push_back(c[i] * x[i]);
  f.push_back(cosine(c, x));
  return f;
}

std::pair<double, double> classify(const EncoderParams& params,
                                   const std::vector<double>& features) {
  const std::size_t fd = static_cast<std::size_t>(params.feature_dim());
  if (features.size() != fd) throw std::invalid_argument("classify: bad feature length");
  double out[2];
  for (int k = 0; k < 2; ++k) {
    double z = params.head_b[k];
    const double* wrow = params.head_w.data() + k * fd;
    for (std::size_t j = 0; j < fd; ++j) z += wrow[j] * features[j];
    out[k] = z;
  }
  return {out[0], out[1]};
}

Signals forward(const EncoderParams& params, const InputTriple& triple) {
  auto c = encode(params, triple.claim);
  auto p = encode(params, triple.perspective);
  auto [lpos, lneg] = classify(params, combine_features(c, p));

  Signals s;
  s.lpos = lpos;
  s.lneg = lneg;
  s.dist_p = l2_distance(c, p);
  s.cos_p = cosine(c, p);
  if (triple.negated_perspective) {
    auto np = encode(params, *triple.negated_perspective);
    s.dist_np = l2_distance(c, np);
    s.cos_np = cosine(c, np);
    s.has_negation = true;
  }
  return s;
}

namespace {
constexpr char kMagic[4] = {'T', 'B', 'R', 'D'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  for (double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    write_u64(os, bits);
  }
}

std::vector<double> read_doubles(std::istream& is, std::size_t expected) {
  std::uint64_t n = read_u64(is);
  if (n != expected) throw std::runtime_error("checkpoint: array size mismatch");
  std::vector<double> v(n);
  for (auto& x : v) {
    std::uint64_t bits = read_u64(is);
    std::memcpy(&x, &bits, 8);
  }
  return v;
}
}  // namespace

void save_checkpoint(const EncoderParams& params, const std::string& path) {
  if (!params.shapes_ok()) throw std::runtime_error("save_checkpoint: inconsistent shapes");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os.write(kMagic, 4);
  write_u64(os, kVersion);
  write_u64(os, params.hash_size);
  write_u64(os, static_cast<std::uint64_t>(params.dim));
  write_u64(os, params.seed);
  write_doubles(os, params.embed);
  write_doubles(os, params.proj_w);
  write_doubles(os, params.proj_b);
  write_doubles(os, params.head_w);
  write_doubles(os, params.head_b);
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

EncoderParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  if (read_u64(is) != kVersion) throw std::runtime_error("unsupported checkpoint version");

  EncoderParams p;
  p.hash_size = static_cast<std::size_t>(read_u64(is));
  p.dim = static_cast<int>(read_u64(is));
  p.seed = read_u64(is);
  if (p.dim <= 0 || p.hash_size == 0) throw std::runtime_error("checkpoint: bad dimensions");
  const std::size_t d = static_cast<std::size_t>(p.dim);
  p.embed = read_doubles(is, p.hash_size * d);
  p.proj_w = read_doubles(is, d * d);
  p.proj_b = read_doubles(is, d);
  p.head_w = read_doubles(is, 2 * static_cast<std::size_t>(p.feature_dim()));
  p.head_b = read_doubles(is, 2);
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return p;
}

}  // namespace tribrid
