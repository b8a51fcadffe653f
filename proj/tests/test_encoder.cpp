#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "tribrid/encoder.hpp"

using namespace tribrid;

namespace {
EncoderParams small_params(std::uint64_t seed = 1) { return init_params(64, 8, seed); }

std::string random_text(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 12), chr(32, 126);
  std::string s;
  int n = len(rng);
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(chr(rng)));
  return s;
}
}  // namespace

TEST_CASE("fnv1a matches the reference constants") {
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("encode is deterministic and finite") {
  auto p = small_params();
  auto a = encode(p, "Sanctions are working");
  auto b = encode(p, "Sanctions are working");
  CHECK(a == b);

  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    for (double v : encode(p, random_text(rng))) CHECK(std::isfinite(v));
  }
}

TEST_CASE("empty text encodes to tanh(bias)") {
  auto p = small_params();
  auto v = encode(p, "");
  REQUIRE(static_cast<int>(v.size()) == p.dim);
  for (int i = 0; i < p.dim; ++i) CHECK(v[i] == doctest::Approx(std::tanh(p.proj_b[i])));
}

TEST_CASE("combine_features layout (c, x, |c-x|, c*x, cos)") {
  std::vector<double> c{1, 0, 0, 0}, x{0, 1, 0, 0};
  auto f = combine_features(c, x);
  REQUIRE(f.size() == 17);  // 4d+1 with d=4
  CHECK(f[16] == doctest::Approx(0.0));  // orthogonal

  auto same = combine_features(c, c);
  for (int i = 8; i < 12; ++i) CHECK(same[i] == 0.0);
  CHECK(same[16] == doctest::Approx(1.0));

  std::vector<double> short_vec{1.0, 2.0};
  CHECK_THROWS_AS(combine_features(c, short_vec), std::invalid_argument);
}

TEST_CASE("cosine of a zero vector is defined as 0") {
  CHECK(cosine({0, 0}, {1, 2}) == 0.0);
  CHECK(combine_features({0, 0}, {0, 0}).back() == 0.0);
}

TEST_CASE("classify is an affine map") {
  auto p = small_params();
  std::vector<double> zero(p.feature_dim(), 0.0);
  std::fill(p.head_w.begin(), p.head_w.end(), 0.0);
  std::fill(p.head_b.begin(), p.head_b.end(), 0.0);
  auto [a, b] = classify(p, zero);
  CHECK(a == 0.0);
  CHECK(b == 0.0);

  auto q = small_params(3);
  std::vector<double> f(q.feature_dim());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& v : f) v = u(rng);
  auto [l1, l2] = classify(q, f);
  for (auto& w : q.head_w) w *= 2;
  q.head_b[0] *= 2;
  q.head_b[1] *= 2;
  auto [d1, d2] = classify(q, f);
  CHECK(d1 == doctest::Approx(2 * l1));
  CHECK(d2 == doctest::Approx(2 * l2));
}

TEST_CASE("forward fills the signal set") {
  auto p = small_params();
  InputTriple t{"x", "Sanctions are working", "Sanctions fail", "Sanctions succeed"};
  auto s = forward(p, t);
  CHECK(s.has_negation);
  CHECK(s.dist_p >= 0);
  CHECK(s.dist_np >= 0);
  CHECK(s.cos_p >= -1);
  CHECK(s.cos_p <= 1);

  InputTriple same{"y", "claim here", "text alike", "text alike"};
  auto ss = forward(p, same);
  CHECK(ss.dist_p == ss.dist_np);

  InputTriple pair_only{"z", "claim here", "text alike", std::nullopt};
  CHECK(!forward(p, pair_only).has_negation);
}

TEST_CASE("siamese property: encoding ignores the slot") {
  auto p = small_params();
  std::string text = "One shared sentence";
  InputTriple as_claim{"a", text, "other words", std::nullopt};
  InputTriple as_pers{"b", "other words", text, std::nullopt};
  // distance is symmetric in the two encodings, so swapping slots keeps it
  CHECK(forward(p, as_claim).dist_p == doctest::Approx(forward(p, as_pers).dist_p));
  CHECK(encode(p, text) == encode(p, text));
}

TEST_CASE("swapping P and NP swaps the distance and cosine signals") {
  auto p = small_params();
  InputTriple t{"x", "Claims here", "Perspective one", "Perspective two"};
  InputTriple swapped{"x", "Claims here", "Perspective two", "Perspective one"};
  auto a = forward(p, t);
  auto b = forward(p, swapped);
  CHECK(a.dist_p == doctest::Approx(b.dist_np));
  CHECK(a.dist_np == doctest::Approx(b.dist_p));
  CHECK(a.cos_p == doctest::Approx(b.cos_np));
  CHECK(a.cos_np == doctest::Approx(b.cos_p));
}

TEST_CASE("encoded distances satisfy the triangle inequality") {
  auto p = small_params();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto a = encode(p, random_text(rng));
    auto b = encode(p, random_text(rng));
    auto c = encode(p, random_text(rng));
    CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
  }
}

TEST_CASE("checkpoint round-trips and rejects mismatches") {
  auto p = init_params(128, 6, 42);
  std::string path = "test_ckpt.bin";
  save_checkpoint(p, path);
  auto q = load_checkpoint(path);
  CHECK(q.hash_size == p.hash_size);
  CHECK(q.dim == p.dim);
  CHECK(q.seed == p.seed);
  CHECK(q.embed == p.embed);
  CHECK(q.head_w == p.head_w);

  // corrupt the declared dimension -> the weight arrays no longer fit
  p.dim = 7;
  CHECK_THROWS(save_checkpoint(p, path));
  CHECK_THROWS(load_checkpoint("no_such_file.bin"));
  std::remove(path.c_str());
}
