#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/helpers.hpp"
#include "support/oracles.hpp"
#include "surprisenet/ops.hpp"
#include "surprisenet/rng.hpp"
#include "surprisenet/tensor.hpp"

using namespace surprisenet;

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
  CHECK(t(1, 2) == 6.f);
  CHECK(t[3] == 4.f);

  CHECK_THROWS_AS(Tensor({2, 3}, {1, 2}), TensorError);
  CHECK_THROWS_AS(Tensor({2, 0}), TensorError);
  Tensor flat({4});
  CHECK_THROWS_AS(flat.rows(), TensorError);
  CHECK_THROWS_AS(Tensor({2}).item(), TensorError);
  CHECK(Tensor::scalar(7.f).item() == 7.f);
  CHECK(Tensor::full({2, 2}, 3.f)[3] == 3.f);

  Tensor bad({1, 2}, {1.f, std::numeric_limits<float>::infinity()});
  CHECK_THROWS_AS(bad.require_finite("test"), NumericError);
}

TEST_CASE("matmul identity and projector") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor m({2, 2}, {1, 2, 3, 4});
  CHECK(testutil::bit_equal(ops::matmul(eye, m), m));

  Tensor proj({2, 2}, {1, 0, 0, 0});
  Tensor v({2, 2}, {5, 6, 7, 8});
  Tensor got = ops::matmul(proj, v);
  CHECK(got(0, 0) == 5.f);
  CHECK(got(0, 1) == 6.f);
  CHECK(got(1, 0) == 0.f);
  CHECK(got(1, 1) == 0.f);
}

TEST_CASE("matmul matches the triple-loop reference") {
  Rng rng(11);
  Tensor a = testutil::random_tensor({4, 3}, rng);
  Tensor b = testutil::random_tensor({3, 2}, rng);
  Tensor got = ops::matmul(a, b);
  oracle::Mat want = oracle::matmul(oracle::from_tensor(a), oracle::from_tensor(b));
  for (int64_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want.v[static_cast<size_t>(i)]).epsilon(1e-6));

  CHECK_THROWS_AS(ops::matmul(a, a), TensorError);
}

TEST_CASE("matmul transposed flavors agree with explicit transposition") {
  Rng rng(12);
  Tensor a = testutil::random_tensor({5, 3}, rng);
  Tensor b = testutil::random_tensor({4, 3}, rng);
  // a . b^T
  Tensor nt = ops::matmul_nt(a, b);
  oracle::Mat bm = oracle::from_tensor(b);
  oracle::Mat bt(bm.cols, bm.rows);
  for (int64_t r = 0; r < bm.rows; ++r)
    for (int64_t c = 0; c < bm.cols; ++c) bt.at(c, r) = bm.at(r, c);
  oracle::Mat want_nt = oracle::matmul(oracle::from_tensor(a), bt);
  REQUIRE(nt.rows() == 5);
  REQUIRE(nt.cols() == 4);
  for (int64_t i = 0; i < nt.size(); ++i)
    CHECK(nt[i] == doctest::Approx(want_nt.v[static_cast<size_t>(i)]).epsilon(1e-6));

  // a^T . c with a [k,m]
  Tensor c = testutil::random_tensor({5, 2}, rng);
  Tensor tn = ops::matmul_tn(a, c);
  oracle::Mat am = oracle::from_tensor(a);
  oracle::Mat at(am.cols, am.rows);
  for (int64_t r = 0; r < am.rows; ++r)
    for (int64_t col = 0; col < am.cols; ++col) at.at(col, r) = am.at(r, col);
  oracle::Mat want_tn = oracle::matmul(at, oracle::from_tensor(c));
  REQUIRE(tn.rows() == 3);
  REQUIRE(tn.cols() == 2);
  for (int64_t i = 0; i < tn.size(); ++i)
    CHECK(tn[i] == doctest::Approx(want_tn.v[static_cast<size_t>(i)]).epsilon(1e-6));
}

TEST_CASE("linear applies W^T and bias") {
  Rng rng(13);
  Tensor x = testutil::random_tensor({3, 4}, rng);
  Tensor w = testutil::random_tensor({2, 4}, rng);
  Tensor b({2}, {0.5f, -0.25f});
  Tensor got = ops::linear(x, w, b);
  oracle::Mat want = oracle::linear(oracle::from_tensor(x), oracle::from_tensor(w),
                                    oracle::vec_from_tensor(b));
  REQUIRE(got.rows() == 3);
  REQUIRE(got.cols() == 2);
  for (int64_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want.v[static_cast<size_t>(i)]).epsilon(1e-6));
}

TEST_CASE("relu clamps negatives") {
  Tensor x({1, 3}, {-1, 0, 2});
  Tensor y = ops::relu(x);
  CHECK(y[0] == 0.f);
  CHECK(y[1] == 0.f);
  CHECK(y[2] == 2.f);

  Tensor neg({1, 3}, {-5, -0.1f, -100});
  Tensor z = ops::relu(neg);
  for (int64_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.f);
}

TEST_CASE("select_visible zeroes masked entries to exact +0.0") {
  Tensor w({2, 2}, {1.f, -0.0f, std::nextafter(0.f, -1.f), 4.f});
  std::vector<uint8_t> vis = {1, 0, 0, 1};
  Tensor got = ops::select_visible(w, vis);
  CHECK(got[0] == 1.f);
  CHECK(got[3] == 4.f);
  CHECK(got[1] == 0.f);
  CHECK(got[2] == 0.f);
  // exact positive zero, not negative zero
  CHECK(std::signbit(got[1]) == false);
  CHECK(std::signbit(got[2]) == false);

  // empty mask means unmasked
  Tensor same = ops::select_visible(w, {});
  CHECK(testutil::bit_equal(same, w));
}

TEST_CASE("mse examples") {
  Tensor a({1, 2}, {0, 0});
  CHECK(ops::mse(a, a) == 0.f);

  Tensor b({1, 2}, {1, 1});
  CHECK(ops::mse(a, b) == doctest::Approx(1.0));

  Tensor x({1, 2}, {1, 0});
  Tensor xh({1, 2}, {0, 2});
  CHECK(ops::mse(x, xh) == doctest::Approx(2.5));

  Tensor wrong({2, 1}, {1, 0});
  CHECK_THROWS_AS(ops::mse(x, wrong), TensorError);
}

TEST_CASE("mse is positive unless inputs are equal") {
  Rng rng(14);
  Tensor x = testutil::random_tensor({3, 5}, rng);
  CHECK(ops::mse(x, x) == 0.f);
  Tensor y = x;
  y[7] += 1e-3f;
  CHECK(ops::mse(x, y) > 0.f);
}

TEST_CASE("per-row mse mean equals batch mse") {
  Rng rng(15);
  Tensor x = testutil::random_tensor({4, 6}, rng);
  Tensor y = testutil::random_tensor({4, 6}, rng);
  std::vector<float> rows = ops::per_row_mse(x, y);
  REQUIRE(rows.size() == 4);
  double mean = 0.0;
  for (float r : rows) mean += r;
  mean /= 4.0;
  CHECK(ops::mse(x, y) == doctest::Approx(mean).epsilon(1e-6));
}

TEST_CASE("cross entropy trivial anchors") {
  Tensor uniform({1, 2}, {0, 0});
  CHECK(ops::cross_entropy(uniform, {0}) == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  Tensor saturated({1, 2}, {100, 0});
  CHECK(ops::cross_entropy(saturated, {0}) == doctest::Approx(0.0).epsilon(1e-6));

  CHECK_THROWS_AS(ops::cross_entropy(uniform, {2}), TensorError);
  CHECK_THROWS_AS(ops::cross_entropy(uniform, {-1}), TensorError);
}

TEST_CASE("cross entropy matches the unfused two-step reference") {
  Rng rng(16);
  Tensor logits = testutil::random_tensor({3, 4}, rng, -3.f, 3.f);
  std::vector<int> labels = {2, 0, 3};
  double want = oracle::softmax_nll(oracle::from_tensor(logits), labels);
  CHECK(ops::cross_entropy(logits, labels) == doctest::Approx(want).epsilon(1e-6));

  Tensor sm;
  ops::cross_entropy(logits, labels, &sm);
  oracle::Mat want_sm = oracle::softmax(oracle::from_tensor(logits));
  for (int64_t i = 0; i < sm.size(); ++i)
    CHECK(sm[i] == doctest::Approx(want_sm.v[static_cast<size_t>(i)]).epsilon(1e-6));
}

TEST_CASE("kl divergence examples and reference") {
  Tensor zero({1, 1}, {0});
  CHECK(ops::kl_standard_normal(zero, zero) == doctest::Approx(0.0).epsilon(1e-6));

  Tensor mu({1, 1}, {1});
  Tensor lv({1, 1}, {0});
  CHECK(ops::kl_standard_normal(mu, lv) == doctest::Approx(0.5).epsilon(1e-6));

  Rng rng(17);
  Tensor m = testutil::random_tensor({3, 4}, rng, -0.5f, 0.5f);
  Tensor l = testutil::random_tensor({3, 4}, rng, -0.5f, 0.5f);
  double want = oracle::kl_standard_normal(oracle::from_tensor(m), oracle::from_tensor(l));
  CHECK(ops::kl_standard_normal(m, l) == doctest::Approx(want).epsilon(1e-6));
  CHECK(want >= -1e-6);  // non-negativity of the reference itself
}

TEST_CASE("kl divergence stays non-negative on random inputs") {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor m = testutil::random_tensor({2, 5}, rng, -2.f, 2.f);
    Tensor l = testutil::random_tensor({2, 5}, rng, -2.f, 2.f);
    CHECK(ops::kl_standard_normal(m, l) >= -1e-6f);
  }
}

TEST_CASE("reparameterize examples") {
  Tensor mu({1, 3}, {1, 2, 3});
  Tensor lv({1, 3}, {0, 0, 0});
  Tensor zero({1, 3}, {0, 0, 0});
  CHECK(testutil::bit_equal(ops::reparameterize(mu, lv, zero), mu));

  Tensor n({1, 3}, {0.5f, -1.f, 2.f});
  Tensor z = ops::reparameterize(mu, lv, n);
  CHECK(z[0] == doctest::Approx(1.5));
  CHECK(z[1] == doctest::Approx(1.0));
  CHECK(z[2] == doctest::Approx(5.0));

  Rng rng(19);
  Tensor m2 = testutil::random_tensor({2, 4}, rng);
  Tensor l2 = testutil::random_tensor({2, 4}, rng);
  Tensor n2 = testutil::random_tensor({2, 4}, rng);
  oracle::Mat want = oracle::reparameterize(oracle::from_tensor(m2), oracle::from_tensor(l2),
                                            oracle::from_tensor(n2));
  Tensor got = ops::reparameterize(m2, l2, n2);
  for (int64_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want.v[static_cast<size_t>(i)]).epsilon(1e-6));
}

TEST_CASE("col_sums") {
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor s = ops::col_sums(x);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 5.f);
  CHECK(s[1] == 7.f);
  CHECK(s[2] == 9.f);
}

TEST_CASE("operations are deterministic") {
  Rng rng(20);
  Tensor a = testutil::random_tensor({6, 6}, rng);
  Tensor b = testutil::random_tensor({6, 6}, rng);
  CHECK(testutil::bit_equal(ops::matmul(a, b), ops::matmul(a, b)));
  CHECK(ops::mse(a, b) == ops::mse(a, b));
}
