#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"
#include "slp/ops.hpp"
#include "slp/rng.hpp"

using namespace slp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Finite-difference check of d sum(w . f(p)) / dp for a fixed weighting w.
void gradcheck_unary(const std::function<Tensor(const Tensor&)>& f, Parameter& p,
                     double tol = 1e-6) {
  Rng rng(99);
  Tensor probe;
  {
    Tensor out = f(p.value);
    probe = Tensor::randn(out.shape, rng);
  }
  p.value.zero_grad();
  backward(sum(mul(f(p.value), probe)));

  const double h = 1e-6;
  for (std::size_t i = 0; i < p.value.numel(); ++i) {
    const double keep = (*p.value.data)[i];
    double lp, lm;
    {
      NoGradGuard ng;
      (*p.value.data)[i] = keep + h;
      lp = sum(mul(f(p.value), probe)).item();
      (*p.value.data)[i] = keep - h;
      lm = sum(mul(f(p.value), probe)).item();
      (*p.value.data)[i] = keep;
    }
    const double fd = (lp - lm) / (2 * h);
    CHECK((*p.value.grad)[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
  }
}

}  // namespace

TEST_CASE("matmul: identity and basis-vector cases") {
  const Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  const Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  const Tensor r = matmul(eye, a);
  CHECK(r.at(0, 0) == 1.0);
  CHECK(r.at(0, 1) == 2.0);
  CHECK(r.at(1, 0) == 3.0);
  CHECK(r.at(1, 1) == 4.0);

  const Tensor row = Tensor::from({1, 2}, {1, 0});
  const Tensor col = Tensor::from({2, 1}, {0, 5});
  CHECK(matmul(row, col).item() == 0.0);
}

TEST_CASE("matmul: random case matches the naive triple loop to 1e-12") {
  Rng rng(3);
  const Tensor a = Tensor::randn({3, 4}, rng);
  const Tensor b = Tensor::randn({4, 2}, rng);
  const Tensor c = matmul(a, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      double want = 0.0;
      for (int k = 0; k < 4; ++k) want += a.at(i, k) * b.at(k, j);
      CHECK(std::abs(c.at(i, j) - want) < 1e-12);
    }
}

TEST_CASE("matmul: dimension mismatch names both shapes") {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({4, 2});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2x3]"), std::runtime_error);
}

TEST_CASE("softmax: uniform, masked, and reference values") {
  const Tensor flat = softmax_lastdim(Tensor::from({1, 4}, {0, 0, 0, 0}));
  for (int j = 0; j < 4; ++j) CHECK(flat.at(0, j) == doctest::Approx(0.25).epsilon(1e-12));

  const Tensor masked = softmax_lastdim(Tensor::from({1, 2}, {5.0, -kInf}));
  CHECK(masked.at(0, 0) == 1.0);
  CHECK(masked.at(0, 1) == 0.0);

  const Tensor ref = softmax_lastdim(Tensor::from({1, 3}, {1, 2, 3}));
  CHECK(ref.at(0, 0) == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(ref.at(0, 1) == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(ref.at(0, 2) == doctest::Approx(0.66524).epsilon(1e-4));
}

TEST_CASE("softmax: rows sum to one and adding a constant changes nothing") {
  Rng rng(5);
  const Tensor x = Tensor::randn({6, 9}, rng);
  const Tensor y = softmax_lastdim(x);
  Tensor shifted = Tensor::from(x.shape, *x.data);
  for (std::size_t i = 0; i < shifted.numel(); ++i) (*shifted.data)[i] += 3.5;
  const Tensor y2 = softmax_lastdim(shifted);
  for (int i = 0; i < 6; ++i) {
    double s = 0;
    for (int j = 0; j < 9; ++j) {
      s += y.at(i, j);
      CHECK(y.at(i, j) == doctest::Approx(y2.at(i, j)).epsilon(1e-12));
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax: fully masked row raises") {
  CHECK_THROWS_WITH_AS(softmax_lastdim(Tensor::from({2, 2}, {1.0, 2.0, -kInf, -kInf})),
                       doctest::Contains("row 1"), std::runtime_error);
}

TEST_CASE("layer_norm: constant row collapses to beta") {
  const Tensor x = Tensor::from({1, 4}, {3, 3, 3, 3});
  const Tensor g = Tensor::full({4}, 1.0);
  const Tensor b = Tensor::from({4}, {0.5, 0.5, 0.5, 0.5});
  const Tensor y = layer_norm(x, g, b, 1e-5);
  for (int j = 0; j < 4; ++j) CHECK(y.at(0, j) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("layer_norm: symmetric standardization of [1,3]") {
  const Tensor y = layer_norm(Tensor::from({1, 2}, {1, 3}), Tensor::full({2}, 1.0),
                              Tensor::zeros({2}), 1e-12);
  CHECK(y.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(y.at(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("layer_norm: output moments for a random row") {
  Rng rng(17);
  const Tensor x = Tensor::randn({1, 32}, rng, 2.0);
  const double eps = 1e-10;
  const Tensor y = layer_norm(x, Tensor::full({32}, 1.0), Tensor::zeros({32}), eps);
  double mean = 0, var = 0;
  for (int j = 0; j < 32; ++j) mean += y.at(0, j);
  mean /= 32;
  for (int j = 0; j < 32; ++j) var += (y.at(0, j) - mean) * (y.at(0, j) - mean);
  var /= 32;
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(var - 1.0) < 10 * eps + 1e-9);
}

TEST_CASE("cross_entropy_masked: confident, uniform, and recomputed cases") {
  Tensor confident = Tensor::zeros({3, 5});
  confident.at(1, 2) = 1000.0;
  CHECK(cross_entropy_masked(confident, {2}, {1}).item() == doctest::Approx(0.0).epsilon(1e-9));

  const Tensor uniform = Tensor::zeros({2, 8});
  CHECK(cross_entropy_masked(uniform, {3}, {0}).item() ==
        doctest::Approx(std::log(8.0)).epsilon(1e-12));

  Rng rng(23);
  const Tensor logits = Tensor::randn({4, 6}, rng);
  const double loss = cross_entropy_masked(logits, {1, 4}, {0, 2}).item();
  double want = 0.0;
  for (const auto& [pos, tgt] : std::vector<std::pair<int, int>>{{0, 1}, {2, 4}}) {
    double mx = -kInf, z = 0;
    for (int j = 0; j < 6; ++j) mx = std::max(mx, logits.at(pos, j));
    for (int j = 0; j < 6; ++j) z += std::exp(logits.at(pos, j) - mx);
    want += mx + std::log(z) - logits.at(pos, tgt);
  }
  CHECK(loss == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("cross_entropy_masked: preconditions") {
  const Tensor logits = Tensor::zeros({3, 4});
  CHECK_THROWS(cross_entropy_masked(logits, {}, {}));
  CHECK_THROWS(cross_entropy_masked(logits, {1}, {3}));   // position out of range
  CHECK_THROWS(cross_entropy_masked(logits, {9}, {0}));   // target out of range
}

TEST_CASE("gradients: elementwise, norm, attention-shaped ops") {
  Rng rng(31);
  {
    Parameter p("p", Tensor::randn({3, 4}, rng));
    gradcheck_unary([](const Tensor& t) { return gelu(t); }, p);
  }
  {
    Parameter p("p", Tensor::randn({3, 4}, rng));
    const Tensor other = Tensor::randn({3, 4}, rng);
    gradcheck_unary([&](const Tensor& t) { return mul(add(t, other), t); }, p);
  }
  {
    Parameter p("p", Tensor::randn({4, 3}, rng));
    const Tensor m = Tensor::randn({3, 5}, rng);
    gradcheck_unary([&](const Tensor& t) { return matmul(t, m); }, p);
  }
  {
    Parameter p("p", Tensor::randn({5, 3}, rng));
    const Tensor m = Tensor::randn({4, 3}, rng);
    gradcheck_unary([&](const Tensor& t) { return matmul_nt(t, m); }, p);
  }
  {
    Parameter p("p", Tensor::randn({2, 6}, rng));
    gradcheck_unary([](const Tensor& t) { return softmax_lastdim(t); }, p);
  }
  {
    Parameter p("p", Tensor::randn({3, 8}, rng));
    const Tensor g = Tensor::randn({8}, rng);
    const Tensor b = Tensor::randn({8}, rng);
    gradcheck_unary([&](const Tensor& t) { return layer_norm(t, g, b, 1e-8); }, p, 1e-5);
  }
  {
    Parameter p("p", Tensor::randn({8}, rng));
    const Tensor a = Tensor::randn({5, 8}, rng);
    gradcheck_unary([&](const Tensor& t) { return add_bias_rows(a, t); }, p);
  }
  {
    Parameter p("p", Tensor::randn({4, 6}, rng));
    gradcheck_unary(
        [](const Tensor& t) {
          return concat_cols({slice_cols(t, 3, 6), slice_cols(t, 0, 3)});
        },
        p);
  }
  {
    Parameter p("p", Tensor::randn({6, 3}, rng));
    gradcheck_unary(
        [](const Tensor& t) {
          return concat_rows({slice_rows(t, 2, 6), slice_rows(t, 0, 2)});
        },
        p);
  }
  {
    Parameter p("p", Tensor::randn({4, 3}, rng));
    gradcheck_unary([](const Tensor& t) { return transpose2d(t); }, p);
  }
  {
    Parameter p("p", Tensor::randn({4, 3}, rng));
    gradcheck_unary([](const Tensor& t) { return reshape(t, {2, 6}); }, p);
  }
  {
    Parameter p("p", Tensor::randn({7, 4}, rng));
    gradcheck_unary(
        [](const Tensor& t) { return embedding_lookup(t, {3, 0, 3, 6, 1}); }, p);
  }
  {
    Parameter p("p", Tensor::randn({3, 9}, rng));
    gradcheck_unary(
        [](const Tensor& t) { return cross_entropy_masked(t, {2, 7}, {0, 2}); }, p);
  }
}

TEST_CASE("embedding_lookup repeats ids and accumulates their gradient") {
  Parameter table("t", Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6}));
  Tensor out = embedding_lookup(table.value, {1, 1});
  backward(sum(out));
  CHECK((*table.value.grad)[2] == 2.0);
  CHECK((*table.value.grad)[3] == 2.0);
  CHECK((*table.value.grad)[0] == 0.0);
}

TEST_CASE("log_softmax_row normalizes") {
  Rng rng(41);
  const Tensor x = Tensor::randn({3, 11}, rng);
  const std::vector<double> lp = log_softmax_row(x, 1);
  double s = 0;
  for (double v : lp) s += std::exp(v);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}
