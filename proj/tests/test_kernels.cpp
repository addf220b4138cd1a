#include <cstring>
#include <vector>

#include "doctest.h"
#include "slp/kernels.hpp"
#include "slp/rng.hpp"

using namespace slp;

namespace {

std::vector<double> rand_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(40));
    const int k = 1 + static_cast<int>(rng.below(40));
    const int n = 1 + static_cast<int>(rng.below(40));
    const auto a = rand_vec(static_cast<std::size_t>(m) * k, rng);
    const auto b = rand_vec(static_cast<std::size_t>(k) * n, rng);
    const auto bt = rand_vec(static_cast<std::size_t>(n) * k, rng);
    const auto c = rand_vec(static_cast<std::size_t>(m) * n, rng);

    std::vector<double> r1(static_cast<std::size_t>(m) * n), r2(r1.size());
    kernels::ref::matmul(m, k, n, a.data(), b.data(), r1.data());
    kernels::par::matmul(m, k, n, a.data(), b.data(), r2.data());
    CHECK(same_bits(r1, r2));

    std::vector<double> s1(static_cast<std::size_t>(m) * n), s2(s1.size());
    kernels::ref::matmul_nt(m, k, n, a.data(), bt.data(), s1.data());
    kernels::par::matmul_nt(m, k, n, a.data(), bt.data(), s2.data());
    CHECK(same_bits(s1, s2));

    std::vector<double> t1(static_cast<std::size_t>(k) * n), t2(t1.size());
    kernels::ref::matmul_tn(m, k, n, a.data(), c.data(), t1.data());
    kernels::par::matmul_tn(m, k, n, a.data(), c.data(), t2.data());
    CHECK(same_bits(t1, t2));
  }
}

TEST_CASE("row kernels match between backends") {
  Rng rng(11);
  const int rows = 37, cols = 23;
  const auto x = rand_vec(static_cast<std::size_t>(rows) * cols, rng);
  const auto g = rand_vec(cols, rng);
  const auto b = rand_vec(cols, rng);

  std::vector<double> y1(x.size()), y2(x.size());
  CHECK(kernels::ref::softmax_rows(rows, cols, x.data(), y1.data()) == -1);
  CHECK(kernels::par::softmax_rows(rows, cols, x.data(), y2.data()) == -1);
  CHECK(same_bits(y1, y2));

  kernels::ref::layer_norm_rows(rows, cols, x.data(), g.data(), b.data(), 1e-9, y1.data());
  kernels::par::layer_norm_rows(rows, cols, x.data(), g.data(), b.data(), 1e-9, y2.data());
  CHECK(same_bits(y1, y2));

  kernels::ref::gelu(x.size(), x.data(), y1.data());
  kernels::par::gelu(x.size(), x.data(), y2.data());
  CHECK(same_bits(y1, y2));

  std::vector<double> d1(x.size(), 0.25), d2(x.size(), 0.25);
  kernels::ref::gelu_grad(x.size(), x.data(), y1.data(), d1.data());
  kernels::par::gelu_grad(x.size(), x.data(), y2.data(), d2.data());
  CHECK(same_bits(d1, d2));
}

TEST_CASE("degenerate softmax row is reported with its index") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> x = {0.0, 1.0, -inf, -inf, 2.0, 3.0};
  std::vector<double> y(x.size());
  CHECK(kernels::ref::softmax_rows(3, 2, x.data(), y.data()) == 1);
  CHECK(kernels::par::softmax_rows(3, 2, x.data(), y.data()) == 1);
}

TEST_CASE("dispatch honors the runtime switch") {
  const bool prev = kernels::parallel_enabled();
  kernels::set_parallel(false);
  CHECK_FALSE(kernels::parallel_enabled());
  kernels::set_parallel(prev);
}
