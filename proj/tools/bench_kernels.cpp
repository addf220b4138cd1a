#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "slp/kernels.hpp"
#include "slp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Times each kernel's serial reference against its OpenMP version on
// training-shaped inputs and reports throughput and speedup. The two paths
// must agree bit for bit (checked here as well as in the test suite).

namespace {

using kernel_fn = std::function<void()>;

double time_best_of(const kernel_fn& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

std::vector<double> random_vec(std::size_t n, slp::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bytes_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const std::string& name, double flops, double t_ref, double t_par, bool equal) {
  std::printf("%-28s  ref %8.3f ms (%6.2f GF/s)   omp %8.3f ms (%6.2f GF/s)   x%.2f  %s\n",
              name.c_str(), t_ref * 1e3, flops / t_ref * 1e-9, t_par * 1e3,
              flops / t_par * 1e-9, t_ref / t_par, equal ? "bit-equal" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run the serial path\n");
#endif
  slp::Rng rng(42);
  const int reps = 5;

  {
    const int m = 256, k = 256, n = 256;
    const auto a = random_vec(static_cast<std::size_t>(m) * k, rng);
    const auto b = random_vec(static_cast<std::size_t>(k) * n, rng);
    std::vector<double> c1(static_cast<std::size_t>(m) * n), c2(c1.size());
    const double t1 = time_best_of([&] { slp::kernels::ref::matmul(m, k, n, a.data(), b.data(), c1.data()); }, reps);
    const double t2 = time_best_of([&] { slp::kernels::par::matmul(m, k, n, a.data(), b.data(), c2.data()); }, reps);
    report("matmul 256x256x256", 2.0 * m * k * n, t1, t2, bytes_equal(c1, c2));
  }
  {
    const int m = 512, k = 96, n = 512;
    const auto a = random_vec(static_cast<std::size_t>(m) * k, rng);
    const auto b = random_vec(static_cast<std::size_t>(n) * k, rng);
    std::vector<double> c1(static_cast<std::size_t>(m) * n), c2(c1.size());
    const double t1 = time_best_of([&] { slp::kernels::ref::matmul_nt(m, k, n, a.data(), b.data(), c1.data()); }, reps);
    const double t2 = time_best_of([&] { slp::kernels::par::matmul_nt(m, k, n, a.data(), b.data(), c2.data()); }, reps);
    report("matmul_nt 512x96x512", 2.0 * m * k * n, t1, t2, bytes_equal(c1, c2));
  }
  {
    const int rows = 2048, cols = 512;
    const auto x = random_vec(static_cast<std::size_t>(rows) * cols, rng);
    std::vector<double> y1(x.size()), y2(x.size());
    const double t1 = time_best_of([&] { slp::kernels::ref::softmax_rows(rows, cols, x.data(), y1.data()); }, reps);
    const double t2 = time_best_of([&] { slp::kernels::par::softmax_rows(rows, cols, x.data(), y2.data()); }, reps);
    report("softmax 2048x512", 5.0 * rows * cols, t1, t2, bytes_equal(y1, y2));
  }
  {
    const int rows = 2048, cols = 512;
    const auto x = random_vec(static_cast<std::size_t>(rows) * cols, rng);
    const auto g = random_vec(static_cast<std::size_t>(cols), rng);
    const auto b = random_vec(static_cast<std::size_t>(cols), rng);
    std::vector<double> y1(x.size()), y2(x.size());
    const double t1 = time_best_of([&] { slp::kernels::ref::layer_norm_rows(rows, cols, x.data(), g.data(), b.data(), 1e-12, y1.data()); }, reps);
    const double t2 = time_best_of([&] { slp::kernels::par::layer_norm_rows(rows, cols, x.data(), g.data(), b.data(), 1e-12, y2.data()); }, reps);
    report("layer_norm 2048x512", 7.0 * rows * cols, t1, t2, bytes_equal(y1, y2));
  }
  {
    const std::size_t n = 1 << 22;
    const auto x = random_vec(n, rng);
    std::vector<double> y1(n), y2(n);
    const double t1 = time_best_of([&] { slp::kernels::ref::gelu(n, x.data(), y1.data()); }, reps);
    const double t2 = time_best_of([&] { slp::kernels::par::gelu(n, x.data(), y2.data()); }, reps);
    report("gelu 4M", 8.0 * static_cast<double>(n), t1, t2, bytes_equal(y1, y2));
  }
  return 0;
}
