#include "slp/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace slp::kernels {

namespace {
bool g_parallel =
#ifdef _OPENMP
    true;
#else
    false;
#endif

constexpr double kInf = std::numeric_limits<double>::infinity();

inline void softmax_one_row(int cols, const double* xr, double* yr, bool* degenerate) {
  double mx = -kInf;
  for (int j = 0; j < cols; ++j)
    if (xr[j] > mx) mx = xr[j];
  if (mx == -kInf) {
    *degenerate = true;
    return;
  }
  double sum = 0.0;
  for (int j = 0; j < cols; ++j) {
    yr[j] = (xr[j] == -kInf) ? 0.0 : std::exp(xr[j] - mx);
    sum += yr[j];
  }
  const double inv = 1.0 / sum;
  for (int j = 0; j < cols; ++j) yr[j] *= inv;
  *degenerate = false;
}

inline void layer_norm_one_row(int cols, const double* xr, const double* gamma,
                               const double* beta, double eps, double* yr) {
  double mean = 0.0;
  for (int j = 0; j < cols; ++j) mean += xr[j];
  mean /= cols;
  double var = 0.0;
  for (int j = 0; j < cols; ++j) {
    const double d = xr[j] - mean;
    var += d * d;
  }
  var /= cols;
  const double rstd = 1.0 / std::sqrt(var + eps);
  for (int j = 0; j < cols; ++j) yr[j] = (xr[j] - mean) * rstd * gamma[j] + beta[j];
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double gelu_one(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

inline double gelu_grad_one(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

}  // namespace

bool parallel_enabled() { return g_parallel; }
void set_parallel(bool on) { g_parallel = on; }

namespace ref {

void matmul(int m, int k, int n, const double* a, const double* b, double* c) {
  std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<size_t>(i) * n;
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int t = 0; t < k; ++t) {
      const double av = ai[t];
      const double* bt = b + static_cast<size_t>(t) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

void matmul_nt(int m, int k, int n, const double* a, const double* b, double* c) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += ai[t] * bj[t];
      ci[j] = s;
    }
  }
}

void matmul_tn(int m, int k, int n, const double* a, const double* b, double* c) {
  std::memset(c, 0, sizeof(double) * static_cast<size_t>(k) * n);
  for (int t = 0; t < k; ++t) {
    double* ct = c + static_cast<size_t>(t) * n;
    for (int i = 0; i < m; ++i) {
      const double av = a[static_cast<size_t>(i) * k + t];
      const double* bi = b + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ct[j] += av * bi[j];
    }
  }
}

int softmax_rows(int rows, int cols, const double* x, double* y) {
  for (int i = 0; i < rows; ++i) {
    bool degenerate = false;
    softmax_one_row(cols, x + static_cast<size_t>(i) * cols, y + static_cast<size_t>(i) * cols,
                    &degenerate);
    if (degenerate) return i;
  }
  return -1;
}

void layer_norm_rows(int rows, int cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y) {
  for (int i = 0; i < rows; ++i)
    layer_norm_one_row(cols, x + static_cast<size_t>(i) * cols, gamma, beta, eps,
                       y + static_cast<size_t>(i) * cols);
}

void gelu(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

void gelu_grad(std::size_t n, const double* x, const double* dy, double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * gelu_grad_one(x[i]);
}

void add(std::size_t n, const double* a, const double* b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void scale(std::size_t n, const double* a, double s, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * s;
}

void axpy(std::size_t n, double s, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

}  // namespace ref

namespace par {

// Each parallel loop assigns whole output rows (or elements) to one thread
// and keeps the reference inner-loop order, so results match ref bit for bit
// for any thread count.

void matmul(int m, int k, int n, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static) if (m > 1)
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<size_t>(i) * n;
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int j = 0; j < n; ++j) ci[j] = 0.0;
    for (int t = 0; t < k; ++t) {
      const double av = ai[t];
      const double* bt = b + static_cast<size_t>(t) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

void matmul_nt(int m, int k, int n, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static) if (m > 1)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += ai[t] * bj[t];
      ci[j] = s;
    }
  }
}

void matmul_tn(int m, int k, int n, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static) if (k > 1)
  for (int t = 0; t < k; ++t) {
    double* ct = c + static_cast<size_t>(t) * n;
    for (int j = 0; j < n; ++j) ct[j] = 0.0;
    for (int i = 0; i < m; ++i) {
      const double av = a[static_cast<size_t>(i) * k + t];
      const double* bi = b + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ct[j] += av * bi[j];
    }
  }
}

int softmax_rows(int rows, int cols, const double* x, double* y) {
  std::atomic<int> bad{-1};
#pragma omp parallel for schedule(static) if (rows > 1)
  for (int i = 0; i < rows; ++i) {
    bool degenerate = false;
    softmax_one_row(cols, x + static_cast<size_t>(i) * cols, y + static_cast<size_t>(i) * cols,
                    &degenerate);
    if (degenerate) {
      int cur = bad.load();
      while ((cur == -1 || i < cur) && !bad.compare_exchange_weak(cur, i)) {
      }
    }
  }
  return bad.load();
}

void layer_norm_rows(int rows, int cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y) {
#pragma omp parallel for schedule(static) if (rows > 1)
  for (int i = 0; i < rows; ++i)
    layer_norm_one_row(cols, x + static_cast<size_t>(i) * cols, gamma, beta, eps,
                       y + static_cast<size_t>(i) * cols);
}

void gelu(std::size_t n, const double* x, double* y) {
#pragma omp parallel for schedule(static) if (n > 512)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = gelu_one(x[i]);
}

void gelu_grad(std::size_t n, const double* x, const double* dy, double* dx) {
#pragma omp parallel for schedule(static) if (n > 512)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    dx[i] += dy[i] * gelu_grad_one(x[i]);
}

void add(std::size_t n, const double* a, const double* b, double* y) {
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = a[i] + b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* y) {
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = a[i] * b[i];
}

void scale(std::size_t n, const double* a, double s, double* y) {
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = a[i] * s;
}

void axpy(std::size_t n, double s, const double* x, double* y) {
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] += s * x[i];
}

}  // namespace par

#define SLP_DISPATCH(fn, ...) \
  do {                        \
    if (g_parallel)           \
      return par::fn(__VA_ARGS__); \
    return ref::fn(__VA_ARGS__);   \
  } while (0)

void matmul(int m, int k, int n, const double* a, const double* b, double* c) {
  SLP_DISPATCH(matmul, m, k, n, a, b, c);
}
void matmul_nt(int m, int k, int n, const double* a, const double* b, double* c) {
  SLP_DISPATCH(matmul_nt, m, k, n, a, b, c);
}
void matmul_tn(int m, int k, int n, const double* a, const double* b, double* c) {
  SLP_DISPATCH(matmul_tn, m, k, n, a, b, c);
}
int softmax_rows(int rows, int cols, const double* x, double* y) {
  SLP_DISPATCH(softmax_rows, rows, cols, x, y);
}
void layer_norm_rows(int rows, int cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y) {
  SLP_DISPATCH(layer_norm_rows, rows, cols, x, gamma, beta, eps, y);
}
void gelu(std::size_t n, const double* x, double* y) { SLP_DISPATCH(gelu, n, x, y); }
void gelu_grad(std::size_t n, const double* x, const double* dy, double* dx) {
  SLP_DISPATCH(gelu_grad, n, x, dy, dx);
}
void add(std::size_t n, const double* a, const double* b, double* y) {
  SLP_DISPATCH(add, n, a, b, y);
}
void mul(std::size_t n, const double* a, const double* b, double* y) {
  SLP_DISPATCH(mul, n, a, b, y);
}
void scale(std::size_t n, const double* a, double s, double* y) {
  SLP_DISPATCH(scale, n, a, s, y);
}
void axpy(std::size_t n, double s, const double* x, double* y) {
  SLP_DISPATCH(axpy, n, s, x, y);
}

#undef SLP_DISPATCH

}  // namespace slp::kernels
