#pragma once

#include <cstddef>

// Dense double-precision kernels. Every kernel exists twice: a serial
// reference implementation under kernels::ref and an OpenMP version under
// kernels::par. The parallel versions split work so that each output element
// is produced by exactly one thread with the same inner-loop order as the
// reference, so the two are bit-identical and the dispatch layer can switch
// freely. Reductions that would reorder floating-point sums stay serial.

namespace slp::kernels {

bool parallel_enabled();
void set_parallel(bool on);

namespace ref {

// C[m x n] = A[m x k] * B[k x n]
void matmul(int m, int k, int n, const double* a, const double* b, double* c);
// C[m x n] = A[m x k] * B[n x k]^T
void matmul_nt(int m, int k, int n, const double* a, const double* b, double* c);
// C[k x n] = A[m x k]^T * B[m x n]
void matmul_tn(int m, int k, int n, const double* a, const double* b, double* c);

// Row-wise softmax with -inf support. Returns the index of the first row
// whose entries are all -inf, or -1 if every row is well-formed (such rows
// are left untouched; the caller decides whether that is an error).
int softmax_rows(int rows, int cols, const double* x, double* y);

// y = (x - mean) / sqrt(var + eps) * gamma + beta, row-wise moments.
void layer_norm_rows(int rows, int cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y);

void gelu(std::size_t n, const double* x, double* y);
void gelu_grad(std::size_t n, const double* x, const double* dy, double* dx);

void add(std::size_t n, const double* a, const double* b, double* y);
void mul(std::size_t n, const double* a, const double* b, double* y);
void scale(std::size_t n, const double* a, double s, double* y);
void axpy(std::size_t n, double s, const double* x, double* y);  // y += s*x

}  // namespace ref

namespace par {

void matmul(int m, int k, int n, const double* a, const double* b, double* c);
void matmul_nt(int m, int k, int n, const double* a, const double* b, double* c);
void matmul_tn(int m, int k, int n, const double* a, const double* b, double* c);
int softmax_rows(int rows, int cols, const double* x, double* y);
void layer_norm_rows(int rows, int cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y);
void gelu(std::size_t n, const double* x, double* y);
void gelu_grad(std::size_t n, const double* x, const double* dy, double* dx);
void add(std::size_t n, const double* a, const double* b, double* y);
void mul(std::size_t n, const double* a, const double* b, double* y);
void scale(std::size_t n, const double* a, double s, double* y);
void axpy(std::size_t n, double s, const double* x, double* y);

}  // namespace par

// Dispatch: par when enabled, ref otherwise.
void matmul(int m, int k, int n, const double* a, const double* b, double* c);
void matmul_nt(int m, int k, int n, const double* a, const double* b, double* c);
void matmul_tn(int m, int k, int n, const double* a, const double* b, double* c);
int softmax_rows(int rows, int cols, const double* x, double* y);
void layer_norm_rows(int rows, int cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y);
void gelu(std::size_t n, const double* x, double* y);
void gelu_grad(std::size_t n, const double* x, const double* dy, double* dx);
void add(std::size_t n, const double* a, const double* b, double* y);
void mul(std::size_t n, const double* a, const double* b, double* y);
void scale(std::size_t n, const double* a, double s, double* y);
void axpy(std::size_t n, double s, const double* x, double* y);

}  // namespace slp::kernels
