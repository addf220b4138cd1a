#pragma once

#include <vector>

#include "slp/tensor.hpp"

// Differentiable tensor operations. Each op runs its forward through the
// kernel layer and, when grad mode is on, records a tape node whose backward
// accumulates into the parents. Broadcasting is limited to bias-add over
// rows; everything else is shape-strict.

namespace slp {

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// y[i][j] = a[i][j] + bias[j]
Tensor add_bias_rows(const Tensor& a, const Tensor& bias);

// c = a * b, a:[m x k], b:[k x n]
Tensor matmul(const Tensor& a, const Tensor& b);
// c = a * b^T, a:[m x k], b:[n x k]
Tensor matmul_nt(const Tensor& a, const Tensor& b);

Tensor transpose2d(const Tensor& a);
Tensor reshape(const Tensor& a, std::vector<int> shape);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, int r0, int r1);
Tensor slice_cols(const Tensor& a, int c0, int c1);
Tensor concat_cols(const std::vector<Tensor>& parts);

// Row-wise softmax; throws on a row that is entirely -inf.
Tensor softmax_lastdim(const Tensor& x);

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

Tensor gelu(const Tensor& x);

Tensor sum(const Tensor& x);

// -sum over positions of log softmax(logits[pos])[target]. positions and
// targets are aligned; positions must be non-empty.
Tensor cross_entropy_masked(const Tensor& logits, const std::vector<int>& targets,
                            const std::vector<int>& positions);

// y[i] = table[ids[i]]; gradient scatters back into the table rows.
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

// Non-graph helper: log-softmax of one row of a 2D tensor.
std::vector<double> log_softmax_row(const Tensor& x, int row);

}  // namespace slp
