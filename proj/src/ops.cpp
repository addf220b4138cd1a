#include "slp/ops.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "slp/kernels.hpp"

namespace slp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.shape[i]);
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape != b.shape)
    throw std::runtime_error(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                             shape_str(b));
}

bool want_grad(const Tensor& t) { return grad_enabled() && t.requires_grad; }

Tensor make_out(std::vector<int> shape, bool requires_grad) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  return t;
}

void attach(Tensor& out, std::vector<Tensor> parents,
            std::function<void(const Tensor&)> fn) {
  out.node = std::make_shared<Node>();
  out.node->parents = std::move(parents);
  out.node->backward = std::move(fn);
}

void accumulate(const Tensor& t, const std::vector<double>& delta) {
  double* g = t.grad->data();
  for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const bool rg = want_grad(a) || want_grad(b);
  Tensor out = make_out(a.shape, rg);
  kernels::add(a.numel(), a.ptr(), b.ptr(), out.ptr());
  if (rg) {
    attach(out, {a, b}, [](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      const Tensor& pb = o.node->parents[1];
      if (pa.requires_grad) kernels::ref::axpy(o.numel(), 1.0, o.gptr(), pa.grad->data());
      if (pb.requires_grad) kernels::ref::axpy(o.numel(), 1.0, o.gptr(), pb.grad->data());
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const bool rg = want_grad(a) || want_grad(b);
  Tensor out = make_out(a.shape, rg);
  kernels::mul(a.numel(), a.ptr(), b.ptr(), out.ptr());
  if (rg) {
    attach(out, {a, b}, [](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      const Tensor& pb = o.node->parents[1];
      const std::size_t n = o.numel();
      const double* g = o.gptr();
      if (pa.requires_grad) {
        double* ga = pa.grad->data();
        const double* vb = pb.ptr();
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * vb[i];
      }
      if (pb.requires_grad) {
        double* gb = pb.grad->data();
        const double* va = pa.ptr();
        for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * va[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double s) {
  const bool rg = want_grad(a);
  Tensor out = make_out(a.shape, rg);
  kernels::scale(a.numel(), a.ptr(), s, out.ptr());
  if (rg) {
    attach(out, {a}, [s](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      if (pa.requires_grad) kernels::ref::axpy(o.numel(), s, o.gptr(), pa.grad->data());
    });
  }
  return out;
}

Tensor add_bias_rows(const Tensor& a, const Tensor& bias) {
  const int m = a.rows(), n = a.cols();
  if (static_cast<int>(bias.numel()) != n)
    throw std::runtime_error("add_bias_rows: bias length " + std::to_string(bias.numel()) +
                             " does not match row width " + std::to_string(n));
  const bool rg = want_grad(a) || want_grad(bias);
  Tensor out = make_out(a.shape, rg);
  const double* av = a.ptr();
  const double* bv = bias.ptr();
  double* y = out.ptr();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y[static_cast<std::size_t>(i) * n + j] = av[static_cast<std::size_t>(i) * n + j] + bv[j];
  if (rg) {
    attach(out, {a, bias}, [m, n](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      const Tensor& pb = o.node->parents[1];
      const double* g = o.gptr();
      if (pa.requires_grad) kernels::ref::axpy(o.numel(), 1.0, g, pa.grad->data());
      if (pb.requires_grad) {
        double* gb = pb.grad->data();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gb[j] += g[static_cast<std::size_t>(i) * n + j];
      }
    });
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape.size() != 2 || b.shape.size() != 2 || a.cols() != b.rows())
    throw std::runtime_error("matmul: incompatible shapes " + shape_str(a) + " vs " +
                             shape_str(b));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const bool rg = want_grad(a) || want_grad(b);
  Tensor out = make_out({m, n}, rg);
  kernels::matmul(m, k, n, a.ptr(), b.ptr(), out.ptr());
  if (rg) {
    attach(out, {a, b}, [m, k, n](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      const Tensor& pb = o.node->parents[1];
      if (pa.requires_grad) {
        std::vector<double> da(static_cast<std::size_t>(m) * k);
        kernels::matmul_nt(m, n, k, o.gptr(), pb.ptr(), da.data());
        accumulate(pa, da);
      }
      if (pb.requires_grad) {
        std::vector<double> db(static_cast<std::size_t>(k) * n);
        kernels::matmul_tn(m, k, n, pa.ptr(), o.gptr(), db.data());
        accumulate(pb, db);
      }
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.shape.size() != 2 || b.shape.size() != 2 || a.cols() != b.cols())
    throw std::runtime_error("matmul_nt: incompatible shapes " + shape_str(a) + " vs " +
                             shape_str(b));
  const int m = a.rows(), k = a.cols(), n = b.rows();
  const bool rg = want_grad(a) || want_grad(b);
  Tensor out = make_out({m, n}, rg);
  kernels::matmul_nt(m, k, n, a.ptr(), b.ptr(), out.ptr());
  if (rg) {
    attach(out, {a, b}, [m, k, n](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      const Tensor& pb = o.node->parents[1];
      if (pa.requires_grad) {
        std::vector<double> da(static_cast<std::size_t>(m) * k);
        kernels::matmul(m, n, k, o.gptr(), pb.ptr(), da.data());
        accumulate(pa, da);
      }
      if (pb.requires_grad) {
        std::vector<double> db(static_cast<std::size_t>(n) * k);
        kernels::matmul_tn(m, n, k, o.gptr(), pa.ptr(), db.data());
        accumulate(pb, db);
      }
    });
  }
  return out;
}

Tensor transpose2d(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  const bool rg = want_grad(a);
  Tensor out = make_out({n, m}, rg);
  const double* av = a.ptr();
  double* y = out.ptr();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y[static_cast<std::size_t>(j) * m + i] = av[static_cast<std::size_t>(i) * n + j];
  if (rg) {
    attach(out, {a}, [m, n](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      if (!pa.requires_grad) return;
      double* ga = pa.grad->data();
      const double* g = o.gptr();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ga[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j) * m + i];
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  if (n != a.numel())
    throw std::runtime_error("reshape: element count mismatch for " + shape_str(a));
  const bool rg = want_grad(a);
  Tensor out = make_out(std::move(shape), rg);
  std::memcpy(out.ptr(), a.ptr(), sizeof(double) * a.numel());
  if (rg) {
    attach(out, {a}, [](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      if (pa.requires_grad) kernels::ref::axpy(o.numel(), 1.0, o.gptr(), pa.grad->data());
    });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_rows: no parts");
  const int n = parts[0].cols();
  int m = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.cols() != n) throw std::runtime_error("concat_rows: column mismatch");
    m += p.rows();
    rg = rg || want_grad(p);
  }
  Tensor out = make_out({m, n}, rg);
  double* y = out.ptr();
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    std::memcpy(y + off, p.ptr(), sizeof(double) * p.numel());
    off += p.numel();
  }
  if (rg) {
    attach(out, parts, [](const Tensor& o) {
      const double* g = o.gptr();
      std::size_t off2 = 0;
      for (const Tensor& p : o.node->parents) {
        if (p.requires_grad) kernels::ref::axpy(p.numel(), 1.0, g + off2, p.grad->data());
        off2 += p.numel();
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& a, int r0, int r1) {
  const int m = a.rows(), n = a.cols();
  if (r0 < 0 || r1 > m || r0 >= r1)
    throw std::runtime_error("slice_rows: bad range [" + std::to_string(r0) + "," +
                             std::to_string(r1) + ") for " + shape_str(a));
  const bool rg = want_grad(a);
  Tensor out = make_out({r1 - r0, n}, rg);
  std::memcpy(out.ptr(), a.ptr() + static_cast<std::size_t>(r0) * n,
              sizeof(double) * out.numel());
  if (rg) {
    attach(out, {a}, [r0, n](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      if (pa.requires_grad)
        kernels::ref::axpy(o.numel(), 1.0, o.gptr(),
                           pa.grad->data() + static_cast<std::size_t>(r0) * n);
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
  const int m = a.rows(), n = a.cols();
  if (c0 < 0 || c1 > n || c0 >= c1)
    throw std::runtime_error("slice_cols: bad range [" + std::to_string(c0) + "," +
                             std::to_string(c1) + ") for " + shape_str(a));
  const int w = c1 - c0;
  const bool rg = want_grad(a);
  Tensor out = make_out({m, w}, rg);
  const double* av = a.ptr();
  double* y = out.ptr();
  for (int i = 0; i < m; ++i)
    std::memcpy(y + static_cast<std::size_t>(i) * w, av + static_cast<std::size_t>(i) * n + c0,
                sizeof(double) * w);
  if (rg) {
    attach(out, {a}, [c0, n, w](const Tensor& o) {
      const Tensor& pa = o.node->parents[0];
      if (!pa.requires_grad) return;
      const int m2 = o.rows();
      double* ga = pa.grad->data();
      const double* g = o.gptr();
      for (int i = 0; i < m2; ++i)
        for (int j = 0; j < w; ++j)
          ga[static_cast<std::size_t>(i) * n + c0 + j] += g[static_cast<std::size_t>(i) * w + j];
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_cols: no parts");
  const int m = parts[0].rows();
  int n = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.rows() != m) throw std::runtime_error("concat_cols: row mismatch");
    n += p.cols();
    rg = rg || want_grad(p);
  }
  Tensor out = make_out({m, n}, rg);
  double* y = out.ptr();
  int col = 0;
  for (const Tensor& p : parts) {
    const int w = p.cols();
    const double* pv = p.ptr();
    for (int i = 0; i < m; ++i)
      std::memcpy(y + static_cast<std::size_t>(i) * n + col, pv + static_cast<std::size_t>(i) * w,
                  sizeof(double) * w);
    col += w;
  }
  if (rg) {
    attach(out, parts, [m, n](const Tensor& o) {
      const double* g = o.gptr();
      int col2 = 0;
      for (const Tensor& p : o.node->parents) {
        const int w = p.cols();
        if (p.requires_grad) {
          double* gp = p.grad->data();
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < w; ++j)
              gp[static_cast<std::size_t>(i) * w + j] += g[static_cast<std::size_t>(i) * n + col2 + j];
        }
        col2 += w;
      }
    });
  }
  return out;
}

Tensor softmax_lastdim(const Tensor& x) {
  if (x.shape.empty()) throw std::runtime_error("softmax: empty tensor");
  const int cols = x.shape.back();
  const int rows = static_cast<int>(x.numel()) / cols;
  const bool rg = want_grad(x);
  Tensor out = make_out(x.shape, rg);
  const int bad = kernels::softmax_rows(rows, cols, x.ptr(), out.ptr());
  if (bad >= 0)
    throw std::runtime_error("softmax: degenerate row " + std::to_string(bad) +
                             " (all entries are -inf)");
  if (rg) {
    attach(out, {x}, [rows, cols](const Tensor& o) {
      const Tensor& px = o.node->parents[0];
      if (!px.requires_grad) return;
      const double* y = o.ptr();
      const double* g = o.gptr();
      double* gx = px.grad->data();
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * cols;
        double dot = 0.0;
        for (int j = 0; j < cols; ++j) dot += g[base + j] * y[base + j];
        for (int j = 0; j < cols; ++j) gx[base + j] += y[base + j] * (g[base + j] - dot);
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (eps <= 0.0) throw std::runtime_error("layer_norm: eps must be positive");
  const int cols = x.shape.back();
  const int rows = static_cast<int>(x.numel()) / cols;
  if (static_cast<int>(gamma.numel()) != cols || static_cast<int>(beta.numel()) != cols)
    throw std::runtime_error("layer_norm: gamma/beta width mismatch for " + shape_str(x));
  const bool rg = want_grad(x) || want_grad(gamma) || want_grad(beta);
  Tensor out = make_out(x.shape, rg);
  kernels::layer_norm_rows(rows, cols, x.ptr(), gamma.ptr(), beta.ptr(), eps, out.ptr());
  if (rg) {
    attach(out, {x, gamma, beta}, [rows, cols, eps](const Tensor& o) {
      const Tensor& px = o.node->parents[0];
      const Tensor& pg = o.node->parents[1];
      const Tensor& pb = o.node->parents[2];
      const double* xv = px.ptr();
      const double* gv = pg.ptr();
      const double* g = o.gptr();
      std::vector<double> xhat(cols);
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * cols;
        double mean = 0.0;
        for (int j = 0; j < cols; ++j) mean += xv[base + j];
        mean /= cols;
        double var = 0.0;
        for (int j = 0; j < cols; ++j) {
          const double d = xv[base + j] - mean;
          var += d * d;
        }
        var /= cols;
        const double rstd = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < cols; ++j) xhat[j] = (xv[base + j] - mean) * rstd;

        if (pb.requires_grad) {
          double* gb = pb.grad->data();
          for (int j = 0; j < cols; ++j) gb[j] += g[base + j];
        }
        if (pg.requires_grad) {
          double* gg = pg.grad->data();
          for (int j = 0; j < cols; ++j) gg[j] += g[base + j] * xhat[j];
        }
        if (px.requires_grad) {
          double m1 = 0.0, m2 = 0.0;
          for (int j = 0; j < cols; ++j) {
            const double dxh = g[base + j] * gv[j];
            m1 += dxh;
            m2 += dxh * xhat[j];
          }
          m1 /= cols;
          m2 /= cols;
          double* gx = px.grad->data();
          for (int j = 0; j < cols; ++j) {
            const double dxh = g[base + j] * gv[j];
            gx[base + j] += rstd * (dxh - m1 - xhat[j] * m2);
          }
        }
      }
    });
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  const bool rg = want_grad(x);
  Tensor out = make_out(x.shape, rg);
  kernels::gelu(x.numel(), x.ptr(), out.ptr());
  if (rg) {
    attach(out, {x}, [](const Tensor& o) {
      const Tensor& px = o.node->parents[0];
      if (px.requires_grad)
        kernels::gelu_grad(o.numel(), px.ptr(), o.gptr(), px.grad->data());
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  const bool rg = want_grad(x);
  double s = 0.0;
  const double* xv = x.ptr();
  for (std::size_t i = 0; i < x.numel(); ++i) s += xv[i];
  Tensor out = Tensor::scalar(s, rg);
  if (rg) {
    attach(out, {x}, [](const Tensor& o) {
      const Tensor& px = o.node->parents[0];
      if (!px.requires_grad) return;
      const double g = (*o.grad)[0];
      double* gx = px.grad->data();
      for (std::size_t i = 0; i < px.numel(); ++i) gx[i] += g;
    });
  }
  return out;
}

Tensor cross_entropy_masked(const Tensor& logits, const std::vector<int>& targets,
                            const std::vector<int>& positions) {
  const int T = logits.rows(), V = logits.cols();
  if (positions.empty())
    throw std::runtime_error("cross_entropy_masked: empty position set");
  if (positions.size() != targets.size())
    throw std::runtime_error("cross_entropy_masked: positions/targets length mismatch");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] < 0 || positions[i] >= T)
      throw std::runtime_error("cross_entropy_masked: position " + std::to_string(positions[i]) +
                               " out of range for " + std::to_string(T) + " rows");
    if (targets[i] < 0 || targets[i] >= V)
      throw std::runtime_error("cross_entropy_masked: target id " + std::to_string(targets[i]) +
                               " out of vocabulary range " + std::to_string(V));
  }
  const bool rg = want_grad(logits);
  const double* lv = logits.ptr();
  double loss = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double* row = lv + static_cast<std::size_t>(positions[i]) * V;
    double mx = -kInf;
    for (int j = 0; j < V; ++j)
      if (row[j] > mx) mx = row[j];
    double lse = 0.0;
    for (int j = 0; j < V; ++j) lse += std::exp(row[j] - mx);
    lse = mx + std::log(lse);
    loss += lse - row[targets[i]];
  }
  Tensor out = Tensor::scalar(loss, rg);
  if (rg) {
    attach(out, {logits}, [targets, positions, V](const Tensor& o) {
      const Tensor& pl = o.node->parents[0];
      if (!pl.requires_grad) return;
      const double g = (*o.grad)[0];
      const double* lv2 = pl.ptr();
      double* gl = pl.grad->data();
      for (std::size_t i = 0; i < positions.size(); ++i) {
        const std::size_t base = static_cast<std::size_t>(positions[i]) * V;
        const double* row = lv2 + base;
        double mx = -kInf;
        for (int j = 0; j < V; ++j)
          if (row[j] > mx) mx = row[j];
        double z = 0.0;
        for (int j = 0; j < V; ++j) z += std::exp(row[j] - mx);
        const double inv = 1.0 / z;
        for (int j = 0; j < V; ++j) gl[base + j] += g * std::exp(row[j] - mx) * inv;
        gl[base + targets[i]] -= g;
      }
    });
  }
  return out;
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  const int V = table.rows(), d = table.cols();
  if (ids.empty()) throw std::runtime_error("embedding_lookup: empty id list");
  for (int id : ids)
    if (id < 0 || id >= V)
      throw std::runtime_error("embedding_lookup: id " + std::to_string(id) +
                               " out of table range " + std::to_string(V));
  const bool rg = want_grad(table);
  Tensor out = make_out({static_cast<int>(ids.size()), d}, rg);
  const double* tv = table.ptr();
  double* y = out.ptr();
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::memcpy(y + i * d, tv + static_cast<std::size_t>(ids[i]) * d, sizeof(double) * d);
  if (rg) {
    attach(out, {table}, [ids, d](const Tensor& o) {
      const Tensor& pt = o.node->parents[0];
      if (!pt.requires_grad) return;
      double* gt = pt.grad->data();
      const double* g = o.gptr();
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (int j = 0; j < d; ++j)
          gt[static_cast<std::size_t>(ids[i]) * d + j] += g[i * static_cast<std::size_t>(d) + j];
    });
  }
  return out;
}

std::vector<double> log_softmax_row(const Tensor& x, int row) {
  const int V = x.cols();
  const double* rv = x.ptr() + static_cast<std::size_t>(row) * V;
  double mx = -kInf;
  for (int j = 0; j < V; ++j)
    if (rv[j] > mx) mx = rv[j];
  if (mx == -kInf) throw std::runtime_error("log_softmax_row: all entries are -inf");
  double z = 0.0;
  for (int j = 0; j < V; ++j) z += std::exp(rv[j] - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(V);
  for (int j = 0; j < V; ++j) out[j] = rv[j] - lse;
  return out;
}

}  // namespace slp
