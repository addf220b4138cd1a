#include "slp/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace slp {

namespace {
thread_local bool t_grad_enabled = true;

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::runtime_error("tensor: non-positive dimension in shape");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}
}  // namespace

bool grad_enabled() { return t_grad_enabled; }
void set_grad_enabled(bool on) { t_grad_enabled = on; }

int Tensor::rows() const {
  if (shape.size() != 2) throw std::runtime_error("tensor: rows() on non-2D tensor");
  return shape[0];
}

int Tensor::cols() const {
  if (shape.size() != 2) throw std::runtime_error("tensor: cols() on non-2D tensor");
  return shape[1];
}

double Tensor::item() const {
  if (numel() != 1) throw std::runtime_error("tensor: item() on non-scalar");
  return (*data)[0];
}

void Tensor::ensure_grad() {
  if (!grad) grad = std::make_shared<std::vector<double>>(numel(), 0.0);
}

void Tensor::zero_grad() {
  ensure_grad();
  std::fill(grad->begin(), grad->end(), 0.0);
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  Tensor t;
  const std::size_t n = shape_numel(shape);
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(n, 0.0);
  t.requires_grad = requires_grad;
  if (requires_grad) t.ensure_grad();
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double v, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.data->begin(), t.data->end(), v);
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  if (n != values.size())
    throw std::runtime_error("tensor: value count does not match shape product");
  Tensor t;
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(std::move(values));
  t.requires_grad = requires_grad;
  if (requires_grad) t.ensure_grad();
  return t;
}

Tensor Tensor::randn(std::vector<int> shape, Rng& rng, double std, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  for (double& v : *t.data) v = rng.normal(0.0, std);
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
  value.requires_grad = true;
  value.ensure_grad();
}

Parameter Parameter::make_grad_view() const {
  Parameter p;
  p.name = name;
  p.value = value;  // shares data
  p.value.grad = std::make_shared<std::vector<double>>(value.numel(), 0.0);
  return p;
}

void backward(const Tensor& loss) {
  if (loss.numel() != 1) throw std::runtime_error("backward: loss must be a scalar");
  if (!loss.requires_grad)
    throw std::runtime_error("backward: loss does not require grad (no tape)");

  // Iterative post-order DFS over tape nodes; leaves have no node.
  std::vector<Tensor> order;
  std::unordered_set<const Node*> visited;
  struct Frame {
    Tensor t;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  if (loss.node) stack.push_back({loss, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent == 0) {
      if (visited.count(f.t.node.get())) {
        stack.pop_back();
        continue;
      }
      visited.insert(f.t.node.get());
    }
    if (f.next_parent < f.t.node->parents.size()) {
      Tensor p = f.t.node->parents[f.next_parent++];
      if (p.node && !visited.count(p.node.get())) stack.push_back({std::move(p), 0});
    } else {
      order.push_back(f.t);
      stack.pop_back();
    }
  }

  // Non-leaf grads are per-sweep scratch; only leaves (parameters) accumulate
  // across repeated calls.
  for (Tensor& t : order) t.zero_grad();

  Tensor seed = loss;
  seed.ensure_grad();
  (*seed.grad)[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (it->node->backward) it->node->backward(*it);
  }
}

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->value.zero_grad();
}

void AdamOptimizer::init(const std::vector<Parameter*>& params) {
  for (const Parameter* p : params) {
    AdamState st;
    st.m.assign(p->value.numel(), 0.0);
    st.v.assign(p->value.numel(), 0.0);
    st.step = 0;
    states_[p->name] = std::move(st);
  }
}

void AdamOptimizer::step_all(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    auto it = states_.find(p->name);
    if (it == states_.end())
      throw std::runtime_error("adam: no state for parameter '" + p->name + "'");
    AdamState& st = it->second;
    if (st.m.size() != p->value.numel())
      throw std::runtime_error("adam: state size mismatch for '" + p->name + "'");
    st.step += 1;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
    const std::size_t n = p->value.numel();
    double* w = p->value.ptr();
    const double* g = p->value.gptr();
    for (std::size_t i = 0; i < n; ++i) {
      st.m[i] = b1 * st.m[i] + (1.0 - b1) * g[i];
      st.v[i] = b2 * st.v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace slp
