#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "slp/rng.hpp"

namespace slp {

struct Node;

// Dense row-major tensor of 64-bit floats. Buffers are shared, so copies are
// cheap views of the same storage; shape is fixed at creation. When a tensor
// participates in a differentiable computation it carries a grad buffer of
// the same size and a tape node linking it to its inputs.
struct Tensor {
  std::vector<int> shape;
  std::shared_ptr<std::vector<double>> data;
  std::shared_ptr<std::vector<double>> grad;
  bool requires_grad = false;
  std::shared_ptr<Node> node;

  Tensor() = default;

  std::size_t numel() const { return data ? data->size() : 0; }
  int rows() const;
  int cols() const;
  double* ptr() { return data->data(); }
  const double* ptr() const { return data->data(); }
  double* gptr() { return grad->data(); }
  const double* gptr() const { return grad->data(); }

  double& at(int i) { return (*data)[static_cast<std::size_t>(i)]; }
  double at(int i) const { return (*data)[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) { return (*data)[static_cast<std::size_t>(i) * cols() + j]; }
  double at(int i, int j) const { return (*data)[static_cast<std::size_t>(i) * cols() + j]; }

  // Value of a scalar (1-element) tensor.
  double item() const;

  void ensure_grad();
  void zero_grad();

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double v, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor randn(std::vector<int> shape, Rng& rng, double std = 1.0,
                      bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
};

struct Node {
  std::vector<Tensor> parents;
  std::function<void(const Tensor& out)> backward;
};

// Thread-local switch: when disabled, ops skip tape construction and grad
// allocation entirely (inference path).
bool grad_enabled();
void set_grad_enabled(bool on);

struct NoGradGuard {
  NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Named trainable tensor. Copies share both value and grad storage; see
// make_grad_view for per-thread gradient accumulation.
struct Parameter {
  std::string name;
  Tensor value;

  Parameter() = default;
  Parameter(std::string n, Tensor v);

  // Same value buffer, fresh zeroed grad buffer. Used for data-parallel
  // training where each worker accumulates into its own gradients.
  Parameter make_grad_view() const;
};

// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
// reachable tensor that requires grad; repeated calls without zeroing add up.
void backward(const Tensor& loss);

void zero_grads(const std::vector<Parameter*>& params);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. States are keyed by parameter name; step_all throws
// if a parameter has no state. Gradients are left untouched.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

  void init(const std::vector<Parameter*>& params);
  void step_all(const std::vector<Parameter*>& params);

  AdamConfig& config() { return cfg_; }
  const std::unordered_map<std::string, AdamState>& states() const { return states_; }

 private:
  AdamConfig cfg_;
  std::unordered_map<std::string, AdamState> states_;
};

}  // namespace slp
