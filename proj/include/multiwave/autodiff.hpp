#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "multiwave/tensor.hpp"

namespace multiwave::ad {

struct Node;
using Var = std::shared_ptr<Node>;

// One record on the tape. Leaf nodes (constants, parameters) have no
// inputs; op nodes keep their inputs alive and a closure that scatters
// the output gradient back to them.
struct Node {
  Tensor val;
  Tensor grad;  // allocated iff requires_grad
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<Var> inputs;
  std::function<void(Node&)> backprop;

  void zero_grad() {
    std::fill(grad.v.begin(), grad.v.end(), 0.0);
  }
};

// When set, every forward op and backward pass asserts that all produced
// values are finite and throws otherwise.
extern bool g_check_finite;

Var constant(Tensor t);
Var param(Tensor t);

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                    std::mt19937_64& rng);

// --- forward ops ------------------------------------------------------
Var add(const Var& a, const Var& b);       // same shape, or b = [n] bias
                                           // against [m,n], or b scalar
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);       // elementwise, or b scalar
Var scale(const Var& a, double c);
Var matmul(const Var& a, const Var& b);    // [m,k]x[k,n]; matvec [m,k]x[k];
                                           // vecmat [k]x[k,n]
Var transpose(const Var& a);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var softmax(const Var& a);                 // [n], or row-wise on [m,n]
Var conv1d(const Var& x, const Var& w, const Var& bias);  // see kernels.hpp
Var mean_over_time(const Var& x);          // [T,F] -> [F]
Var sum_all(const Var& a);                 // -> scalar
Var mean_all(const Var& a);                // -> scalar
Var concat(const std::vector<Var>& parts);         // 1-D parts
Var stack_cols(const std::vector<Var>& cols);      // C vectors [T] -> [T,C]
Var slice(const Var& a, std::size_t start, std::size_t len);  // 1-D
Var row(const Var& a, std::size_t t);      // [T,C] -> [C]
Var layer_norm(const Var& x, const Var& gain, const Var& bias);
// Half-sample symmetric extension of a [T,C] sequence along time.
Var pad_rows_symmetric(const Var& x, std::size_t pad_lo, std::size_t pad_hi);

// --- losses -----------------------------------------------------------
Var loss_mse(const Var& pred, const Tensor& target);
Var loss_cross_entropy(const Var& logits, std::size_t cls);

// --- reverse pass -----------------------------------------------------
// loss must be scalar. Accumulates into .grad of every reachable node
// with requires_grad; parameter grads are NOT zeroed first, so calls
// within one batch accumulate.
void backward(const Var& loss);

// --- optimizer --------------------------------------------------------
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Var> params, AdamConfig cfg = {});
  void step();
  void zero_grad();
  long step_count() const { return step_; }
  const std::vector<Var>& params() const { return params_; }

 private:
  AdamConfig cfg_;
  std::vector<Var> params_;
  std::vector<Tensor> m_, v_;
  long step_ = 0;
};

}  // namespace multiwave::ad
