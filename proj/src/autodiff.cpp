#include "multiwave/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "multiwave/kernels.hpp"

namespace multiwave::ad {

bool g_check_finite = false;

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              shape_str(a.shape) + " vs " +
                              shape_str(b.shape));
}

void assert_finite(const Tensor& t, const char* op) {
  if (g_check_finite && !t.all_finite())
    throw std::runtime_error(std::string(op) + ": non-finite value produced");
}

bool any_grad(const std::vector<Var>& inputs) {
  for (const auto& in : inputs)
    if (in->requires_grad) return true;
  return false;
}

// Builds an op node. The backprop closure is only attached when some
// input needs gradients; otherwise the tape does not grow.
Var make_node(const char* op, Tensor val, std::vector<Var> inputs,
              std::function<void(Node&)> backprop) {
  assert_finite(val, op);
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->op = op;
  if (any_grad(inputs)) {
    n->requires_grad = true;
    n->grad = Tensor::zeros(n->val.shape);
    n->inputs = std::move(inputs);
    n->backprop = std::move(backprop);
  }
  return n;
}

Var elementwise(const char* op, const Var& a, double (*f)(double),
                double (*df)(double)) {
  Tensor out = a->val;
  for (auto& x : out.v) x = f(x);
  return make_node(op, std::move(out), {a}, [a, df](Node& n) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < n.val.numel(); ++i)
      a->grad.v[i] += n.grad.v[i] * df(a->val.v[i]);
  });
}

// Shared by elementwise ops whose derivative is cheapest from the output.
Var elementwise_from_out(const char* op, const Var& a, double (*f)(double),
                         double (*df_out)(double)) {
  Tensor out = a->val;
  for (auto& x : out.v) x = f(x);
  return make_node(op, std::move(out), {a}, [a, df_out](Node& n) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < n.val.numel(); ++i)
      a->grad.v[i] += n.grad.v[i] * df_out(n.val.v[i]);
  });
}

void softmax_row(const double* x, double* y, std::size_t n) {
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= sum;
}

}  // namespace

Var constant(Tensor t) {
  auto n = std::make_shared<Node>();
  n->val = std::move(t);
  return n;
}

Var param(Tensor t) {
  auto n = std::make_shared<Node>();
  n->grad = Tensor::zeros(t.shape);
  n->val = std::move(t);
  n->requires_grad = true;
  return n;
}

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                    std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& x : t.v) x = dist(rng);
  return t;
}

Var add(const Var& a, const Var& b) {
  const Tensor& av = a->val;
  const Tensor& bv = b->val;
  if (av.same_shape(bv)) {
    Tensor out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out.v[i] += bv.v[i];
    return make_node("add", std::move(out), {a, b}, [a, b](Node& n) {
      if (a->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          a->grad.v[i] += n.grad.v[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          b->grad.v[i] += n.grad.v[i];
    });
  }
  // bias broadcast: [m,n] + [n]
  if (av.rank() == 2 && bv.rank() == 1 && bv.shape[0] == av.cols()) {
    Tensor out = av;
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) += bv.v[j];
    return make_node("add", std::move(out), {a, b}, [a, b](Node& n) {
      if (a->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          a->grad.v[i] += n.grad.v[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < n.grad.rows(); ++i)
          for (std::size_t j = 0; j < n.grad.cols(); ++j)
            b->grad.v[j] += n.grad.at(i, j);
    });
  }
  // scalar broadcast
  if (bv.numel() == 1) {
    Tensor out = av;
    for (auto& x : out.v) x += bv.v[0];
    return make_node("add", std::move(out), {a, b}, [a, b](Node& n) {
      if (a->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          a->grad.v[i] += n.grad.v[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          b->grad.v[0] += n.grad.v[i];
    });
  }
  shape_error("add", av, bv);
}

Var sub(const Var& a, const Var& b) { return add(a, scale(b, -1.0)); }

Var mul(const Var& a, const Var& b) {
  const Tensor& av = a->val;
  const Tensor& bv = b->val;
  if (av.same_shape(bv)) {
    Tensor out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out.v[i] *= bv.v[i];
    return make_node("mul", std::move(out), {a, b}, [a, b](Node& n) {
      if (a->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          a->grad.v[i] += n.grad.v[i] * b->val.v[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          b->grad.v[i] += n.grad.v[i] * a->val.v[i];
    });
  }
  if (bv.numel() == 1) {
    Tensor out = av;
    for (auto& x : out.v) x *= bv.v[0];
    return make_node("mul", std::move(out), {a, b}, [a, b](Node& n) {
      if (a->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          a->grad.v[i] += n.grad.v[i] * b->val.v[0];
      if (b->requires_grad)
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
          b->grad.v[0] += n.grad.v[i] * a->val.v[i];
    });
  }
  if (av.numel() == 1) return mul(b, a);
  shape_error("mul", av, bv);
}

Var scale(const Var& a, double c) {
  Tensor out = a->val;
  for (auto& x : out.v) x *= c;
  return make_node("scale", std::move(out), {a}, [a, c](Node& n) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < n.grad.numel(); ++i)
      a->grad.v[i] += n.grad.v[i] * c;
  });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a->val;
  const Tensor& bv = b->val;
  // Treat a 1-D left operand as a row vector and a 1-D right operand as
  // a column vector; the result is squeezed accordingly.
  const bool a_vec = av.rank() == 1;
  const bool b_vec = bv.rank() == 1;
  const std::size_t m = a_vec ? 1 : av.rows();
  const std::size_t k = a_vec ? av.shape[0] : av.cols();
  const std::size_t k2 = b_vec ? bv.shape[0] : bv.rows();
  const std::size_t n = b_vec ? 1 : bv.cols();
  if (k != k2 || (!a_vec && av.rank() != 2) || (!b_vec && bv.rank() != 2))
    shape_error("matmul", av, bv);

  Tensor out = Tensor::zeros(a_vec || b_vec
                                 ? std::vector<std::size_t>{a_vec ? n : m}
                                 : std::vector<std::size_t>{m, n});
  if (a_vec && b_vec) out = Tensor::zeros({1});
  kernels::matmul_auto(av.v.data(), bv.v.data(), out.v.data(), m, k, n);
  return make_node(
      "matmul", std::move(out), {a, b}, [a, b, m, k, n](Node& node) {
        const double* g = node.grad.v.data();
        if (a->requires_grad) {  // dA += G * B^T
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j)
                acc += g[i * n + j] * b->val.v[p * n + j];
              a->grad.v[i * k + p] += acc;
            }
        }
        if (b->requires_grad) {  // dB += A^T * G
          for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j) {
              double acc = 0.0;
              for (std::size_t i = 0; i < m; ++i)
                acc += a->val.v[i * k + p] * g[i * n + j];
              b->grad.v[p * n + j] += acc;
            }
        }
      });
}

Var transpose(const Var& a) {
  const Tensor& av = a->val;
  if (av.rank() != 2)
    throw std::invalid_argument("transpose: expected 2-D, got " +
                                shape_str(av.shape));
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = av.at(i, j);
  return make_node("transpose", std::move(out), {a}, [a, m, n](Node& node) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a->grad.v[i * n + j] += node.grad.v[j * m + i];
  });
}

Var relu(const Var& a) {
  return elementwise(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return elementwise_from_out(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double y) { return y * (1.0 - y); });
}

Var tanh_op(const Var& a) {
  return elementwise_from_out(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double y) { return 1.0 - y * y; });
}

Var softmax(const Var& a) {
  const Tensor& av = a->val;
  const std::size_t rows = av.rank() == 2 ? av.rows() : 1;
  const std::size_t n = av.rank() == 2 ? av.cols() : av.numel();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t r = 0; r < rows; ++r)
    softmax_row(av.v.data() + r * n, out.v.data() + r * n, n);
  return make_node("softmax", std::move(out), {a}, [a, rows, n](Node& node) {
    if (!a->requires_grad) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = node.val.v.data() + r * n;
      const double* g = node.grad.v.data() + r * n;
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[i] * y[i];
      for (std::size_t i = 0; i < n; ++i)
        a->grad.v[r * n + i] += y[i] * (g[i] - dot);
    }
  });
}

Var conv1d(const Var& x, const Var& w, const Var& bias) {
  const Tensor& xv = x->val;
  const Tensor& wv = w->val;
  if (xv.rank() != 2 || wv.rank() != 3 || wv.shape[1] != xv.cols())
    shape_error("conv1d", xv, wv);
  const std::size_t t = xv.rows(), cin = xv.cols();
  const std::size_t cout = wv.shape[0], kw = wv.shape[2];
  if (t < kw)
    throw std::invalid_argument(
        "conv1d: input length " + std::to_string(t) +
        " shorter than kernel " + std::to_string(kw));
  if (bias && bias->val.numel() != cout) shape_error("conv1d", wv, bias->val);
  const std::size_t tout = t - kw + 1;
  Tensor out = Tensor::zeros({tout, cout});
  kernels::conv1d_auto(xv.v.data(), wv.v.data(),
                       bias ? bias->val.v.data() : nullptr, out.v.data(), t,
                       cin, cout, kw);
  std::vector<Var> ins = {x, w};
  if (bias) ins.push_back(bias);
  return make_node(
      "conv1d", std::move(out), std::move(ins),
      [x, w, bias, t, cin, cout, kw, tout](Node& node) {
        const double* g = node.grad.v.data();
        if (x->requires_grad) {
          for (std::size_t ti = 0; ti < tout; ++ti)
            for (std::size_t co = 0; co < cout; ++co) {
              const double gv = g[ti * cout + co];
              const double* wc = w->val.v.data() + co * cin * kw;
              for (std::size_t ci = 0; ci < cin; ++ci)
                for (std::size_t q = 0; q < kw; ++q)
                  x->grad.v[(ti + q) * cin + ci] += gv * wc[ci * kw + q];
            }
        }
        if (w->requires_grad) {
          for (std::size_t ti = 0; ti < tout; ++ti)
            for (std::size_t co = 0; co < cout; ++co) {
              const double gv = g[ti * cout + co];
              double* wc = w->grad.v.data() + co * cin * kw;
              for (std::size_t ci = 0; ci < cin; ++ci)
                for (std::size_t q = 0; q < kw; ++q)
                  wc[ci * kw + q] += gv * x->val.v[(ti + q) * cin + ci];
            }
        }
        if (bias && bias->requires_grad) {
          for (std::size_t ti = 0; ti < tout; ++ti)
            for (std::size_t co = 0; co < cout; ++co)
              bias->grad.v[co] += g[ti * cout + co];
        }
      });
}

Var mean_over_time(const Var& x) {
  const Tensor& xv = x->val;
  if (xv.rank() != 2)
    throw std::invalid_argument("mean_over_time: expected 2-D, got " +
                                shape_str(xv.shape));
  const std::size_t t = xv.rows(), f = xv.cols();
  Tensor out = Tensor::zeros({f});
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < f; ++j) out.v[j] += xv.at(i, j);
  for (auto& v : out.v) v /= static_cast<double>(t);
  return make_node("mean_over_time", std::move(out), {x}, [x, t, f](Node& n) {
    if (!x->requires_grad) return;
    const double inv = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < f; ++j)
        x->grad.v[i * f + j] += n.grad.v[j] * inv;
  });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (double x : a->val.v) s += x;
  return make_node("sum", Tensor::scalar(s), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    for (auto& g : a->grad.v) g += n.grad.v[0];
  });
}

Var mean_all(const Var& a) {
  if (a->val.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(a->val.numel()));
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p->val.rank() != 1)
      throw std::invalid_argument("concat: expected 1-D parts, got " +
                                  shape_str(p->val.shape));
    total += p->val.numel();
  }
  Tensor out = Tensor::zeros({total});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p->val.v.begin(), p->val.v.end(), out.v.begin() + off);
    off += p->val.numel();
  }
  return make_node("concat", std::move(out), parts, [parts](Node& n) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      if (p->requires_grad)
        for (std::size_t i = 0; i < p->val.numel(); ++i)
          p->grad.v[i] += n.grad.v[off + i];
      off += p->val.numel();
    }
  });
}

Var stack_cols(const std::vector<Var>& cols) {
  if (cols.empty()) throw std::invalid_argument("stack_cols: no inputs");
  const std::size_t t = cols[0]->val.numel();
  const std::size_t c = cols.size();
  for (const auto& col : cols)
    if (col->val.rank() != 1 || col->val.numel() != t)
      throw std::invalid_argument("stack_cols: columns must be equal-length "
                                  "vectors, got " +
                                  shape_str(col->val.shape));
  Tensor out = Tensor::zeros({t, c});
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i < t; ++i) out.at(i, j) = cols[j]->val.v[i];
  return make_node("stack_cols", std::move(out), cols, [cols, t, c](Node& n) {
    for (std::size_t j = 0; j < c; ++j) {
      if (!cols[j]->requires_grad) continue;
      for (std::size_t i = 0; i < t; ++i)
        cols[j]->grad.v[i] += n.grad.v[i * c + j];
    }
  });
}

Var slice(const Var& a, std::size_t start, std::size_t len) {
  if (a->val.rank() != 1 || start + len > a->val.numel())
    throw std::invalid_argument("slice: out of range on " +
                                shape_str(a->val.shape));
  Tensor out = Tensor::zeros({len});
  std::copy(a->val.v.begin() + start, a->val.v.begin() + start + len,
            out.v.begin());
  return make_node("slice", std::move(out), {a}, [a, start, len](Node& n) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < len; ++i)
      a->grad.v[start + i] += n.grad.v[i];
  });
}

Var row(const Var& a, std::size_t t) {
  if (a->val.rank() != 2 || t >= a->val.rows())
    throw std::invalid_argument("row: out of range on " +
                                shape_str(a->val.shape));
  const std::size_t c = a->val.cols();
  Tensor out = Tensor::zeros({c});
  std::copy(a->val.v.begin() + t * c, a->val.v.begin() + (t + 1) * c,
            out.v.begin());
  return make_node("row", std::move(out), {a}, [a, t, c](Node& n) {
    if (!a->requires_grad) return;
    for (std::size_t j = 0; j < c; ++j) a->grad.v[t * c + j] += n.grad.v[j];
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias) {
  constexpr double kEps = 1e-5;
  const Tensor& xv = x->val;
  const std::size_t rows = xv.rank() == 2 ? xv.rows() : 1;
  const std::size_t n = xv.rank() == 2 ? xv.cols() : xv.numel();
  if (gain->val.numel() != n || bias->val.numel() != n)
    shape_error("layer_norm", xv, gain->val);
  Tensor out = Tensor::zeros(xv.shape);
  Tensor xhat = Tensor::zeros(xv.shape);
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.v.data() + r * n;
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += xr[i];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + kEps);
    for (std::size_t i = 0; i < n; ++i) {
      xhat.v[r * n + i] = (xr[i] - mu) * inv_std[r];
      out.v[r * n + i] = gain->val.v[i] * xhat.v[r * n + i] + bias->val.v[i];
    }
  }
  return make_node(
      "layer_norm", std::move(out), {x, gain, bias},
      [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std),
       rows, n](Node& node) {
        for (std::size_t r = 0; r < rows; ++r) {
          const double* g = node.grad.v.data() + r * n;
          const double* xh = xhat.v.data() + r * n;
          if (gain->requires_grad)
            for (std::size_t i = 0; i < n; ++i)
              gain->grad.v[i] += g[i] * xh[i];
          if (bias->requires_grad)
            for (std::size_t i = 0; i < n; ++i) bias->grad.v[i] += g[i];
          if (x->requires_grad) {
            double sum_gg = 0.0, sum_ggx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double gg = g[i] * gain->val.v[i];
              sum_gg += gg;
              sum_ggx += gg * xh[i];
            }
            const double invn = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
              const double gg = g[i] * gain->val.v[i];
              x->grad.v[r * n + i] +=
                  inv_std[r] * (gg - invn * sum_gg - xh[i] * invn * sum_ggx);
            }
          }
        }
      });
}

namespace {
std::size_t reflect_index(long long i, long long n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return static_cast<std::size_t>(i);
}
}  // namespace

Var pad_rows_symmetric(const Var& x, std::size_t pad_lo, std::size_t pad_hi) {
  const Tensor& xv = x->val;
  if (xv.rank() != 2)
    throw std::invalid_argument("pad_rows_symmetric: expected 2-D, got " +
                                shape_str(xv.shape));
  const std::size_t t = xv.rows(), c = xv.cols();
  const std::size_t tout = t + pad_lo + pad_hi;
  std::vector<std::size_t> src(tout);
  for (std::size_t i = 0; i < tout; ++i)
    src[i] = reflect_index(static_cast<long long>(i) -
                               static_cast<long long>(pad_lo),
                           static_cast<long long>(t));
  Tensor out = Tensor::zeros({tout, c});
  for (std::size_t i = 0; i < tout; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = xv.at(src[i], j);
  return make_node("pad_rows_symmetric", std::move(out), {x},
                   [x, src = std::move(src), c](Node& n) {
                     if (!x->requires_grad) return;
                     for (std::size_t i = 0; i < src.size(); ++i)
                       for (std::size_t j = 0; j < c; ++j)
                         x->grad.v[src[i] * c + j] += n.grad.v[i * c + j];
                   });
}

Var loss_mse(const Var& pred, const Tensor& target) {
  if (pred->val.numel() == 0) throw std::invalid_argument("mse: empty batch");
  if (!pred->val.same_shape(target)) shape_error("mse", pred->val, target);
  return mean_all(mul(sub(pred, constant(target)),
                      sub(pred, constant(target))));
}

Var loss_cross_entropy(const Var& logits, std::size_t cls) {
  const std::size_t n = logits->val.numel();
  if (n == 0) throw std::invalid_argument("cross_entropy: empty logits");
  if (cls >= n)
    throw std::invalid_argument("cross_entropy: class index " +
                                std::to_string(cls) + " out of range " +
                                std::to_string(n));
  Tensor probs = Tensor::zeros({n});
  softmax_row(logits->val.v.data(), probs.v.data(), n);
  const double loss = -std::log(probs.v[cls]);
  return make_node("cross_entropy", Tensor::scalar(loss), {logits},
                   [logits, probs = std::move(probs), cls](Node& node) {
                     if (!logits->requires_grad) return;
                     const double g = node.grad.v[0];
                     for (std::size_t i = 0; i < probs.numel(); ++i)
                       logits->grad.v[i] +=
                           g * (probs.v[i] - (i == cls ? 1.0 : 0.0));
                   });
}

void backward(const Var& loss) {
  if (loss->val.numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                shape_str(loss->val.shape));
  if (!loss->requires_grad) return;  // constant graph, all grads zero

  // Iterative post-order toposort; each node visited exactly once.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->inputs.size()) {
      Node* child = node->inputs[idx++].get();
      if (child->requires_grad && visited.insert(child).second)
        stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->grad.v[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop) node->backprop(*node);
    if (g_check_finite && !node->grad.all_finite())
      throw std::runtime_error(std::string(node->op) +
                               ": non-finite gradient");
  }
}

Adam::Adam(std::vector<Var> params, AdamConfig cfg)
    : cfg_(cfg), params_(std::move(params)) {
  if (!(cfg_.beta1 > 0 && cfg_.beta1 < 1 && cfg_.beta2 > 0 &&
        cfg_.beta2 < 1 && cfg_.eps > 0))
    throw std::invalid_argument("Adam: invalid hyperparameters");
  for (const auto& p : params_) {
    m_.push_back(Tensor::zeros(p->val.shape));
    v_.push_back(Tensor::zeros(p->val.shape));
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p->grad.same_shape(p->val))
      throw std::invalid_argument("Adam: parameter/gradient shape mismatch");
    for (std::size_t j = 0; j < p->val.numel(); ++j) {
      const double g = p->grad.v[j];
      m_[i].v[j] = cfg_.beta1 * m_[i].v[j] + (1.0 - cfg_.beta1) * g;
      v_[i].v[j] = cfg_.beta2 * v_[i].v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[i].v[j] / bc1;
      const double vhat = v_[i].v[j] / bc2;
      p->val.v[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

}  // namespace multiwave::ad
