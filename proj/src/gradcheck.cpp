#include "multiwave/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "multiwave/autodiff.hpp"
#include "multiwave/components.hpp"
#include "multiwave/grouping.hpp"
#include "multiwave/wavelet.hpp"

namespace multiwave::gradcheck {

namespace {

constexpr double kStep = 1e-5;
constexpr double kTol = 1e-4;

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng,
                     double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.v) v = d(rng);
  return t;
}

// Keeps values away from the ReLU kink so the finite-difference stencil
// never straddles it.
Tensor away_from_zero(Tensor t, double margin = 0.05) {
  for (auto& v : t.v)
    if (std::abs(v) < margin) v = v < 0.0 ? v - margin : v + margin;
  return t;
}

// Reduces an arbitrary-shape output to a scalar with fixed random
// weights so sign errors cannot cancel. The weights are a pure function
// of the output shape: the forward closure is re-evaluated many times
// during finite differencing and must stay deterministic.
ad::Var project(const ad::Var& out, std::mt19937_64&) {
  if (out->val.numel() == 1) return out;
  std::uint64_t seed = 0x9e3779b9;
  for (std::size_t d : out->val.shape) seed = seed * 1315423911ULL + d;
  std::mt19937_64 rng(seed);
  return ad::sum_all(ad::mul(out, ad::constant(random_tensor(
                                      out->val.shape, rng, 0.1, 1.0))));
}

CheckResult run_case(const std::string& name,
                     const std::vector<ad::Var>& params,
                     const std::function<ad::Var()>& forward) {
  CheckResult result;
  result.name = name;

  for (const auto& p : params) p->zero_grad();
  ad::backward(forward());
  std::vector<Tensor> analytic;
  for (const auto& p : params) analytic.push_back(p->grad);

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& vals = params[pi]->val.v;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + kStep;
      const double up = forward()->val.v[0];
      vals[i] = saved - kStep;
      const double dn = forward()->val.v[0];
      vals[i] = saved;
      const double fd = (up - dn) / (2.0 * kStep);
      const double a = analytic[pi].v[i];
      const double rel =
          std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
      result.max_rel_err = std::max(result.max_rel_err, rel);
      ++result.checked;
    }
  }
  result.passed = result.max_rel_err < kTol;
  return result;
}

}  // namespace

std::vector<CheckResult> check_ops(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  auto P = [&](std::vector<std::size_t> shape, double lo = -1.0,
               double hi = 1.0) {
    return ad::param(random_tensor(std::move(shape), rng, lo, hi));
  };

  {
    auto a = P({3, 4}), b = P({3, 4});
    out.push_back(run_case("add", {a, b}, [&] {
      return project(ad::add(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({4});
    out.push_back(run_case("add-bias", {a, b}, [&] {
      return project(ad::add(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({1});
    out.push_back(run_case("add-scalar", {a, b}, [&] {
      return project(ad::add(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({3, 4});
    out.push_back(run_case("sub", {a, b}, [&] {
      return project(ad::sub(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({3, 4});
    out.push_back(run_case("mul", {a, b}, [&] {
      return project(ad::mul(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({1});
    out.push_back(run_case("mul-scalar", {a, b}, [&] {
      return project(ad::mul(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4});
    out.push_back(run_case("scale", {a}, [&] {
      return project(ad::scale(a, 1.7), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({4, 2});
    out.push_back(run_case("matmul", {a, b}, [&] {
      return project(ad::matmul(a, b), rng);
    }));
  }
  {
    auto a = P({3, 4}), b = P({4});
    out.push_back(run_case("matvec", {a, b}, [&] {
      return project(ad::matmul(a, b), rng);
    }));
  }
  {
    auto a = P({4}), b = P({4, 2});
    out.push_back(run_case("vecmat", {a, b}, [&] {
      return project(ad::matmul(a, b), rng);
    }));
  }
  {
    auto a = P({3, 5});
    out.push_back(run_case("transpose", {a}, [&] {
      return project(ad::transpose(a), rng);
    }));
  }
  {
    auto a = ad::param(away_from_zero(random_tensor({3, 4}, rng)));
    out.push_back(run_case("relu", {a}, [&] {
      return project(ad::relu(a), rng);
    }));
  }
  {
    auto a = P({3, 4});
    out.push_back(run_case("sigmoid", {a}, [&] {
      return project(ad::sigmoid(a), rng);
    }));
  }
  {
    auto a = P({3, 4});
    out.push_back(run_case("tanh", {a}, [&] {
      return project(ad::tanh_op(a), rng);
    }));
  }
  {
    auto a = P({5});
    out.push_back(run_case("softmax-vec", {a}, [&] {
      return project(ad::softmax(a), rng);
    }));
  }
  {
    auto a = P({3, 4});
    out.push_back(run_case("softmax-rows", {a}, [&] {
      return project(ad::softmax(a), rng);
    }));
  }
  {
    auto x = P({8, 2}), w = P({3, 2, 3}), b = P({3});
    out.push_back(run_case("conv1d", {x, w, b}, [&] {
      return project(ad::conv1d(x, w, b), rng);
    }));
  }
  {
    auto x = P({6, 3});
    out.push_back(run_case("mean_over_time", {x}, [&] {
      return project(ad::mean_over_time(x), rng);
    }));
  }
  {
    auto x = P({3, 4});
    out.push_back(
        run_case("sum_all", {x}, [&] { return ad::sum_all(x); }));
  }
  {
    auto x = P({3, 4});
    out.push_back(
        run_case("mean_all", {x}, [&] { return ad::mean_all(x); }));
  }
  {
    auto a = P({3}), b = P({4});
    out.push_back(run_case("concat", {a, b}, [&] {
      return project(ad::concat({a, b}), rng);
    }));
  }
  {
    auto a = P({6}), b = P({6}), c = P({6});
    out.push_back(run_case("stack_cols", {a, b, c}, [&] {
      return project(ad::stack_cols({a, b, c}), rng);
    }));
  }
  {
    auto a = P({8});
    out.push_back(run_case("slice", {a}, [&] {
      return project(ad::slice(a, 2, 4), rng);
    }));
  }
  {
    auto a = P({4, 3});
    out.push_back(run_case("row", {a}, [&] {
      return project(ad::row(a, 2), rng);
    }));
  }
  {
    auto x = P({5, 4}), g = P({4}, 0.5, 1.5), b = P({4});
    out.push_back(run_case("layer_norm", {x, g, b}, [&] {
      return project(ad::layer_norm(x, g, b), rng);
    }));
  }
  {
    auto x = P({5, 3});
    out.push_back(run_case("pad_rows_symmetric", {x}, [&] {
      return project(ad::pad_rows_symmetric(x, 2, 1), rng);
    }));
  }
  {
    auto pred = P({3});
    const Tensor target = random_tensor({3}, rng);
    out.push_back(run_case("loss_mse", {pred}, [&] {
      return ad::loss_mse(pred, target);
    }));
  }
  {
    auto logits = P({4});
    out.push_back(run_case("loss_cross_entropy", {logits}, [&] {
      return ad::loss_cross_entropy(logits, 2);
    }));
  }
  return out;
}

std::vector<CheckResult> check_models(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  const std::vector<components::Kind> kinds = {
      components::Kind::MLP,     components::Kind::LSTM,
      components::Kind::CNNAttn, components::Kind::CNNLSTM,
      components::Kind::FCN,     components::Kind::Transformer};
  for (auto kind : kinds) {
    components::ComponentConfig cfg;
    cfg.kind = kind;
    cfg.hidden = 6;
    cfg.kernel = 3;
    cfg.heads = 2;
    auto model = components::make_component(cfg, 2, rng);
    auto x = ad::param(away_from_zero(random_tensor({12, 2}, rng)));
    std::vector<ad::Var> params = model->params();
    params.push_back(x);
    out.push_back(
        run_case("component-" + components::kind_to_string(kind), params,
                 [&] { return project(model->forward(x), rng); }));
  }

  // Fused model over a small two-rate sample, masks and baseline on.
  {
    wavelet::Signal fast{"a", {}, 16.0};
    wavelet::Signal slow{"b", {}, 8.0};
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (std::size_t i = 0; i < 16; ++i) fast.values.push_back(d(rng));
    for (std::size_t i = 0; i < 8; ++i) slow.values.push_back(d(rng));
    auto plan = grouping::plan_grouping({{"a", 16.0}, {"b", 8.0}}, 3);
    const auto filters = wavelet::haar();
    std::map<std::string, wavelet::Decomposition> decs;
    decs.emplace("a", wavelet::decompose(fast, filters, 3));
    decs.emplace("b", wavelet::decompose(slow, filters, 2));

    components::PreparedSample sample;
    sample.inputs = grouping::assemble_inputs(decs, plan);
    sample.aligned = {{"a", fast.values},
                      {"b", grouping::resample_linear(slow.values, 16)}};
    sample.label = 0.7;

    components::MultiWaveConfig cfg;
    cfg.component.kind = components::Kind::MLP;
    cfg.component.hidden = 5;
    cfg.out_dim = 1;
    cfg.add_baseline = true;
    cfg.masks_enabled = true;
    components::MultiWaveModel model(plan, cfg, rng);
    out.push_back(run_case("multiwave-model", model.params(), [&] {
      return ad::loss_mse(model.forward(sample), Tensor::scalar(0.7));
    }));
  }
  return out;
}

std::vector<CheckResult> check_all(std::uint64_t seed) {
  auto out = check_ops(seed);
  auto models = check_models(seed);
  out.insert(out.end(), models.begin(), models.end());
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return !results.empty();
}

std::string to_report(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  for (const auto& r : results)
    os << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  elements="
       << r.checked << "  max_rel_err=" << r.max_rel_err << "\n";
  return os.str();
}

}  // namespace multiwave::gradcheck
