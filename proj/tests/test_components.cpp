#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "multiwave/components.hpp"
#include "multiwave/wavelet.hpp"

using namespace multiwave;

namespace {

Tensor random_seq(std::size_t t, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Tensor x = Tensor::zeros({t, c});
  for (auto& v : x.v) v = d(rng);
  return x;
}

components::PreparedSample two_rate_sample(std::uint64_t seed,
                                           grouping::GroupingPlan& plan_out) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  wavelet::Signal fast{"a", {}, 16.0};
  wavelet::Signal slow{"b", {}, 8.0};
  for (int i = 0; i < 16; ++i) fast.values.push_back(d(rng));
  for (int i = 0; i < 8; ++i) slow.values.push_back(d(rng));
  plan_out = grouping::plan_grouping({{"a", 16.0}, {"b", 8.0}}, 3);
  const auto filters = wavelet::haar();
  std::map<std::string, wavelet::Decomposition> decs;
  decs.emplace("a", wavelet::decompose(fast, filters, 3));
  decs.emplace("b", wavelet::decompose(slow, filters, 2));
  components::PreparedSample s;
  s.inputs = grouping::assemble_inputs(decs, plan_out);
  s.aligned = {{"a", fast.values},
               {"b", grouping::resample_linear(slow.values, 16)}};
  s.label = 1.0;
  s.uniform_rate = false;
  return s;
}

}  // namespace

TEST_CASE("every component kind maps any length to a fixed embedding") {
  const std::vector<components::Kind> kinds = {
      components::Kind::MLP,     components::Kind::LSTM,
      components::Kind::CNNAttn, components::Kind::CNNLSTM,
      components::Kind::FCN,     components::Kind::Transformer};
  for (auto kind : kinds) {
    CAPTURE(components::kind_to_string(kind));
    components::ComponentConfig cfg;
    cfg.kind = kind;
    cfg.hidden = 6;
    cfg.kernel = 3;
    cfg.heads = 2;
    std::mt19937_64 rng(3);
    auto model = components::make_component(cfg, 2, rng);
    CHECK(model->embed_dim() == 6);
    for (std::size_t t : {2u, 5u, 12u}) {
      auto out = model->forward(ad::constant(random_seq(t, 2, 10 + t)));
      REQUIRE(out->val.shape == std::vector<std::size_t>{6});
      CHECK(out->val.all_finite());
    }
    for (const auto& p : model->params()) CHECK(p->val.all_finite());
  }
}

TEST_CASE("component kind names round-trip") {
  for (const char* name :
       {"mlp", "lstm", "cnn-attn", "cnn-lstm", "fcn", "transformer"})
    CHECK(components::kind_to_string(components::kind_from_string(name)) ==
          name);
  CHECK_THROWS_AS(components::kind_from_string("gru"), std::invalid_argument);
}

TEST_CASE("multiwave model forward and parameter gating") {
  grouping::GroupingPlan plan;
  auto sample = two_rate_sample(21, plan);

  components::MultiWaveConfig cfg;
  cfg.component.kind = components::Kind::MLP;
  cfg.component.hidden = 5;
  cfg.out_dim = 1;
  cfg.masks_enabled = true;
  std::mt19937_64 rng(4);
  components::MultiWaveModel model(plan, cfg, rng);
  auto out = model.forward(sample);
  REQUIRE(out->val.shape == std::vector<std::size_t>{1});
  CHECK(out->val.all_finite());

  components::MultiWaveConfig nomask = cfg;
  nomask.masks_enabled = false;
  std::mt19937_64 rng2(4);
  components::MultiWaveModel plainer(plan, nomask, rng2);
  CHECK(components::param_count(model.params()) >
        components::param_count(plainer.params()));
  CHECK(plainer.forward(sample)->val.all_finite());
}

TEST_CASE("zeroed mask removes a subsignal from the forward pass") {
  grouping::GroupingPlan plan;
  auto sample = two_rate_sample(22, plan);
  components::MultiWaveConfig cfg;
  cfg.component.kind = components::Kind::MLP;
  cfg.component.hidden = 4;
  std::mt19937_64 rng(9);
  components::MultiWaveModel model(plan, cfg, rng);

  const double before = model.forward(sample)->val.v[0];
  // perturb one gated column's data; output must change
  auto perturbed = sample;
  for (auto& [name, vals] : perturbed.inputs[0].columns)
    for (auto& v : vals) v += 0.5;
  CHECK(model.forward(perturbed)->val.v[0] != doctest::Approx(before));
  // close the gate: the same perturbation is now invisible
  model.mask_bank().weight(1, "a")->val.v[0] = -1.0;
  const double gated = model.forward(sample)->val.v[0];
  CHECK(model.forward(perturbed)->val.v[0] == doctest::Approx(gated));
}

TEST_CASE("plain model consumes aligned signals") {
  grouping::GroupingPlan plan;
  auto sample = two_rate_sample(23, plan);
  components::ComponentConfig cfg;
  cfg.kind = components::Kind::MLP;
  cfg.hidden = 4;
  std::mt19937_64 rng(2);
  components::PlainModel model(2, cfg, 1, rng);
  auto out = model.forward(sample);
  REQUIRE(out->val.shape == std::vector<std::size_t>{1});
  CHECK(out->val.all_finite());
}

TEST_CASE("fft baseline requires a uniform rate") {
  grouping::GroupingPlan plan;
  auto sample = two_rate_sample(24, plan);
  components::ComponentConfig cfg;
  cfg.kind = components::Kind::MLP;
  cfg.hidden = 4;
  std::mt19937_64 rng(2);
  components::FftBaselineModel model(2, cfg, 1, rng);
  CHECK_THROWS_AS(model.forward(sample), std::invalid_argument);
  sample.uniform_rate = true;
  CHECK(model.forward(sample)->val.all_finite());
}

TEST_CASE("magnitude spectrum peaks at the signal frequency") {
  std::vector<double> x(32);
  for (std::size_t t = 0; t < x.size(); ++t)
    x[t] = std::cos(2.0 * M_PI * 4.0 * t / 32.0);
  const auto mag = components::magnitude_spectrum(x);
  REQUIRE(mag.size() == 17);
  const std::size_t peak =
      std::max_element(mag.begin(), mag.end()) - mag.begin();
  CHECK(peak == 4);
}

TEST_CASE("param_count sums tensor sizes") {
  auto a = ad::param(Tensor::zeros({3, 4}));
  auto b = ad::param(Tensor::zeros({5}));
  CHECK(components::param_count({a, b}) == 17);
}
