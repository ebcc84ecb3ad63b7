#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "multiwave/training.hpp"

using namespace multiwave;

namespace {

training::PreparedDataset tiny_prepared() {
  const auto dataset = data::gen_band_dataset(1, 16.0, 1.0, 24, 8, 8, 7);
  return training::prepare(dataset, wavelet::haar(), 3);
}

training::TrainConfig quick_config() {
  training::TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.patience = 4;
  cfg.batch_size = 8;
  return cfg;
}

}  // namespace

TEST_CASE("mse and accuracy oracles") {
  CHECK(training::metric_mse({1.0, 2.0}, {0.0, 0.0}) ==
        doctest::Approx(2.5));
  CHECK(training::metric_accuracy({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}},
                                  {0, 1, 1}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("auc oracle and tie handling") {
  CHECK(training::metric_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK(training::metric_auc({0.5, 0.5}, {0, 1}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(training::metric_auc({0.2, 0.9}, {0, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(training::metric_auc({0.2, 0.9}, {1, 1}),
                  std::invalid_argument);
}

TEST_CASE("macro auc averages one-vs-rest") {
  const std::vector<std::vector<double>> scores = {
      {0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
  CHECK(training::metric_auc_macro(scores, {0, 1, 2}) ==
        doctest::Approx(1.0));
}

TEST_CASE("feasible l_max respects length and rate offsets") {
  data::SyntheticConfig cfg;
  cfg.signals = {{"s1", 2.0, 128.0}, {"s2", 2.0, 32.0}};
  cfg.n_train = 1;
  cfg.n_val = 1;
  cfg.n_test = 1;
  const auto d = data::gen_square_dataset(cfg);
  // 128 samples -> 7 levels; 32 samples at offset 2 -> 2 + 5 = 7
  CHECK(training::feasible_l_max(d) == 7);
}

TEST_CASE("prepare produces aligned component inputs") {
  const auto prepared = tiny_prepared();
  CHECK(prepared.plan.l_max == 3);
  CHECK(prepared.train.size() == 24);
  REQUIRE(!prepared.train.empty());
  const auto& s = prepared.train[0];
  CHECK(s.inputs.size() == 4);
  CHECK(s.aligned.size() == 2);
  CHECK(s.aligned[0].second.size() == 16);
  CHECK(s.uniform_rate);
}

TEST_CASE("training runs deterministically and restores best params") {
  const auto prepared = tiny_prepared();
  const auto cfg = quick_config();
  auto make_model = [&] {
    components::MultiWaveConfig mw;
    mw.component.kind = components::Kind::MLP;
    mw.component.hidden = 4;
    std::mt19937_64 rng(123);
    return std::make_unique<training::MultiWaveTrainable>(prepared.plan, mw,
                                                          rng);
  };
  auto m1 = make_model();
  auto r1 = training::train(*m1, prepared, cfg, 123);
  auto m2 = make_model();
  auto r2 = training::train(*m2, prepared, cfg, 123);
  CHECK(r1.test_metric == doctest::Approx(r2.test_metric).epsilon(1e-12));
  CHECK(r1.epochs >= 1);
  CHECK(std::isfinite(r1.test_metric));
  CHECK(!r1.mask_trail.empty());
  CHECK(training::evaluate(*m1, prepared, prepared.test) ==
        doctest::Approx(r1.test_metric).epsilon(1e-12));
}

TEST_CASE("plain arm trains on the same prepared data") {
  const auto prepared = tiny_prepared();
  components::ComponentConfig cc;
  cc.kind = components::Kind::MLP;
  cc.hidden = 4;
  std::mt19937_64 rng(5);
  training::PlainTrainable model(2, cc, 1, rng);
  const auto r = training::train(model, prepared, quick_config(), 5);
  CHECK(std::isfinite(r.test_metric));
  CHECK(r.mask_trail.empty());
}

TEST_CASE("checkpoints round-trip parameter values") {
  auto a = ad::param(Tensor::vec({1.0, 2.0, 3.0}));
  auto b = ad::param(Tensor::zeros({2, 2}));
  b->val.v = {4.0, 5.0, 6.0, 7.0};
  const auto path =
      (std::filesystem::temp_directory_path() / "mw_ckpt.json").string();
  training::save_checkpoint(path, {a, b}, "{\"kind\":\"mlp\"}");

  auto a2 = ad::param(Tensor::zeros({3}));
  auto b2 = ad::param(Tensor::zeros({2, 2}));
  const auto cfg = training::load_checkpoint(path, {a2, b2});
  CHECK(cfg == "{\"kind\":\"mlp\"}");
  CHECK(a2->val.v == a->val.v);
  CHECK(b2->val.v == b->val.v);

  auto wrong = ad::param(Tensor::zeros({4}));
  CHECK_THROWS_AS(training::load_checkpoint(path, {wrong, b2}),
                  std::runtime_error);
}

TEST_CASE("unknown experiments are rejected with the catalogue") {
  training::ExperimentSpec spec;
  spec.name = "does-not-exist";
  CHECK_THROWS_WITH_AS(training::run_experiment(spec),
                       doctest::Contains("synthetic-1"),
                       std::invalid_argument);
  CHECK(training::known_experiments().size() == 4);
}

TEST_CASE("result serialization carries the metric name") {
  training::ExperimentResult r;
  r.name = "demo";
  r.metric_name = "mse";
  r.rows.push_back({"2-signals", "plain", 123, 1.5});
  r.summary.push_back({"2-signals", "plain", 1.5, 0.0});
  const auto csv = training::result_csv(r);
  CHECK(csv.find("setting,arm,seed,mse") == 0);
  CHECK(csv.find("2-signals,plain,123,1.5") != std::string::npos);
  const auto json = training::result_summary_json(r);
  CHECK(json.find("\"metric\": \"mse\"") != std::string::npos);
}
