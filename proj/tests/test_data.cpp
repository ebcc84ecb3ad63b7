#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "multiwave/data.hpp"

using namespace multiwave;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

data::SyntheticConfig tiny_config() {
  data::SyntheticConfig cfg;
  cfg.signals = {{"s1", 2.0, 32.0}, {"s2", 4.0, 32.0}};
  cfg.n_train = 8;
  cfg.n_val = 4;
  cfg.n_test = 4;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("splitmix64 reference value") {
  CHECK(data::splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("square dataset shape and determinism") {
  const auto cfg = tiny_config();
  const auto a = data::gen_square_dataset(cfg);
  const auto b = data::gen_square_dataset(cfg);
  CHECK(a.train.size() == 8);
  CHECK(a.val.size() == 4);
  CHECK(a.test.size() == 4);
  REQUIRE(a.train[0].signals.size() == 2);
  CHECK(a.train[0].signals[0].values.size() == 32);
  CHECK(a.train[3].label == b.train[3].label);
  CHECK(a.train[3].signals[1].values == b.train[3].signals[1].values);
  // different seeds diverge
  auto cfg2 = cfg;
  cfg2.seed = 43;
  CHECK(data::gen_square_dataset(cfg2).train[3].label != a.train[3].label);
}

TEST_CASE("label is the pre-noise amplitude sum") {
  auto cfg = tiny_config();
  cfg.noise_amp = 0.0;
  const auto d = data::gen_square_dataset(cfg);
  for (const auto& s : d.train) {
    CHECK(s.label >= 0.0);
    CHECK(s.label <= 20.0);
    // noise-free square waves take values +-a per signal
    double amp_sum = 0.0;
    for (const auto& sig : s.signals) amp_sum += std::abs(sig.values[0]);
    CHECK(s.label == doctest::Approx(amp_sum).epsilon(1e-12));
  }
}

TEST_CASE("noise stays within its bound") {
  auto cfg = tiny_config();
  const auto d = data::gen_square_dataset(cfg);
  for (const auto& sig : d.train[0].signals)
    for (double v : sig.values) CHECK(std::abs(v) <= 13.0 + 1e-12);
}

TEST_CASE("experiment schedules") {
  const auto base = tiny_config();
  const auto e1 = data::gen_exp1_schedule(base);
  REQUIRE(e1.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(e1[i].signals.size() == 2 + 2 * i);
  CHECK(e1[4].signals.back().freq_hz == 32.0);
  CHECK(e1[0].signals[0].freq_hz == 1.0);

  const auto e2 = data::gen_multirate_schedule(base);
  REQUIRE(e2.size() == 5);
  CHECK(e2[0].signals[0].rate_hz == 64.0);
  CHECK(e2[4].signals[0].rate_hz == 4.0);
  CHECK(e2[2].signals[1].rate_hz == 128.0);

  const auto e3 = data::gen_nonpow2_schedule(base);
  REQUIRE(e3.size() == 4);
  CHECK(e3[0].signals.size() == 4);
  CHECK(e3[3].signals.size() == 7);
  CHECK(e3[1].signals.back().freq_hz == 7.0);
  CHECK(e3[3].signals.back().freq_hz == 17.0);
}

TEST_CASE("band dataset separates information from noise") {
  const auto d = data::gen_band_dataset(2, 16.0, 1.0, 6, 2, 2, 7);
  REQUIRE(d.train[0].signals.size() == 3);
  for (const auto& s : d.train) {
    for (double v : s.signals[0].values)
      CHECK(v == doctest::Approx(s.label).epsilon(1e-12));
    for (double v : s.signals[1].values) CHECK(std::abs(v) <= 3.0);
  }
}

TEST_CASE("resample method parsing") {
  CHECK(data::resample_from_string("decimate-avg") ==
        data::Resample::DecimateAvg);
  CHECK_THROWS_AS(data::resample_from_string("nearest"),
                  std::invalid_argument);
}

TEST_CASE("ingest spec parsing and validation") {
  const auto spec = data::ingest_spec_from_json(R"({
    "signals": [{"column": "hr", "target_rate": 1.0,
                 "method": "decimate-avg"}],
    "label_column": "y", "task": "regression", "window_seconds": 3.0
  })");
  CHECK(spec.signals.size() == 1);
  CHECK(spec.signals[0].method == data::Resample::DecimateAvg);
  CHECK(spec.window_s == 3.0);
  CHECK_THROWS_AS(data::ingest_spec_from_json(R"({"signals": []})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(data::ingest_spec_from_json(R"({
    "signals": [{"column": "a", "target_rate": 1.0}],
    "task": "classification"
  })"),
                  std::invalid_argument);
}

TEST_CASE("ingestion interpolates gaps and scales with train stats") {
  const auto path = write_temp("mw_ing_a.csv",
                               "t,a,y\n"
                               "0,1,\n"
                               "1,,\n"
                               "2,3,7\n"
                               "3,,\n");
  data::IngestSpec spec;
  spec.signals = {{"a", 1.0, data::Resample::DecimateAvg}};
  spec.label_column = "y";
  spec.window_s = 3.0;
  const auto d = data::ingest_csv(spec, {path}, {}, {});
  REQUIRE(d.train.size() == 1);
  const auto& vals = d.train[0].signals[0].values;
  REQUIRE(vals.size() == 3);
  // raw series [1, missing, 3] -> [1, 2, 3] -> min-max -> [0, 0.5, 1]
  CHECK(vals[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(vals[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(vals[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.train[0].label == doctest::Approx(7.0));
}

TEST_CASE("fully missing column falls back to the training mean") {
  const auto train_path = write_temp("mw_ing_tr.csv",
                                     "t,a,b,y\n"
                                     "0,1,2,\n"
                                     "1,2,2,5\n"
                                     "2,3,2,\n");
  const auto val_path = write_temp("mw_ing_va.csv",
                                   "t,a,b,y\n"
                                   "0,4,,\n"
                                   "1,5,,9\n"
                                   "2,6,,\n");
  data::IngestSpec spec;
  spec.signals = {{"a", 1.0, data::Resample::LastValue},
                  {"b", 1.0, data::Resample::LastValue}};
  spec.label_column = "y";
  spec.window_s = 2.0;
  const auto d = data::ingest_csv(spec, {train_path}, {val_path}, {});
  REQUIRE(d.val.size() == 1);
  // train b is constant 2 -> degenerate span, scaled value (2 - 2) / 1 = 0
  for (double v : d.val[0].signals[1].values)
    CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ingestion errors carry row positions") {
  const auto bad_time = write_temp("mw_ing_bt.csv", "t,a,y\nx,1,2\n");
  const auto bad_value = write_temp("mw_ing_bv.csv", "t,a,y\n0,oops,2\n");
  const auto no_col = write_temp("mw_ing_nc.csv", "t,z,y\n0,1,2\n");
  data::IngestSpec spec;
  spec.signals = {{"a", 1.0, data::Resample::LastValue}};
  spec.label_column = "y";
  spec.window_s = 1.0;
  CHECK_THROWS_WITH_AS(data::ingest_csv(spec, {bad_time}, {}, {}),
                       doctest::Contains("row 2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(data::ingest_csv(spec, {bad_value}, {}, {}),
                       doctest::Contains("row 2"), std::runtime_error);
  CHECK_THROWS_AS(data::ingest_csv(spec, {no_col}, {}, {}),
                  std::runtime_error);
}

TEST_CASE("classification labels must be in class range") {
  const auto path = write_temp("mw_ing_cls.csv",
                               "t,a,y\n0,1,\n0.5,2,5\n1,2,\n");
  data::IngestSpec spec;
  spec.signals = {{"a", 2.0, data::Resample::LastValue}};
  spec.label_column = "y";
  spec.task = data::Task::Classification;
  spec.n_classes = 2;
  spec.window_s = 1.0;
  CHECK_THROWS_WITH_AS(data::ingest_csv(spec, {path}, {}, {}),
                       doctest::Contains("class range"), std::runtime_error);
}

TEST_CASE("export then ingest round-trips sample counts") {
  auto cfg = tiny_config();
  cfg.n_train = 2;
  cfg.n_val = 1;
  cfg.n_test = 1;
  const auto d = data::gen_square_dataset(cfg);
  const auto dir =
      (std::filesystem::temp_directory_path() / "mw_export").string();
  data::export_csv(d, dir);
  CHECK(std::filesystem::exists(dir + "/train_0.csv"));
  CHECK(std::filesystem::exists(dir + "/test_0.csv"));

  data::IngestSpec spec;
  spec.signals = {{"s1", 32.0, data::Resample::LastValue},
                  {"s2", 32.0, data::Resample::LastValue}};
  spec.window_s = 0.5;
  const auto back = data::ingest_csv(
      spec, {dir + "/train_0.csv", dir + "/train_1.csv"},
      {dir + "/val_0.csv"}, {dir + "/test_0.csv"});
  CHECK(back.train.size() >= 2);
  CHECK(!back.val.empty());
}
