// Acceptance gate: one check per release criterion, each printing a
// single PASS/FAIL line. An optional argument selects one criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multiwave/gradcheck.hpp"
#include "multiwave/training.hpp"

using namespace multiwave;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

double energy(const std::vector<double>& v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

// --- criterion 1: perfect reconstruction ------------------------------

bool c1_perfect_reconstruction(std::string& detail) {
  double worst = 0.0;
  for (const char* wname : {"haar", "db2"}) {
    const auto f = wavelet::by_name(wname);
    for (std::size_t n : {64u, 96u, 100u, 127u, 128u, 200u}) {
      const auto x = random_vec(n, 11 * n);
      const std::size_t levels =
          std::min<std::size_t>(4, wavelet::max_levels(n));
      const auto dec =
          wavelet::decompose({"x", x, 1.0}, f, levels);
      const auto y = wavelet::reconstruct(dec, f);
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(x[i] - y[i]));
    }
  }
  std::ostringstream os;
  os << "max abs reconstruction error " << worst << " (tolerance 1e-9)";
  detail = os.str();
  return worst < 1e-9;
}

// --- criterion 2: energy conservation ---------------------------------

bool c2_energy_conservation(std::string& detail) {
  double worst = 0.0;
  for (const char* wname : {"haar", "db2"}) {
    const auto f = wavelet::by_name(wname);
    for (std::size_t n : {64u, 128u, 256u}) {
      const auto x = random_vec(n, 13 * n);
      const auto dec = wavelet::decompose({"x", x, 1.0}, f,
                                          wavelet::max_levels(n) - 1);
      double sub = 0.0;
      for (const auto& s : dec.subsignals) sub += energy(s.values);
      worst = std::max(worst, std::abs(sub - energy(x)) / energy(x));
    }
  }
  std::ostringstream os;
  os << "max relative energy drift " << worst << " (tolerance 1e-9)";
  detail = os.str();
  return worst < 1e-9;
}

// --- criterion 3: band localization -----------------------------------

bool c3_band_localization(std::string& detail) {
  const double rate = 128.0;
  double worst = 1.0;
  for (double freq : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    std::vector<double> x(128);
    for (std::size_t t = 0; t < x.size(); ++t) {
      // mid-pixel sampling keeps transitions between samples
      const double s = std::sin(2.0 * M_PI * freq * (t + 0.5) / rate);
      x[t] = s >= 0.0 ? 1.0 : -1.0;
    }
    const auto dec =
        wavelet::decompose({"x", x, rate}, wavelet::haar(), 6);
    double total = 0.0, in_band = 0.0;
    for (const auto& s : dec.subsignals) {
      const double e = energy(s.values);
      total += e;
      if (s.band_low <= freq && freq < s.band_high) in_band += e;
    }
    worst = std::min(worst, in_band / total);
  }
  std::ostringstream os;
  os << "minimum in-band energy fraction " << worst << " (threshold 0.9)";
  detail = os.str();
  return worst >= 0.9;
}

// --- criterion 4: grouping examples -----------------------------------

bool c4_grouping(std::string& detail) {
  bool ok = true;
  const auto plan6 = grouping::plan_grouping({{"x1", 10.0}, {"x2", 60.0}}, 3);
  ok = ok && plan6.signals[0].offset == 2;
  ok = ok && std::abs(plan6.signals[0].oversample_factor - 1.5) < 1e-12;
  const auto& c3 = plan6.components[2];
  ok = ok && c3.size() == 2;
  ok = ok && c3[0].signal == "x1" && c3[0].subsignal_index == 1;
  ok = ok && c3[1].signal == "x2" && c3[1].subsignal_index == 3;
  ok = ok && plan6.components[3].size() == 2 &&
       plan6.components[3][0].is_approx && plan6.components[3][1].is_approx;

  const auto plan30 = grouping::plan_grouping({{"a", 64.0}, {"b", 30.0}}, 3);
  ok = ok && plan30.signals[1].offset == 1;
  ok = ok &&
       std::abs(plan30.signals[1].oversample_factor - 64.0 / 60.0) < 1e-12;

  const auto resampled = grouping::oversample({0.0, 2.0}, 1.5);
  ok = ok && resampled.size() == 3 && std::abs(resampled[1] - 1.0) < 1e-12;

  bool threw = false;
  try {
    grouping::plan_grouping({{"a", 128.0}, {"b", 16.0}}, 3);
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  ok = ok && threw;
  detail = "rate-ratio 6 and 64/30 examples, oversample oracle, "
           "infeasible depth rejection";
  return ok;
}

// --- criterion 5: gradient checks -------------------------------------

bool c5_gradcheck(std::string& detail) {
  const auto results = gradcheck::check_all(7);
  double worst = 0.0;
  std::size_t failed = 0;
  for (const auto& r : results) {
    worst = std::max(worst, r.max_rel_err);
    if (!r.passed) ++failed;
  }
  std::ostringstream os;
  os << results.size() << " cases, worst relative error " << worst
     << " (tolerance 1e-4)";
  if (failed) {
    os << "; failing:";
    for (const auto& r : results)
      if (!r.passed) os << " " << r.name;
  }
  detail = os.str();
  return failed == 0 && !results.empty();
}

// --- trend experiments ------------------------------------------------

training::ExperimentSpec desk_spec(const std::string& name,
                                   components::Kind kind) {
  training::ExperimentSpec spec;
  spec.name = name;
  spec.component.kind = kind;
  spec.component.hidden = 8;
  spec.component.kernel = 5;
  spec.component.heads = 2;
  spec.train.seeds = {123, 124, 125, 126, 127};
  spec.train.learning_rate = 0.005;
  spec.train.batch_size = 16;
  spec.train.max_epochs = 40;
  spec.train.patience = 8;
  spec.train.alpha = 0.005;
  spec.base.n_train = 160;
  spec.base.n_val = 48;
  spec.base.n_test = 48;
  spec.base.seed = 7;
  return spec;
}

std::map<std::string, std::map<std::string, double>> cell_means(
    const training::ExperimentResult& result) {
  std::map<std::string, std::map<std::string, double>> means;
  for (const auto& cs : result.summary) means[cs.setting][cs.arm] = cs.mean;
  return means;
}

bool trend_criterion(const training::ExperimentSpec& spec,
                     std::size_t needed, double budget_s,
                     std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const auto result = training::run_experiment(spec);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  std::size_t wins = 0, settings = 0;
  std::ostringstream os;
  for (const auto& [setting, arms] : cell_means(result)) {
    ++settings;
    const double mw = arms.at("multiwave");
    const double plain = arms.at("plain");
    const bool win = mw <= plain;
    wins += win ? 1 : 0;
    os << " [" << setting << ": multiwave " << mw << (win ? " <= " : " > ")
       << "plain " << plain << "]";
  }
  std::ostringstream head;
  head << "multiwave at or below plain in " << wins << "/" << settings
       << " settings (need " << needed << "), " << elapsed << "s (budget "
       << budget_s << "s):" << os.str();
  detail = head.str();
  return wins >= needed && elapsed < budget_s;
}

bool c6_exp1(std::string& detail) {
  return trend_criterion(desk_spec("synthetic-1", components::Kind::LSTM), 4,
                         1800.0, detail);
}

bool c7_exp2(std::string& detail) {
  return trend_criterion(desk_spec("synthetic-2", components::Kind::LSTM), 4,
                         1800.0, detail);
}

bool c8_nonpow2(std::string& detail) {
  auto spec = desk_spec("nonpow2", components::Kind::Transformer);
  // With four signals the gated transformer overfits at the default
  // penalty; a stronger L1 prunes the noise bands and a longer run lets
  // both arms converge.
  spec.train.alpha = 0.1;
  spec.train.max_epochs = 60;
  spec.train.patience = 60;
  return trend_criterion(spec, 3, 1800.0, detail);
}

// --- criterion 9: mask selection --------------------------------------

bool c9_mask_selection(std::string& detail) {
  const auto dataset = data::gen_band_dataset(4, 128.0, 1.0, 96, 32, 32, 7);
  const auto prepared = training::prepare(dataset, wavelet::haar(), 6);

  std::ostringstream os;
  for (double alpha : {0.01, 0.05, 0.1}) {
    std::size_t good_seeds = 0;
    for (std::uint64_t seed : {123u, 124u, 125u, 126u, 127u}) {
      training::TrainConfig tc;
      tc.alpha = alpha;
      tc.learning_rate = 0.005;
      tc.max_epochs = 40;
      tc.patience = 40;  // let the penalty finish its work
      tc.batch_size = 16;

      components::MultiWaveConfig mw;
      mw.component.kind = components::Kind::MLP;
      mw.component.hidden = 8;
      std::mt19937_64 rng(seed);
      training::MultiWaveTrainable model(prepared.plan, mw, rng);
      training::train(model, prepared, tc, seed);

      bool informative_on = false;
      std::size_t noise_gates = 0, noise_zero = 0;
      for (const auto& e : model.mask_bank()->entries()) {
        if (e.signal == "s1") {
          if (e.component == prepared.plan.l_max + 1 && e.raw->val.v[0] > 0.0)
            informative_on = true;
        } else {
          ++noise_gates;
          if (e.raw->val.v[0] <= 0.0) ++noise_zero;
        }
      }
      const double frac =
          static_cast<double>(noise_zero) / static_cast<double>(noise_gates);
      if (informative_on && frac >= 0.8) ++good_seeds;
    }
    os << " [alpha " << alpha << ": " << good_seeds << "/5 seeds]";
    if (good_seeds >= 4) {
      detail = "informative approximation gate open, >=80% noise gates at "
               "exactly zero in " +
               std::to_string(good_seeds) + "/5 seeds at alpha " +
               std::to_string(alpha);
      return true;
    }
  }
  detail = "no alpha reached 4/5 seeds:" + os.str();
  return false;
}

// --- criterion 10: auc oracle -----------------------------------------

double brute_force_auc(const std::vector<double>& scores,
                       const std::vector<int>& labels) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!(labels[i] == 1 && labels[j] == 0)) continue;
      pairs += 1.0;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  return num / pairs;
}

bool c10_auc_oracle(std::string& detail) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> size_d(2, 60);
  std::uniform_int_distribution<int> tie_d(0, 7);  // coarse grid forces ties
  std::uniform_int_distribution<int> label_d(0, 1);
  double worst = 0.0;
  std::size_t instances = 0;
  while (instances < 1000) {
    const std::size_t n = size_d(rng);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = tie_d(rng) / 7.0;
      labels[i] = label_d(rng);
      (labels[i] ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    ++instances;
    worst = std::max(worst, std::abs(training::metric_auc(scores, labels) -
                                     brute_force_auc(scores, labels)));
  }
  std::ostringstream os;
  os << "1000 instances, max deviation from pairwise oracle " << worst
     << " (tolerance 1e-12)";
  detail = os.str();
  return worst < 1e-12;
}

// --- criterion 11: ablation -------------------------------------------

bool c11_ablation(std::string& detail) {
  auto spec = desk_spec("synthetic-1", components::Kind::MLP);
  spec.include_nomask_arm = true;
  // one representative setting is enough for the arm comparison
  spec.train.seeds = {123, 124, 125, 126, 127};

  const auto schedule = data::gen_exp1_schedule(spec.base);
  const auto dataset = data::gen_square_dataset(schedule[1]);  // 4 signals
  const auto prepared = training::prepare(dataset, wavelet::haar(), 6);

  std::map<std::string, std::vector<double>> metrics;
  for (const std::string arm : {"plain", "multiwave", "multiwave-nomask"}) {
    for (std::uint64_t seed : spec.train.seeds) {
      std::mt19937_64 rng(seed);
      std::unique_ptr<training::TrainableModel> model;
      if (arm == "plain") {
        model = std::make_unique<training::PlainTrainable>(
            prepared.plan.signals.size(), spec.component, 1, rng);
      } else {
        components::MultiWaveConfig mw;
        mw.component = spec.component;
        mw.masks_enabled = arm == "multiwave";
        model = std::make_unique<training::MultiWaveTrainable>(prepared.plan,
                                                               mw, rng);
      }
      metrics[arm].push_back(
          training::train(*model, prepared, spec.train, seed).test_metric);
    }
  }
  std::ostringstream os;
  bool ok = true;
  os << "mean test mse by arm:";
  for (const auto& [arm, vals] : metrics) {
    double mean = 0.0;
    for (double v : vals) {
      mean += v;
      ok = ok && std::isfinite(v);
    }
    mean /= static_cast<double>(vals.size());
    os << " " << arm << "=" << mean;
  }
  ok = ok && metrics.size() == 3;
  detail = os.str();
  return ok;
}

// --- criterion 12: ingestion fixtures ---------------------------------

bool c12_ingestion(std::string& detail) {
  const std::string dir = FIXTURE_DIR;
  data::IngestSpec spec;
  spec.signals = {{"acc", 64.0, data::Resample::Interpolate},
                  {"hr", 8.0, data::Resample::LastValue}};
  spec.label_column = "label";
  spec.window_s = 2.0;

  const auto dataset = data::ingest_csv(
      spec, {dir + "/subject1.csv", dir + "/subject2.csv"},
      {dir + "/subject3.csv"}, {dir + "/subject4.csv"});
  bool ok = !dataset.train.empty() && !dataset.val.empty() &&
            !dataset.test.empty();
  for (const auto& s : dataset.train) {
    ok = ok && s.signals.size() == 2;
    ok = ok && s.signals[0].values.size() == 128;
    ok = ok && s.signals[1].values.size() == 16;
    for (const auto& sig : s.signals)
      for (double v : sig.values)
        ok = ok && v >= -1e-12 && v <= 1.0 + 1e-12;  // train min-max range
  }

  // the ingested multirate data flows through the full model
  const auto prepared = training::prepare(dataset, wavelet::haar(), 5);
  components::MultiWaveConfig mw;
  mw.component.kind = components::Kind::MLP;
  mw.component.hidden = 4;
  std::mt19937_64 rng(1);
  components::MultiWaveModel model(prepared.plan, mw, rng);
  ok = ok && model.forward(prepared.train[0])->val.all_finite();

  // a missing column is a hard error
  bool threw = false;
  try {
    data::IngestSpec bad = spec;
    bad.signals.push_back({"nope", 1.0, data::Resample::LastValue});
    data::ingest_csv(bad, {dir + "/subject1.csv"}, {}, {});
  } catch (const std::runtime_error&) {
    threw = true;
  }
  ok = ok && threw;

  std::ostringstream os;
  os << dataset.train.size() << " train / " << dataset.val.size()
     << " val / " << dataset.test.size()
     << " test windows ingested, scaled to train range, model forward "
        "finite, missing column rejected";
  detail = os.str();
  return ok;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "perfect reconstruction", c1_perfect_reconstruction},
      {2, "energy conservation", c2_energy_conservation},
      {3, "band energy localization", c3_band_localization},
      {4, "frequency-band grouping", c4_grouping},
      {5, "gradient finite differences", c5_gradcheck},
      {6, "uniform-rate trend (lstm)", c6_exp1},
      {7, "multirate trend (lstm)", c7_exp2},
      {8, "non-power-of-two trend (transformer)", c8_nonpow2},
      {9, "mask band selection", c9_mask_selection},
      {10, "auc pairwise oracle", c10_auc_oracle},
      {11, "mask ablation arms", c11_ablation},
      {12, "csv ingestion fixtures", c12_ingestion},
  };

  int selected = 0;
  if (argc > 1) selected = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (selected != 0 && c.id != selected) continue;
    std::string detail;
    bool passed = false;
    try {
      passed = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s\n", passed ? "PASS" : "FAIL", c.id,
                c.name, detail.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
