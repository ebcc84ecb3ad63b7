#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multiwave/components.hpp"
#include "multiwave/data.hpp"
#include "multiwave/grouping.hpp"
#include "multiwave/masking.hpp"

namespace multiwave::training {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 16;
  std::size_t patience = 15;
  double alpha = 0.05;              // mask norm weight
  double initial_mask_weight = 0.5;
  std::vector<std::uint64_t> seeds = {123, 124, 125, 126, 127};
  bool add_baseline = false;
  bool masks_enabled = true;
  std::size_t max_epochs = 200;
};

// Decomposition, grouping, and alignment applied once up front so the
// training loop never touches wavelet code.
struct PreparedDataset {
  grouping::GroupingPlan plan;
  data::Task task = data::Task::Regression;
  std::size_t n_classes = 0;
  bool uniform_rate = true;
  std::vector<components::PreparedSample> train, val, test;
};

// Largest decomposition level supported by every signal's length and
// rate offset.
std::size_t feasible_l_max(const data::Dataset& dataset);

PreparedDataset prepare(const data::Dataset& dataset,
                        const wavelet::WaveletFilters& filters,
                        std::size_t l_max);

// --- metrics ----------------------------------------------------------
double metric_mse(const std::vector<double>& predictions,
                  const std::vector<double>& labels);
double metric_accuracy(const std::vector<std::vector<double>>& scores,
                       const std::vector<std::size_t>& labels);
// Probability that a random positive outscores a random negative, ties
// counted 0.5.
double metric_auc(const std::vector<double>& scores,
                  const std::vector<int>& labels);
// Macro one-vs-rest average over classes present on both sides.
double metric_auc_macro(const std::vector<std::vector<double>>& scores,
                        const std::vector<std::size_t>& labels);

// --- training ---------------------------------------------------------

// Unifies the MultiWave, plain, and FFT-baseline models for the loop.
class TrainableModel {
 public:
  virtual ~TrainableModel() = default;
  virtual ad::Var forward(const components::PreparedSample& sample) = 0;
  virtual std::vector<ad::Var> params() const = 0;
  virtual masking::MaskBank* mask_bank() { return nullptr; }
};

class MultiWaveTrainable : public TrainableModel {
 public:
  MultiWaveTrainable(const grouping::GroupingPlan& plan,
                     components::MultiWaveConfig cfg, std::mt19937_64& rng)
      : model_(plan, cfg, rng) {}
  ad::Var forward(const components::PreparedSample& s) override {
    return model_.forward(s);
  }
  std::vector<ad::Var> params() const override { return model_.params(); }
  masking::MaskBank* mask_bank() override {
    return model_.config().masks_enabled ? &model_.mask_bank() : nullptr;
  }
  components::MultiWaveModel& model() { return model_; }

 private:
  components::MultiWaveModel model_;
};

class PlainTrainable : public TrainableModel {
 public:
  PlainTrainable(std::size_t in_channels, const components::ComponentConfig& c,
                 std::size_t out_dim, std::mt19937_64& rng)
      : model_(in_channels, c, out_dim, rng) {}
  ad::Var forward(const components::PreparedSample& s) override {
    return model_.forward(s);
  }
  std::vector<ad::Var> params() const override { return model_.params(); }

 private:
  components::PlainModel model_;
};

class FftTrainable : public TrainableModel {
 public:
  FftTrainable(std::size_t in_channels, const components::ComponentConfig& c,
               std::size_t out_dim, std::mt19937_64& rng)
      : model_(in_channels, c, out_dim, rng) {}
  ad::Var forward(const components::PreparedSample& s) override {
    return model_.forward(s);
  }
  std::vector<ad::Var> params() const override { return model_.params(); }

 private:
  components::FftBaselineModel model_;
};

struct RunResult {
  std::uint64_t seed = 0;
  double test_metric = 0.0;
  std::size_t epochs = 0;
  std::vector<masking::MaskReportRow> mask_trail;  // one report per epoch
};

// Adam with early stopping on the validation task metric; restores the
// best-validation parameters before evaluating on test. Throws on a
// non-finite loss.
RunResult train(TrainableModel& model, const PreparedDataset& dataset,
                const TrainConfig& config, std::uint64_t seed);

// Evaluates the model on a split with the dataset's task metric.
double evaluate(TrainableModel& model, const PreparedDataset& dataset,
                const std::vector<components::PreparedSample>& split);

// --- experiment harness ----------------------------------------------

struct ExperimentSpec {
  std::string name;  // synthetic-1 | synthetic-2 | nonpow2 | mask-selection
  components::ComponentConfig component;
  TrainConfig train;
  data::SyntheticConfig base;  // sizes/duration/noise/seed for synthetic
  bool include_nomask_arm = false;
};

struct ResultRow {
  std::string setting;
  std::string arm;  // plain | multiwave | multiwave-nomask
  std::uint64_t seed = 0;
  double metric = 0.0;
};

struct CellSummary {
  std::string setting, arm;
  double mean = 0.0, stddev = 0.0;
};

struct ExperimentResult {
  std::string name;
  std::string metric_name;
  std::vector<ResultRow> rows;
  std::vector<CellSummary> summary;
};

std::vector<std::string> known_experiments();
ExperimentResult run_experiment(const ExperimentSpec& spec);

std::string result_csv(const ExperimentResult& result);
std::string result_summary_json(const ExperimentResult& result);

// --- checkpoints ------------------------------------------------------
void save_checkpoint(const std::string& path,
                     const std::vector<ad::Var>& params,
                     const std::string& config_json);
// Loads values into existing parameters; shapes must match.
std::string load_checkpoint(const std::string& path,
                            const std::vector<ad::Var>& params);

}  // namespace multiwave::training
