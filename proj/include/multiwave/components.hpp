#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "multiwave/autodiff.hpp"
#include "multiwave/grouping.hpp"
#include "multiwave/masking.hpp"

namespace multiwave::components {

enum class Kind { MLP, LSTM, CNNAttn, CNNLSTM, FCN, Transformer };

Kind kind_from_string(const std::string& s);
std::string kind_to_string(Kind k);

struct ComponentConfig {
  Kind kind = Kind::LSTM;
  std::size_t hidden = 16;  // cell size / channel width / embedding size
  std::size_t layers = 1;
  std::size_t kernel = 7;   // CNN kinds
  std::size_t heads = 2;    // Transformer
};

// A trainable map from a [T, C] sequence to a fixed-width embedding of
// size `hidden`, independent of T.
class ComponentModel {
 public:
  virtual ~ComponentModel() = default;
  virtual ad::Var forward(const ad::Var& x) = 0;
  virtual std::vector<ad::Var> params() const = 0;
  std::size_t embed_dim() const { return embed_dim_; }

 protected:
  std::size_t embed_dim_ = 0;
};

std::unique_ptr<ComponentModel> make_component(const ComponentConfig& cfg,
                                               std::size_t in_channels,
                                               std::mt19937_64& rng);

// One sample after decomposition, grouping, and alignment; precomputed
// once per dataset so training touches no wavelet code.
struct PreparedSample {
  std::vector<grouping::ComponentInput> inputs;
  // Original signals linearly aligned to the fastest rate, one column
  // per signal, in plan order.
  std::vector<std::pair<std::string, std::vector<double>>> aligned;
  double label = 0.0;    // regression target
  std::size_t cls = 0;   // classification target
  bool uniform_rate = true;
};

struct MultiWaveConfig {
  ComponentConfig component;
  std::size_t out_dim = 1;  // 1 for regression/binary, K for K classes
  bool add_baseline = false;
  bool masks_enabled = true;
  double initial_mask_weight = 0.5;
};

// Per-band components gated by the mask bank, fused by concatenation
// and a fully connected head.
class MultiWaveModel {
 public:
  MultiWaveModel(const grouping::GroupingPlan& plan, MultiWaveConfig cfg,
                 std::mt19937_64& rng);

  ad::Var forward(const PreparedSample& sample);
  std::vector<ad::Var> params() const;  // model weights + mask weights
  masking::MaskBank& mask_bank() { return masks_; }
  const masking::MaskBank& mask_bank() const { return masks_; }
  const grouping::GroupingPlan& plan() const { return plan_; }
  const MultiWaveConfig& config() const { return cfg_; }

 private:
  grouping::GroupingPlan plan_;
  MultiWaveConfig cfg_;
  masking::MaskBank masks_;
  std::vector<std::unique_ptr<ComponentModel>> components_;
  std::unique_ptr<ComponentModel> baseline_;
  ad::Var fusion_w_, fusion_b_;
};

// The un-decomposed reference arm: one component over the aligned
// original signals plus a fully connected head.
class PlainModel {
 public:
  PlainModel(std::size_t in_channels, const ComponentConfig& cfg,
             std::size_t out_dim, std::mt19937_64& rng);
  ad::Var forward(const PreparedSample& sample);
  std::vector<ad::Var> params() const;

 private:
  std::unique_ptr<ComponentModel> body_;
  ad::Var head_w_, head_b_;
};

// Comparison model: twin component instances over the magnitude
// spectrum and the raw signals, concatenated into a 2-layer FC head.
// Defined for uniform-rate inputs only.
class FftBaselineModel {
 public:
  FftBaselineModel(std::size_t in_channels, const ComponentConfig& cfg,
                   std::size_t out_dim, std::mt19937_64& rng);
  ad::Var forward(const PreparedSample& sample);
  std::vector<ad::Var> params() const;

 private:
  std::unique_ptr<ComponentModel> spectrum_branch_, time_branch_;
  ad::Var fc1_w_, fc1_b_, fc2_w_, fc2_b_;
};

// Magnitude spectrum of a real signal (bins 0..n/2), brute-force DFT.
std::vector<double> magnitude_spectrum(const std::vector<double>& values);

std::size_t param_count(const std::vector<ad::Var>& params);

}  // namespace multiwave::components
