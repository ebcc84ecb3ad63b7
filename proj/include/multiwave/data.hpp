#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multiwave/wavelet.hpp"

namespace multiwave::data {

enum class Task { Regression, Classification };

struct SignalSpec {
  std::string name;
  double freq_hz = 0.0;  // square-wave frequency
  double rate_hz = 0.0;  // sampling rate
};

struct SyntheticConfig {
  std::vector<SignalSpec> signals;
  double duration_s = 1.0;
  double amp_lo = 0.0, amp_hi = 10.0;
  double noise_amp = 3.0;
  std::size_t n_train = 2000, n_val = 500, n_test = 500;
  std::uint64_t seed = 0;
};

struct Sample {
  std::vector<wavelet::Signal> signals;
  double label = 0.0;
  std::size_t cls = 0;
};

struct Dataset {
  Task task = Task::Regression;
  std::size_t n_classes = 0;
  std::vector<Sample> train, val, test;
};

// splitmix64 mixing; every sample draws its own generator seed from the
// master seed so generation order is irrelevant.
std::uint64_t splitmix64(std::uint64_t x);

// Square waves with per-sample uniform amplitudes and phases, uniform
// additive noise; the label is the pre-noise amplitude sum.
Dataset gen_square_dataset(const SyntheticConfig& config);

// Experiment schedules. Each returns one config per setting, sharing
// the base config's sizes/seed.
std::vector<SyntheticConfig> gen_exp1_schedule(const SyntheticConfig& base);
std::vector<SyntheticConfig> gen_multirate_schedule(
    const SyntheticConfig& base);
std::vector<SyntheticConfig> gen_nonpow2_schedule(const SyntheticConfig& base);

// Mask-analysis task: signal 1 holds a constant level equal to the
// label (all energy in its lowest band); the remaining signals are pure
// noise.
Dataset gen_band_dataset(std::size_t noise_signals, double rate_hz,
                         double duration_s, std::size_t n_train,
                         std::size_t n_val, std::size_t n_test,
                         std::uint64_t seed);

// --- CSV ingestion ----------------------------------------------------

enum class Resample { DecimateAvg, LastValue, Interpolate };

Resample resample_from_string(const std::string& s);

struct SignalIngest {
  std::string column;
  double target_rate = 0.0;
  Resample method = Resample::LastValue;
};

struct IngestSpec {
  std::vector<SignalIngest> signals;
  std::string label_column = "label";
  Task task = Task::Regression;
  std::size_t n_classes = 0;
  double window_s = 1.0;
};

IngestSpec ingest_spec_from_json(const std::string& json_text);

// One CSV file per subject: header `t,<col>,...`, rows time-ordered,
// empty cells are missing values. Resamples each column to its target
// rate, interpolates gaps, falls back to the training mean for fully
// missing columns, min-max scales with training statistics only, and
// cuts fixed-length windows.
Dataset ingest_csv(const IngestSpec& spec,
                   const std::vector<std::string>& train_files,
                   const std::vector<std::string>& val_files,
                   const std::vector<std::string>& test_files);

// Writes one CSV per sample in the ingestion layout (base tick at the
// fastest rate, empty cells where a slower signal has no sample).
void export_csv(const Dataset& dataset, const std::string& directory);

}  // namespace multiwave::data
