#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "multiwave/wavelet.hpp"

namespace multiwave::grouping {

// One subsignal feeding a component: which signal, which subsignal index
// (1..L_i details, L_i+1 approximation), and the interpolation ratio
// that aligns it with the fastest member of the component.
struct PlanEntry {
  std::string signal;
  std::size_t subsignal_index = 0;
  bool is_approx = false;
  double oversample_factor = 1.0;
};

struct SignalPlan {
  std::string name;
  double rate = 0.0;
  std::size_t offset = 0;  // floor(log2(f_max / f_i))
  std::size_t levels = 0;  // L_i = L_max - offset
  double oversample_factor = 1.0;
};

struct GroupingPlan {
  std::size_t component_count = 0;  // L_max + 1
  std::size_t l_max = 0;
  double max_rate = 0.0;
  std::vector<SignalPlan> signals;
  // components[j] lists the subsignals feeding component j+1.
  std::vector<std::vector<PlanEntry>> components;
};

// Derives offsets, per-signal levels, and oversampling factors from the
// sampling rates. Component j (1..L_max) receives detail S_{j-offset_i}
// of every signal with offset_i < j; component L_max+1 receives all
// approximations.
GroupingPlan plan_grouping(const std::vector<std::pair<std::string, double>>&
                               signal_rates,
                           std::size_t l_max);

// Linear interpolation onto round(len*factor) evenly spaced positions
// over the original index range. factor must be in [1, 2).
std::vector<double> oversample(const std::vector<double>& values,
                               double factor);

// General linear resampling to an arbitrary target length; used to align
// original signals (the un-decomposed baseline component and plain
// models), where the ratio can exceed 2.
std::vector<double> resample_linear(const std::vector<double>& values,
                                    std::size_t target_len);

struct ComponentInput {
  std::size_t component = 0;  // 1-based
  // Equal-length vectors post-oversampling, keyed by signal name.
  std::vector<std::pair<std::string, std::vector<double>>> columns;
};

std::vector<ComponentInput> assemble_inputs(
    const std::map<std::string, wavelet::Decomposition>& decompositions,
    const GroupingPlan& plan);

std::string to_json(const GroupingPlan& plan);
std::string to_table(const GroupingPlan& plan);

}  // namespace multiwave::grouping
