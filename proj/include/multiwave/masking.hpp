#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "multiwave/autodiff.hpp"
#include "multiwave/grouping.hpp"

namespace multiwave::masking {

// Learnable scalar gate per (component, signal). The effective mask is
// ReLU of the raw weight, so a weight driven to or below zero removes
// the subsignal from the model exactly.
class MaskBank {
 public:
  // component 0 is reserved for the baseline component (original
  // signals); components 1..C gate the grouped subsignals.
  MaskBank() = default;
  MaskBank(const grouping::GroupingPlan& plan, double initial_weight,
           bool with_baseline);

  ad::Var& weight(std::size_t component, const std::string& signal);
  const ad::Var& weight(std::size_t component, const std::string& signal) const;
  bool has(std::size_t component, const std::string& signal) const;

  std::vector<ad::Var> params() const;

  struct Entry {
    std::size_t component;
    std::string signal;
    ad::Var raw;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Scales each column of a component input by ReLU of its gate; the
// returned vectors stay connected to the gate weights on the tape.
std::vector<ad::Var> apply_masks(const grouping::ComponentInput& input,
                                 const MaskBank& bank);

// alpha * sum over gates of max(0, W).
ad::Var l1_penalty(const MaskBank& bank, double alpha);

struct MaskReportRow {
  std::size_t epoch = 0;
  std::string signal;
  std::size_t component = 0;
  double band_low_hz = 0.0;
  double band_high_hz = 0.0;
  double effective_weight = 0.0;
  bool selected = false;
};

// Effective weights at the end of an epoch, ordered by (band, signal).
// Band labels come from each signal's own subsignal in the component;
// the baseline row (component 0) is labeled with the signal's full band.
std::vector<MaskReportRow> mask_report(const MaskBank& bank,
                                       const grouping::GroupingPlan& plan,
                                       std::size_t epoch);

std::string report_csv_header();
std::string report_csv_row(const MaskReportRow& row);

}  // namespace multiwave::masking
