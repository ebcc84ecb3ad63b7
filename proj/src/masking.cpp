#include "multiwave/masking.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "multiwave/wavelet.hpp"

namespace multiwave::masking {

MaskBank::MaskBank(const grouping::GroupingPlan& plan, double initial_weight,
                   bool with_baseline) {
  if (with_baseline)
    for (const auto& sp : plan.signals)
      entries_.push_back(
          {0, sp.name, ad::param(Tensor::scalar(initial_weight))});
  for (std::size_t c = 0; c < plan.components.size(); ++c)
    for (const auto& e : plan.components[c])
      entries_.push_back(
          {c + 1, e.signal, ad::param(Tensor::scalar(initial_weight))});
}

ad::Var& MaskBank::weight(std::size_t component, const std::string& signal) {
  for (auto& e : entries_)
    if (e.component == component && e.signal == signal) return e.raw;
  throw std::invalid_argument("MaskBank: no weight for component " +
                              std::to_string(component) + ", signal '" +
                              signal + "'");
}

const ad::Var& MaskBank::weight(std::size_t component,
                                const std::string& signal) const {
  return const_cast<MaskBank*>(this)->weight(component, signal);
}

bool MaskBank::has(std::size_t component, const std::string& signal) const {
  for (const auto& e : entries_)
    if (e.component == component && e.signal == signal) return true;
  return false;
}

std::vector<ad::Var> MaskBank::params() const {
  std::vector<ad::Var> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.raw);
  return out;
}

std::vector<ad::Var> apply_masks(const grouping::ComponentInput& input,
                                 const MaskBank& bank) {
  std::vector<ad::Var> out;
  out.reserve(input.columns.size());
  for (const auto& [signal, values] : input.columns) {
    const auto& w = bank.weight(input.component, signal);
    out.push_back(
        ad::mul(ad::constant(Tensor::vec(values)), ad::relu(w)));
  }
  return out;
}

ad::Var l1_penalty(const MaskBank& bank, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("l1_penalty: alpha < 0");
  std::vector<ad::Var> gated;
  for (const auto& e : bank.entries()) gated.push_back(ad::relu(e.raw));
  return ad::scale(ad::sum_all(ad::concat(gated)), alpha);
}

std::vector<MaskReportRow> mask_report(const MaskBank& bank,
                                       const grouping::GroupingPlan& plan,
                                       std::size_t epoch) {
  std::vector<MaskReportRow> rows;
  for (const auto& e : bank.entries()) {
    MaskReportRow row;
    row.epoch = epoch;
    row.signal = e.signal;
    row.component = e.component;
    const auto sp = std::find_if(
        plan.signals.begin(), plan.signals.end(),
        [&](const auto& s) { return s.name == e.signal; });
    if (sp == plan.signals.end())
      throw std::invalid_argument("mask_report: plan lacks signal '" +
                                  e.signal + "'");
    if (e.component == 0) {
      row.band_low_hz = 0.0;
      row.band_high_hz = sp->rate;
    } else {
      const std::size_t level = e.component - sp->offset;
      const bool is_approx = e.component == plan.l_max + 1;
      std::tie(row.band_low_hz, row.band_high_hz) = wavelet::band_label(
          sp->rate, is_approx ? sp->levels : level, is_approx);
    }
    const double raw = e.raw->val.v[0];
    row.effective_weight = raw > 0.0 ? raw : 0.0;
    row.selected = row.effective_weight > 0.0;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.band_low_hz != b.band_low_hz) return a.band_low_hz < b.band_low_hz;
    if (a.band_high_hz != b.band_high_hz)
      return a.band_high_hz < b.band_high_hz;
    return a.signal < b.signal;
  });
  return rows;
}

std::string report_csv_header() {
  return "epoch,signal,band_low_hz,band_high_hz,effective_weight";
}

std::string report_csv_row(const MaskReportRow& row) {
  std::ostringstream s;
  s << row.epoch << ',' << row.signal << ',' << row.band_low_hz << ','
    << row.band_high_hz << ',' << row.effective_weight;
  return s.str();
}

}  // namespace multiwave::masking
