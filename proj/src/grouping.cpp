#include "multiwave/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace multiwave::grouping {

GroupingPlan plan_grouping(
    const std::vector<std::pair<std::string, double>>& signal_rates,
    std::size_t l_max) {
  if (signal_rates.empty())
    throw std::invalid_argument("plan_grouping: no signals");
  if (l_max < 1) throw std::invalid_argument("plan_grouping: L_max must be >= 1");

  double f_max = 0.0;
  for (const auto& [name, rate] : signal_rates) {
    if (rate <= 0.0)
      throw std::invalid_argument("plan_grouping: rate of '" + name +
                                  "' must be positive");
    f_max = std::max(f_max, rate);
  }

  GroupingPlan plan;
  plan.l_max = l_max;
  plan.component_count = l_max + 1;
  plan.max_rate = f_max;

  std::size_t offset_max = 0;
  for (const auto& [name, rate] : signal_rates) {
    SignalPlan sp;
    sp.name = name;
    sp.rate = rate;
    // offset = floor(log2(f_max/f_i)); the residual ratio is the
    // oversampling factor, always in [1, 2).
    double r = f_max / rate;
    while (r >= 2.0) {
      r /= 2.0;
      ++sp.offset;
    }
    sp.oversample_factor = r;
    offset_max = std::max(offset_max, sp.offset);
    plan.signals.push_back(std::move(sp));
  }
  if (l_max < offset_max + 1)
    throw std::invalid_argument(
        "plan_grouping: L_max=" + std::to_string(l_max) +
        " infeasible for the slowest signal; L_max must be at least " +
        std::to_string(offset_max + 1));
  for (auto& sp : plan.signals) sp.levels = l_max - sp.offset;

  plan.components.resize(plan.component_count);
  for (std::size_t j = 1; j <= l_max; ++j)
    for (const auto& sp : plan.signals)
      if (sp.offset < j)
        plan.components[j - 1].push_back(
            {sp.name, j - sp.offset, false, sp.oversample_factor});
  for (const auto& sp : plan.signals)
    plan.components[l_max].push_back(
        {sp.name, sp.levels + 1, true, sp.oversample_factor});
  return plan;
}

std::vector<double> oversample(const std::vector<double>& values,
                               double factor) {
  if (!(factor >= 1.0 && factor < 2.0))
    throw std::invalid_argument("oversample: factor " +
                                std::to_string(factor) +
                                " outside [1, 2)");
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(values.size() * factor));
  return resample_linear(values, out_len);
}

std::vector<double> resample_linear(const std::vector<double>& values,
                                    std::size_t target_len) {
  if (values.empty())
    throw std::invalid_argument("resample_linear: empty input");
  if (target_len == values.size()) return values;
  std::vector<double> out(target_len);
  if (values.size() == 1 || target_len == 1) {
    std::fill(out.begin(), out.end(), values[0]);
    return out;
  }
  const double step = static_cast<double>(values.size() - 1) /
                      static_cast<double>(target_len - 1);
  for (std::size_t k = 0; k < target_len; ++k) {
    const double t = k * step;
    const std::size_t i0 = std::min(static_cast<std::size_t>(t),
                                    values.size() - 2);
    const double frac = t - static_cast<double>(i0);
    out[k] = values[i0] * (1.0 - frac) + values[i0 + 1] * frac;
  }
  return out;
}

std::vector<ComponentInput> assemble_inputs(
    const std::map<std::string, wavelet::Decomposition>& decompositions,
    const GroupingPlan& plan) {
  for (const auto& sp : plan.signals) {
    auto it = decompositions.find(sp.name);
    if (it == decompositions.end())
      throw std::invalid_argument("assemble_inputs: missing decomposition for '" +
                                  sp.name + "'");
    if (it->second.levels != sp.levels)
      throw std::invalid_argument(
          "assemble_inputs: '" + sp.name + "' decomposed at " +
          std::to_string(it->second.levels) + " levels, plan expects " +
          std::to_string(sp.levels));
  }

  std::vector<ComponentInput> result;
  for (std::size_t c = 0; c < plan.components.size(); ++c) {
    ComponentInput ci;
    ci.component = c + 1;
    for (const auto& entry : plan.components[c]) {
      const auto& dec = decompositions.at(entry.signal);
      const auto& sub = entry.is_approx
                            ? dec.approx()
                            : dec.detail(entry.subsignal_index);
      std::vector<double> vals =
          entry.oversample_factor > 1.0
              ? oversample(sub.values, entry.oversample_factor)
              : sub.values;
      ci.columns.emplace_back(entry.signal, std::move(vals));
    }
    std::size_t lo = ci.columns[0].second.size(), hi = lo;
    for (const auto& [name, vals] : ci.columns) {
      lo = std::min(lo, vals.size());
      hi = std::max(hi, vals.size());
    }
    if (hi - lo > 1)
      throw std::invalid_argument(
          "assemble_inputs: component " + std::to_string(c + 1) +
          " length mismatch of " + std::to_string(hi - lo) + " samples");
    for (auto& [name, vals] : ci.columns) vals.resize(lo);  // drop <= 1 tail
    result.push_back(std::move(ci));
  }
  return result;
}

std::string to_json(const GroupingPlan& plan) {
  nlohmann::json j;
  j["component_count"] = plan.component_count;
  j["l_max"] = plan.l_max;
  j["max_rate"] = plan.max_rate;
  j["signals"] = nlohmann::json::array();
  for (const auto& sp : plan.signals)
    j["signals"].push_back({{"name", sp.name},
                            {"rate", sp.rate},
                            {"offset", sp.offset},
                            {"levels", sp.levels},
                            {"oversample_factor", sp.oversample_factor}});
  j["components"] = nlohmann::json::array();
  for (const auto& comp : plan.components) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : comp)
      entries.push_back({{"signal", e.signal},
                         {"subsignal", e.subsignal_index},
                         {"is_approx", e.is_approx},
                         {"oversample_factor", e.oversample_factor}});
    j["components"].push_back(std::move(entries));
  }
  return j.dump(2);
}

std::string to_table(const GroupingPlan& plan) {
  std::ostringstream out;
  for (std::size_t c = 0; c < plan.components.size(); ++c) {
    out << "component " << (c + 1) << ":";
    for (const auto& e : plan.components[c]) {
      out << "  " << (e.is_approx ? "A" : "D") << e.subsignal_index << "("
          << e.signal << ")";
      if (e.oversample_factor > 1.0)
        out << " x" << e.oversample_factor;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace multiwave::grouping
