#include "multiwave/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "multiwave/kernels.hpp"

namespace multiwave::wavelet {

namespace {
constexpr double kRoot2Inv = 0.70710678118654752440;

std::vector<double> pad_to_even(const std::vector<double>& x) {
  std::vector<double> out = x;
  if (out.size() % 2 != 0) out.push_back(out.back());  // half-sample symmetric
  return out;
}

// Adjoint of the periodized analysis step; exact inverse for
// orthonormal filters.
std::vector<double> idwt_step(const std::vector<double>& approx,
                              const std::vector<double>& detail,
                              const WaveletFilters& f, std::size_t orig_len) {
  const std::size_t m = approx.size() * 2;
  std::vector<double> y(m, 0.0);
  const std::size_t flen = f.lowpass_dec.size();
  for (std::size_t k = 0; k < approx.size(); ++k)
    for (std::size_t t = 0; t < flen; ++t) {
      const std::size_t i = (2 * k + t) % m;
      y[i] += f.lowpass_dec[t] * approx[k] + f.highpass_dec[t] * detail[k];
    }
  y.resize(orig_len);
  return y;
}
}  // namespace

WaveletFilters haar() {
  return WaveletFilters{"haar",
                        {kRoot2Inv, kRoot2Inv},
                        {kRoot2Inv, -kRoot2Inv},
                        {kRoot2Inv, kRoot2Inv},
                        {-kRoot2Inv, kRoot2Inv}};
}

WaveletFilters from_lowpass(const std::string& name,
                            std::vector<double> lowpass) {
  const std::size_t n = lowpass.size();
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("wavelet: lowpass length must be even, >= 2");
  double norm = 0.0;
  for (double c : lowpass) norm += c * c;
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument("wavelet: lowpass is not unit-norm");
  for (std::size_t s = 1; 2 * s < n; ++s) {
    double dot = 0.0;
    for (std::size_t t = 0; t + 2 * s < n; ++t)
      dot += lowpass[t] * lowpass[t + 2 * s];
    if (std::abs(dot) > 1e-8)
      throw std::invalid_argument(
          "wavelet: lowpass fails even-shift orthogonality");
  }
  std::vector<double> highpass(n);
  for (std::size_t k = 0; k < n; ++k)
    highpass[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[n - 1 - k];
  std::vector<double> lo_rec(lowpass.rbegin(), lowpass.rend());
  std::vector<double> hi_rec(highpass.rbegin(), highpass.rend());
  return WaveletFilters{name, std::move(lowpass), std::move(highpass),
                        std::move(lo_rec), std::move(hi_rec)};
}

WaveletFilters by_name(const std::string& name) {
  if (name == "haar") return haar();
  if (name == "db2") {
    const double s3 = std::sqrt(3.0), d = 4.0 * std::sqrt(2.0);
    return from_lowpass(
        "db2", {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d});
  }
  throw std::invalid_argument("wavelet: unknown wavelet '" + name +
                              "' (available: haar, db2)");
}

std::pair<double, double> band_label(double rate, std::size_t level,
                                     bool is_approx) {
  if (level < 1) throw std::invalid_argument("band_label: level must be >= 1");
  const double p = std::pow(2.0, static_cast<double>(level));
  if (is_approx) return {0.0, rate / p};
  return {rate / p, rate / (p / 2.0)};
}

std::pair<std::vector<double>, std::vector<double>> dwt_step(
    const std::vector<double>& values, const WaveletFilters& filters) {
  if (values.size() < 2)
    throw std::invalid_argument("dwt_step: need at least 2 samples, got " +
                                std::to_string(values.size()));
  const std::vector<double> x = pad_to_even(values);
  const std::size_t half = x.size() / 2;
  std::vector<double> approx(half), detail(half);
  kernels::dwt_step_auto(x.data(), x.size(), filters.lowpass_dec.data(),
                         filters.highpass_dec.data(),
                         filters.lowpass_dec.size(), approx.data(),
                         detail.data());
  return {std::move(approx), std::move(detail)};
}

std::size_t max_levels(std::size_t len) {
  std::size_t l = 0;
  while (len >= 2) {
    len /= 2;
    ++l;
  }
  return l;
}

Decomposition decompose(const Signal& signal, const WaveletFilters& filters,
                        std::size_t levels) {
  const std::size_t lmax = max_levels(signal.values.size());
  if (levels < 1 || levels > lmax)
    throw std::invalid_argument(
        "decompose: level " + std::to_string(levels) +
        " out of range; maximum for length " +
        std::to_string(signal.values.size()) + " is " + std::to_string(lmax));

  Decomposition dec;
  dec.source_name = signal.name;
  dec.source_rate = signal.rate;
  dec.levels = levels;
  std::vector<double> cur = signal.values;
  for (std::size_t j = 1; j <= levels; ++j) {
    dec.step_lengths.push_back(cur.size());
    auto [approx, detail] = dwt_step(cur, filters);
    Subsignal s;
    s.values = std::move(detail);
    s.level = j;
    s.rate = signal.rate / std::pow(2.0, static_cast<double>(j));
    std::tie(s.band_low, s.band_high) = band_label(signal.rate, j, false);
    dec.subsignals.push_back(std::move(s));
    cur = std::move(approx);
  }
  Subsignal a;
  a.values = std::move(cur);
  a.level = levels;
  a.is_approx = true;
  a.rate = signal.rate / std::pow(2.0, static_cast<double>(levels));
  std::tie(a.band_low, a.band_high) = band_label(signal.rate, levels, true);
  dec.subsignals.push_back(std::move(a));
  return dec;
}

std::vector<double> reconstruct(const Decomposition& dec,
                                const WaveletFilters& filters) {
  std::vector<double> cur = dec.approx().values;
  for (std::size_t j = dec.levels; j >= 1; --j)
    cur = idwt_step(cur, dec.detail(j).values, filters,
                    dec.step_lengths[j - 1]);
  return cur;
}

std::string to_json(const Decomposition& dec) {
  nlohmann::json j;
  j["name"] = dec.source_name;
  j["rate"] = dec.source_rate;
  j["levels"] = dec.levels;
  j["bands"] = nlohmann::json::array();
  for (const auto& s : dec.subsignals) {
    nlohmann::json b;
    b["level"] = s.level;
    b["is_approx"] = s.is_approx;
    b["rate"] = s.rate;
    b["band_low_hz"] = s.band_low;
    b["band_high_hz"] = s.band_high;
    b["samples"] = s.values;
    j["bands"].push_back(std::move(b));
  }
  return j.dump(2);
}

}  // namespace multiwave::wavelet
