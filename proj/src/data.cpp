#include "multiwave/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace multiwave::data {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// sign(sin(2*pi*u)) with sign(0) = +1.
double square_wave(double u) {
  const double s = std::sin(2.0 * M_PI * u);
  return s >= 0.0 ? 1.0 : -1.0;
}

Sample gen_square_sample(const SyntheticConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(cfg.amp_lo, cfg.amp_hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-cfg.noise_amp, cfg.noise_amp);
  Sample sample;
  double label = 0.0;
  for (const auto& spec : cfg.signals) {
    const double a = amp(rng);
    const double phase = unit(rng);  // uniform over one period
    label += a;
    wavelet::Signal sig;
    sig.name = spec.name;
    sig.rate = spec.rate_hz;
    const std::size_t n = static_cast<std::size_t>(
        std::llround(cfg.duration_s * spec.rate_hz));
    sig.values.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double u = spec.freq_hz * (static_cast<double>(t) / spec.rate_hz) +
                       phase;
      sig.values[t] = a * square_wave(u);
      if (cfg.noise_amp > 0.0) sig.values[t] += noise(rng);
    }
    sample.signals.push_back(std::move(sig));
  }
  sample.label = label;
  return sample;
}

std::vector<Sample> gen_split(const SyntheticConfig& cfg, std::size_t count,
                              std::uint64_t split_tag) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(gen_square_sample(
        cfg, splitmix64(cfg.seed ^ splitmix64(split_tag * 0x10000 + i))));
  return out;
}

std::string signal_name(std::size_t i) { return "s" + std::to_string(i + 1); }

}  // namespace

Dataset gen_square_dataset(const SyntheticConfig& config) {
  for (const auto& s : config.signals)
    if (s.freq_hz <= 0.0 || s.rate_hz <= 0.0)
      throw std::invalid_argument(
          "gen_square_dataset: frequencies and rates must be positive");
  if (config.duration_s <= 0.0)
    throw std::invalid_argument("gen_square_dataset: duration must be > 0");
  Dataset d;
  d.task = Task::Regression;
  d.train = gen_split(config, config.n_train, 1);
  d.val = gen_split(config, config.n_val, 2);
  d.test = gen_split(config, config.n_test, 3);
  return d;
}

std::vector<SyntheticConfig> gen_exp1_schedule(const SyntheticConfig& base) {
  static const std::vector<double> added = {4, 4, 8, 8, 16, 16, 32, 32};
  std::vector<SyntheticConfig> schedule;
  SyntheticConfig cfg = base;
  cfg.signals = {{signal_name(0), 1.0, 128.0}, {signal_name(1), 2.0, 128.0}};
  schedule.push_back(cfg);
  for (std::size_t i = 0; i < added.size(); i += 2) {
    cfg.signals.push_back({signal_name(cfg.signals.size()), added[i], 128.0});
    cfg.signals.push_back(
        {signal_name(cfg.signals.size()), added[i + 1], 128.0});
    schedule.push_back(cfg);
  }
  return schedule;  // 2, 4, 6, 8, 10 signals
}

std::vector<SyntheticConfig> gen_multirate_schedule(
    const SyntheticConfig& base) {
  static const std::vector<double> rates = {64, 32, 16, 8, 4};
  std::vector<SyntheticConfig> schedule;
  for (double r : rates) {
    SyntheticConfig cfg = base;
    cfg.signals = {{signal_name(0), 2.0, r}, {signal_name(1), 4.0, 128.0}};
    schedule.push_back(cfg);
  }
  return schedule;
}

std::vector<SyntheticConfig> gen_nonpow2_schedule(const SyntheticConfig& base) {
  static const std::vector<std::vector<double>> freqs = {
      {1, 2, 4, 6}, {1, 2, 4, 6, 7}, {1, 2, 4, 6, 7, 13},
      {1, 2, 4, 6, 7, 13, 17}};
  std::vector<SyntheticConfig> schedule;
  for (const auto& fs : freqs) {
    SyntheticConfig cfg = base;
    cfg.signals.clear();
    for (std::size_t i = 0; i < fs.size(); ++i)
      cfg.signals.push_back({signal_name(i), fs[i], 128.0});
    schedule.push_back(cfg);
  }
  return schedule;
}

Dataset gen_band_dataset(std::size_t noise_signals, double rate_hz,
                         double duration_s, std::size_t n_train,
                         std::size_t n_val, std::size_t n_test,
                         std::uint64_t seed) {
  const std::size_t n =
      static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  auto gen_one = [&](std::uint64_t sample_seed) {
    std::mt19937_64 rng(sample_seed);
    std::uniform_real_distribution<double> amp(0.0, 10.0);
    std::uniform_real_distribution<double> noise(-3.0, 3.0);
    Sample s;
    const double a = amp(rng);
    s.label = a;
    wavelet::Signal informative;
    informative.name = signal_name(0);
    informative.rate = rate_hz;
    informative.values.assign(n, a);
    s.signals.push_back(std::move(informative));
    for (std::size_t i = 0; i < noise_signals; ++i) {
      wavelet::Signal sig;
      sig.name = signal_name(i + 1);
      sig.rate = rate_hz;
      sig.values.resize(n);
      for (auto& v : sig.values) v = noise(rng);
      s.signals.push_back(std::move(sig));
    }
    return s;
  };
  Dataset d;
  d.task = Task::Regression;
  auto fill = [&](std::vector<Sample>& split, std::size_t count,
                  std::uint64_t tag) {
    for (std::size_t i = 0; i < count; ++i)
      split.push_back(gen_one(splitmix64(seed ^ splitmix64(tag * 0x10000 + i))));
  };
  fill(d.train, n_train, 1);
  fill(d.val, n_val, 2);
  fill(d.test, n_test, 3);
  return d;
}

Resample resample_from_string(const std::string& s) {
  if (s == "decimate-avg") return Resample::DecimateAvg;
  if (s == "last-value") return Resample::LastValue;
  if (s == "interpolate") return Resample::Interpolate;
  throw std::invalid_argument(
      "unknown resample method '" + s +
      "' (available: decimate-avg, last-value, interpolate)");
}

IngestSpec ingest_spec_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  IngestSpec spec;
  spec.label_column = j.value("label_column", "label");
  const std::string task = j.value("task", "regression");
  if (task == "regression")
    spec.task = Task::Regression;
  else if (task == "classification")
    spec.task = Task::Classification;
  else
    throw std::invalid_argument("ingest spec: unknown task '" + task + "'");
  spec.n_classes = j.value("n_classes", 0);
  if (spec.task == Task::Classification && spec.n_classes < 2)
    throw std::invalid_argument("ingest spec: classification needs n_classes");
  spec.window_s = j.value("window_seconds", 1.0);
  for (const auto& s : j.at("signals")) {
    SignalIngest si;
    si.column = s.at("column").get<std::string>();
    si.target_rate = s.at("target_rate").get<double>();
    si.method = resample_from_string(s.value("method", "last-value"));
    if (si.target_rate <= 0.0)
      throw std::invalid_argument("ingest spec: target_rate must be positive");
    spec.signals.push_back(std::move(si));
  }
  if (spec.signals.empty())
    throw std::invalid_argument("ingest spec: no signals");
  const std::size_t fastest_len = static_cast<std::size_t>(std::llround(
      spec.window_s * std::max_element(spec.signals.begin(),
                                       spec.signals.end(),
                                       [](const auto& a, const auto& b) {
                                         return a.target_rate < b.target_rate;
                                       })
                          ->target_rate));
  if (fastest_len < 2)
    throw std::invalid_argument("ingest spec: window shorter than 2 samples");
  return spec;
}

namespace {

struct RawColumn {
  std::vector<double> times;
  std::vector<double> values;
};

struct SubjectData {
  double duration = 0.0;
  std::map<std::string, RawColumn> columns;
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

SubjectData parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("ingest_csv: empty file " + path);
  std::vector<std::string> headers;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) headers.push_back(cell);
  }
  if (headers.empty() || headers[0] != "t")
    throw std::runtime_error("ingest_csv: first column must be 't' in " +
                             path);
  SubjectData subject;
  for (std::size_t i = 1; i < headers.size(); ++i)
    subject.columns[headers[i]] = {};
  std::size_t row_idx = 1;
  while (std::getline(in, line)) {
    ++row_idx;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(headers.size());
    double t;
    try {
      t = std::stod(cells[0]);
    } catch (const std::exception&) {
      throw std::runtime_error("ingest_csv: unparseable time at row " +
                               std::to_string(row_idx) + " of " + path);
    }
    subject.duration = std::max(subject.duration, t);
    for (std::size_t i = 1; i < headers.size(); ++i) {
      if (cells[i].empty()) continue;
      double v;
      try {
        v = std::stod(cells[i]);
      } catch (const std::exception&) {
        throw std::runtime_error("ingest_csv: unparseable value at row " +
                                 std::to_string(row_idx) + ", column " +
                                 headers[i] + " of " + path);
      }
      subject.columns[headers[i]].times.push_back(t);
      subject.columns[headers[i]].values.push_back(v);
    }
  }
  return subject;
}

// Resamples one column onto the uniform target grid; missing buckets
// become NaN for the later interpolation pass.
std::vector<double> resample_column(const RawColumn& col, double rate,
                                    double duration, Resample method) {
  const std::size_t n =
      std::max<std::size_t>(2, static_cast<std::size_t>(
                                   std::llround(duration * rate)));
  std::vector<double> out(n, kMissing);
  if (col.times.empty()) return out;
  switch (method) {
    case Resample::DecimateAvg:
      for (std::size_t k = 0; k < n; ++k) {
        const double lo = k / rate, hi = (k + 1) / rate;
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < col.times.size(); ++i)
          if (col.times[i] >= lo && col.times[i] < hi) {
            sum += col.values[i];
            ++cnt;
          }
        if (cnt) out[k] = sum / static_cast<double>(cnt);
      }
      break;
    case Resample::LastValue:
      for (std::size_t k = 0; k < n; ++k) {
        const double hi = (k + 1) / rate;
        // last recorded value within (or before) the interval
        for (std::size_t i = col.times.size(); i-- > 0;)
          if (col.times[i] < hi) {
            out[k] = col.values[i];
            break;
          }
      }
      break;
    case Resample::Interpolate:
      for (std::size_t k = 0; k < n; ++k) {
        const double t = (k + 0.5) / rate;
        if (t <= col.times.front()) {
          out[k] = col.values.front();
        } else if (t >= col.times.back()) {
          out[k] = col.values.back();
        } else {
          const auto it =
              std::lower_bound(col.times.begin(), col.times.end(), t);
          const std::size_t i1 = it - col.times.begin();
          const double t0 = col.times[i1 - 1], t1 = col.times[i1];
          const double frac = (t - t0) / (t1 - t0);
          out[k] = col.values[i1 - 1] * (1 - frac) + col.values[i1] * frac;
        }
      }
      break;
  }
  return out;
}

// Fills interior NaN gaps linearly and edges with the nearest value.
// Returns false if the whole series is missing.
bool interpolate_gaps(std::vector<double>& x) {
  std::size_t first = x.size(), last = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isnan(x[i])) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  if (first == x.size()) return false;
  for (std::size_t i = 0; i < first; ++i) x[i] = x[first];
  for (std::size_t i = last + 1; i < x.size(); ++i) x[i] = x[last];
  std::size_t i = first;
  while (i <= last) {
    if (!std::isnan(x[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (std::isnan(x[j])) ++j;
    const double x0 = x[i - 1], x1 = x[j];
    for (std::size_t k = i; k < j; ++k)
      x[k] = x0 + (x1 - x0) * static_cast<double>(k - i + 1) /
                      static_cast<double>(j - i + 1);
    i = j;
  }
  return true;
}

struct ProcessedSubject {
  // per signal: resampled (still unscaled) series, or empty if fully
  // missing before mean fill
  std::vector<std::vector<double>> series;
  std::vector<bool> present;
  std::vector<double> labels;  // at the fastest rate
  double duration = 0.0;
};

ProcessedSubject process_subject(const IngestSpec& spec,
                                 const std::string& path, double fastest) {
  SubjectData subject = parse_csv(path);
  ProcessedSubject out;
  out.duration = subject.duration;
  for (const auto& si : spec.signals) {
    const auto it = subject.columns.find(si.column);
    if (it == subject.columns.end())
      throw std::runtime_error("ingest_csv: column '" + si.column +
                               "' missing in " + path);
    auto series = resample_column(it->second, si.target_rate,
                                  subject.duration, si.method);
    const bool present = interpolate_gaps(series);
    out.series.push_back(std::move(series));
    out.present.push_back(present);
  }
  const auto lit = subject.columns.find(spec.label_column);
  if (lit == subject.columns.end())
    throw std::runtime_error("ingest_csv: label column '" + spec.label_column +
                             "' missing in " + path);
  out.labels = resample_column(lit->second, fastest, subject.duration,
                               Resample::LastValue);
  if (!interpolate_gaps(out.labels))
    throw std::runtime_error("ingest_csv: no labels in " + path);
  return out;
}

}  // namespace

Dataset ingest_csv(const IngestSpec& spec,
                   const std::vector<std::string>& train_files,
                   const std::vector<std::string>& val_files,
                   const std::vector<std::string>& test_files) {
  if (train_files.empty())
    throw std::invalid_argument("ingest_csv: empty training split");
  double fastest = 0.0;
  for (const auto& si : spec.signals)
    fastest = std::max(fastest, si.target_rate);

  std::vector<std::vector<ProcessedSubject>> splits(3);
  const std::vector<const std::vector<std::string>*> files = {
      &train_files, &val_files, &test_files};
  for (std::size_t s = 0; s < 3; ++s)
    for (const auto& path : *files[s])
      splits[s].push_back(process_subject(spec, path, fastest));

  // Training-set statistics: per-signal mean (for fully missing series)
  // and min/max (for scaling). Leakage guard: training split only.
  const std::size_t nsig = spec.signals.size();
  std::vector<double> mean(nsig, 0.0), mn(nsig, 1e300), mx(nsig, -1e300);
  std::vector<std::size_t> count(nsig, 0);
  for (const auto& subj : splits[0])
    for (std::size_t i = 0; i < nsig; ++i) {
      if (!subj.present[i]) continue;
      for (double v : subj.series[i]) {
        mean[i] += v;
        mn[i] = std::min(mn[i], v);
        mx[i] = std::max(mx[i], v);
        ++count[i];
      }
    }
  for (std::size_t i = 0; i < nsig; ++i) {
    if (count[i]) mean[i] /= static_cast<double>(count[i]);
    if (mn[i] > mx[i]) {
      mn[i] = 0.0;
      mx[i] = 1.0;
    }
  }

  Dataset dataset;
  dataset.task = spec.task;
  dataset.n_classes = spec.n_classes;
  std::vector<std::vector<Sample>*> out = {&dataset.train, &dataset.val,
                                           &dataset.test};
  for (std::size_t s = 0; s < 3; ++s) {
    for (auto& subj : splits[s]) {
      for (std::size_t i = 0; i < nsig; ++i) {
        if (!subj.present[i])
          std::fill(subj.series[i].begin(), subj.series[i].end(), mean[i]);
        const double span = mx[i] > mn[i] ? mx[i] - mn[i] : 1.0;
        for (double& v : subj.series[i]) v = (v - mn[i]) / span;
      }
      const std::size_t n_windows = static_cast<std::size_t>(
          std::floor(subj.duration / spec.window_s));
      for (std::size_t w = 0; w < n_windows; ++w) {
        Sample sample;
        bool ok = true;
        for (std::size_t i = 0; i < nsig; ++i) {
          const double rate = spec.signals[i].target_rate;
          const std::size_t len = static_cast<std::size_t>(
              std::llround(spec.window_s * rate));
          const std::size_t start = static_cast<std::size_t>(
              std::llround(w * spec.window_s * rate));
          if (start + len > subj.series[i].size() || len < 2) {
            ok = false;
            break;
          }
          wavelet::Signal sig;
          sig.name = spec.signals[i].column;
          sig.rate = rate;
          sig.values.assign(subj.series[i].begin() + start,
                            subj.series[i].begin() + start + len);
          sample.signals.push_back(std::move(sig));
        }
        if (!ok) continue;
        const std::size_t label_idx = std::min(
            subj.labels.size() - 1,
            static_cast<std::size_t>(std::llround((w + 1) * spec.window_s *
                                                  fastest)) -
                1);
        sample.label = subj.labels[label_idx];
        if (spec.task == Task::Classification) {
          const long long cls = std::llround(sample.label);
          if (cls < 0 || cls >= static_cast<long long>(spec.n_classes))
            throw std::runtime_error("ingest_csv: label " +
                                     std::to_string(sample.label) +
                                     " outside class range");
          sample.cls = static_cast<std::size_t>(cls);
        }
        out[s]->push_back(std::move(sample));
      }
    }
  }
  return dataset;
}

void export_csv(const Dataset& dataset, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto write_split = [&](const std::vector<Sample>& split,
                         const std::string& tag) {
    for (std::size_t i = 0; i < split.size(); ++i) {
      const Sample& s = split[i];
      std::ofstream out(directory + "/" + tag + "_" + std::to_string(i) +
                        ".csv");
      double fastest = 0.0;
      for (const auto& sig : s.signals) fastest = std::max(fastest, sig.rate);
      out << "t";
      for (const auto& sig : s.signals) out << "," << sig.name;
      out << ",label\n";
      const std::size_t n = static_cast<std::size_t>(
          std::llround(s.signals[0].duration() * fastest));
      for (std::size_t k = 0; k < n; ++k) {
        const double t = k / fastest;
        out << t;
        for (const auto& sig : s.signals) {
          const double pos = t * sig.rate;
          const auto idx = static_cast<std::size_t>(std::llround(pos));
          if (std::abs(pos - std::llround(pos)) < 1e-9 &&
              idx < sig.values.size())
            out << "," << sig.values[idx];
          else
            out << ",";
        }
        out << "," << s.label << "\n";
      }
    }
  };
  write_split(dataset.train, "train");
  write_split(dataset.val, "val");
  write_split(dataset.test, "test");
}

}  // namespace multiwave::data
