#include "multiwave/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace multiwave::training {

namespace {

double dataset_label_mean(const std::vector<components::PreparedSample>& s) {
  double m = 0.0;
  for (const auto& x : s) m += x.label;
  return s.empty() ? 0.0 : m / static_cast<double>(s.size());
}

double dataset_label_std(const std::vector<components::PreparedSample>& s,
                         double mean) {
  double v = 0.0;
  for (const auto& x : s) v += (x.label - mean) * (x.label - mean);
  v = s.empty() ? 0.0 : v / static_cast<double>(s.size());
  return std::max(std::sqrt(v), 1e-12);
}

}  // namespace

std::size_t feasible_l_max(const data::Dataset& dataset) {
  if (dataset.train.empty())
    throw std::invalid_argument("feasible_l_max: empty training split");
  const auto& sample = dataset.train.front();
  double f_max = 0.0;
  for (const auto& sig : sample.signals) f_max = std::max(f_max, sig.rate);
  std::size_t best = SIZE_MAX;
  for (const auto& sig : sample.signals) {
    std::size_t offset = 0;
    double r = f_max / sig.rate;
    while (r >= 2.0) {
      r /= 2.0;
      ++offset;
    }
    best = std::min(best, offset + wavelet::max_levels(sig.values.size()));
  }
  return best;
}

PreparedDataset prepare(const data::Dataset& dataset,
                        const wavelet::WaveletFilters& filters,
                        std::size_t l_max) {
  if (dataset.train.empty())
    throw std::invalid_argument("prepare: empty training split");
  const auto& first = dataset.train.front();
  std::vector<std::pair<std::string, double>> rates;
  double f_max = 0.0;
  for (const auto& sig : first.signals) {
    rates.emplace_back(sig.name, sig.rate);
    f_max = std::max(f_max, sig.rate);
  }

  PreparedDataset out;
  out.plan = grouping::plan_grouping(rates, l_max);
  out.task = dataset.task;
  out.n_classes = dataset.n_classes;
  out.uniform_rate = std::all_of(
      first.signals.begin(), first.signals.end(),
      [&](const auto& s) { return s.rate == first.signals[0].rate; });

  const std::size_t aligned_len = static_cast<std::size_t>(
      std::llround(first.signals[0].duration() * f_max));
  auto prep_split = [&](const std::vector<data::Sample>& in,
                        std::vector<components::PreparedSample>& dst) {
    dst.reserve(in.size());
    for (const auto& sample : in) {
      components::PreparedSample ps;
      ps.label = sample.label;
      ps.cls = sample.cls;
      ps.uniform_rate = out.uniform_rate;
      std::map<std::string, wavelet::Decomposition> decs;
      for (const auto& sig : sample.signals) {
        const auto sp = std::find_if(
            out.plan.signals.begin(), out.plan.signals.end(),
            [&](const auto& p) { return p.name == sig.name; });
        if (sp == out.plan.signals.end())
          throw std::invalid_argument("prepare: unknown signal '" + sig.name +
                                      "'");
        decs.emplace(sig.name, wavelet::decompose(sig, filters, sp->levels));
        ps.aligned.emplace_back(
            sig.name, grouping::resample_linear(sig.values, aligned_len));
      }
      ps.inputs = grouping::assemble_inputs(decs, out.plan);
      dst.push_back(std::move(ps));
    }
  };
  prep_split(dataset.train, out.train);
  prep_split(dataset.val, out.val);
  prep_split(dataset.test, out.test);
  return out;
}

double metric_mse(const std::vector<double>& predictions,
                  const std::vector<double>& labels) {
  if (predictions.empty() || predictions.size() != labels.size())
    throw std::invalid_argument("metric_mse: empty or misaligned inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    s += (predictions[i] - labels[i]) * (predictions[i] - labels[i]);
  return s / static_cast<double>(predictions.size());
}

double metric_accuracy(const std::vector<std::vector<double>>& scores,
                       const std::vector<std::size_t>& labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw std::invalid_argument("metric_accuracy: empty or misaligned inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t argmax =
        std::max_element(scores[i].begin(), scores[i].end()) -
        scores[i].begin();
    if (argmax == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double metric_auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw std::invalid_argument("metric_auc: empty or misaligned inputs");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // average ranks within tie groups; equivalent to counting tied pairs 0.5
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (labels[k]) {
      pos += 1.0;
      rank_sum += rank[k];
    }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0)
    throw std::invalid_argument("metric_auc: single-class label set");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double metric_auc_macro(const std::vector<std::vector<double>>& scores,
                        const std::vector<std::size_t>& labels) {
  if (scores.empty())
    throw std::invalid_argument("metric_auc_macro: empty inputs");
  const std::size_t k = scores[0].size();
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> s(scores.size());
    std::vector<int> y(scores.size());
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      s[i] = scores[i][c];
      y[i] = labels[i] == c ? 1 : 0;
      (y[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    total += metric_auc(s, y);
    ++used;
  }
  if (used == 0)
    throw std::invalid_argument("metric_auc_macro: single-class label set");
  return total / static_cast<double>(used);
}

namespace {

struct EvalScale {
  double mean = 0.0, stddev = 1.0;
};

std::vector<double> softmax_probs(const Tensor& logits) {
  std::vector<double> p(logits.numel());
  double mx = logits.v[0];
  for (double x : logits.v) mx = std::max(mx, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits.v[i] - mx);
    sum += p[i];
  }
  for (auto& x : p) x /= sum;
  return p;
}

double eval_split(TrainableModel& model, const PreparedDataset& dataset,
                  const std::vector<components::PreparedSample>& split,
                  const EvalScale& scale) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  if (dataset.task == data::Task::Regression) {
    std::vector<double> preds, labels;
    for (const auto& s : split) {
      const Tensor out = model.forward(s)->val;
      preds.push_back(out.v[0] * scale.stddev + scale.mean);
      labels.push_back(s.label);
    }
    return metric_mse(preds, labels);
  }
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> labels;
  for (const auto& s : split) {
    probs.push_back(softmax_probs(model.forward(s)->val));
    labels.push_back(s.cls);
  }
  if (dataset.n_classes == 2) {
    std::vector<double> s1(probs.size());
    std::vector<int> y(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      s1[i] = probs[i][1];
      y[i] = labels[i] == 1 ? 1 : 0;
    }
    return metric_auc(s1, y);
  }
  return metric_accuracy(probs, labels);
}

bool is_improvement(data::Task task, double candidate, double best) {
  return task == data::Task::Regression ? candidate < best : candidate > best;
}

}  // namespace

double evaluate(TrainableModel& model, const PreparedDataset& dataset,
                const std::vector<components::PreparedSample>& split) {
  EvalScale scale;
  if (dataset.task == data::Task::Regression) {
    scale.mean = dataset_label_mean(dataset.train);
    scale.stddev = dataset_label_std(dataset.train, scale.mean);
  }
  return eval_split(model, dataset, split, scale);
}

RunResult train(TrainableModel& model, const PreparedDataset& dataset,
                const TrainConfig& config, std::uint64_t seed) {
  if (dataset.train.empty() || dataset.val.empty())
    throw std::invalid_argument("train: train and val splits required");
  auto params = model.params();
  ad::Adam opt(params, {config.learning_rate});
  masking::MaskBank* bank = model.mask_bank();

  EvalScale scale;
  if (dataset.task == data::Task::Regression) {
    scale.mean = dataset_label_mean(dataset.train);
    scale.stddev = dataset_label_std(dataset.train, scale.mean);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(dataset.train.size());
  std::iota(order.begin(), order.end(), 0);

  RunResult result;
  result.seed = seed;
  double best_metric = dataset.task == data::Task::Regression
                           ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_params;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t b_end = std::min(b + config.batch_size, order.size());
      const double inv_b = 1.0 / static_cast<double>(b_end - b);
      opt.zero_grad();
      for (std::size_t k = b; k < b_end; ++k) {
        const auto& s = dataset.train[order[k]];
        ad::Var out = model.forward(s);
        ad::Var loss =
            dataset.task == data::Task::Regression
                ? ad::loss_mse(out, Tensor::scalar((s.label - scale.mean) /
                                                   scale.stddev))
                : ad::loss_cross_entropy(out, s.cls);
        if (!std::isfinite(loss->val.v[0]))
          throw std::runtime_error(
              "train: non-finite loss at epoch " + std::to_string(epoch) +
              ", seed " + std::to_string(seed) + "; aborting run");
        ad::backward(ad::scale(loss, inv_b));
      }
      if (bank && config.alpha > 0.0)
        ad::backward(masking::l1_penalty(*bank, config.alpha));
      opt.step();
    }

    const double val_metric = eval_split(model, dataset, dataset.val, scale);
    result.epochs = epoch;
    if (bank) {
      auto rows = masking::mask_report(*bank, dataset.plan, epoch);
      result.mask_trail.insert(result.mask_trail.end(), rows.begin(),
                               rows.end());
    }
    if (is_improvement(dataset.task, val_metric, best_metric)) {
      best_metric = val_metric;
      best_params.clear();
      for (const auto& p : params) best_params.push_back(p->val);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  if (!best_params.empty())
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i]->val = best_params[i];

  result.test_metric = dataset.test.empty()
                           ? best_metric
                           : eval_split(model, dataset, dataset.test, scale);
  return result;
}

std::vector<std::string> known_experiments() {
  return {"synthetic-1", "synthetic-2", "nonpow2", "mask-selection"};
}

namespace {

struct Setting {
  std::string name;
  data::Dataset dataset;
};

std::vector<Setting> build_settings(const ExperimentSpec& spec) {
  std::vector<Setting> out;
  if (spec.name == "synthetic-1") {
    for (const auto& cfg : data::gen_exp1_schedule(spec.base))
      out.push_back({std::to_string(cfg.signals.size()) + "-signals",
                     data::gen_square_dataset(cfg)});
  } else if (spec.name == "synthetic-2") {
    for (const auto& cfg : data::gen_multirate_schedule(spec.base)) {
      std::ostringstream name;
      name << cfg.signals[0].rate_hz << "Hz";
      out.push_back({name.str(), data::gen_square_dataset(cfg)});
    }
  } else if (spec.name == "nonpow2") {
    for (const auto& cfg : data::gen_nonpow2_schedule(spec.base)) {
      std::ostringstream name;
      name << "+" << cfg.signals.back().freq_hz << "Hz";
      out.push_back({name.str(), data::gen_square_dataset(cfg)});
    }
  } else if (spec.name == "mask-selection") {
    out.push_back({"band-informative",
                   data::gen_band_dataset(2, 128.0, spec.base.duration_s,
                                          spec.base.n_train, spec.base.n_val,
                                          spec.base.n_test, spec.base.seed)});
  } else {
    std::string list;
    for (const auto& n : known_experiments()) list += " " + n;
    throw std::invalid_argument("run_experiment: unknown experiment '" +
                                spec.name + "'; available:" + list);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;
  result.name = spec.name;

  for (auto& setting : build_settings(spec)) {
    const std::size_t l_max =
        std::min<std::size_t>(6, feasible_l_max(setting.dataset));
    PreparedDataset prepared =
        prepare(setting.dataset, wavelet::haar(), l_max);
    result.metric_name =
        prepared.task == data::Task::Regression
            ? "mse"
            : (prepared.n_classes == 2 ? "auc" : "accuracy");
    const std::size_t out_dim = prepared.task == data::Task::Regression
                                    ? 1
                                    : prepared.n_classes;
    const std::size_t n_signals = prepared.plan.signals.size();

    std::vector<std::string> arms = {"plain", "multiwave"};
    if (spec.include_nomask_arm)
      arms.insert(arms.begin() + 1, "multiwave-nomask");

    for (const auto& arm : arms) {
      for (std::uint64_t seed : spec.train.seeds) {
        std::mt19937_64 rng(seed);
        std::unique_ptr<TrainableModel> model;
        if (arm == "plain") {
          model = std::make_unique<PlainTrainable>(n_signals, spec.component,
                                                   out_dim, rng);
        } else {
          components::MultiWaveConfig mw;
          mw.component = spec.component;
          mw.out_dim = out_dim;
          mw.add_baseline = spec.train.add_baseline;
          mw.masks_enabled = arm == "multiwave" && spec.train.masks_enabled;
          mw.initial_mask_weight = spec.train.initial_mask_weight;
          model = std::make_unique<MultiWaveTrainable>(prepared.plan, mw, rng);
        }
        RunResult run = train(*model, prepared, spec.train, seed);
        result.rows.push_back({setting.name, arm, seed, run.test_metric});
      }
    }
  }

  // per-(setting, arm) mean and standard deviation
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const auto& row : result.rows)
    cells[{row.setting, row.arm}].push_back(row.metric);
  for (const auto& [key, vals] : cells) {
    CellSummary cs;
    cs.setting = key.first;
    cs.arm = key.second;
    for (double v : vals) cs.mean += v;
    cs.mean /= static_cast<double>(vals.size());
    for (double v : vals) cs.stddev += (v - cs.mean) * (v - cs.mean);
    cs.stddev = std::sqrt(cs.stddev / static_cast<double>(vals.size()));
    result.summary.push_back(std::move(cs));
  }
  return result;
}

std::string result_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "setting,arm,seed," << result.metric_name << "\n";
  for (const auto& row : result.rows)
    out << row.setting << ',' << row.arm << ',' << row.seed << ','
        << row.metric << "\n";
  return out.str();
}

std::string result_summary_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["experiment"] = result.name;
  j["metric"] = result.metric_name;
  j["cells"] = nlohmann::json::array();
  for (const auto& cs : result.summary)
    j["cells"].push_back({{"setting", cs.setting},
                          {"arm", cs.arm},
                          {"mean", cs.mean},
                          {"std", cs.stddev}});
  return j.dump(2);
}

void save_checkpoint(const std::string& path,
                     const std::vector<ad::Var>& params,
                     const std::string& config_json) {
  nlohmann::json j;
  j["config"] = config_json;
  j["config_hash"] = std::hash<std::string>{}(config_json);
  j["params"] = nlohmann::json::array();
  for (const auto& p : params)
    j["params"].push_back({{"shape", p->val.shape}, {"values", p->val.v}});
  if (const auto dir = std::filesystem::path(path).parent_path();
      !dir.empty())
    std::filesystem::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
  out << j.dump();
}

std::string load_checkpoint(const std::string& path,
                            const std::vector<ad::Var>& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  const auto& stored = j.at("params");
  if (stored.size() != params.size())
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto shape = stored[i].at("shape").get<std::vector<std::size_t>>();
    if (shape != params[i]->val.shape)
      throw std::runtime_error("load_checkpoint: shape mismatch at parameter " +
                               std::to_string(i));
    params[i]->val.v = stored[i].at("values").get<std::vector<double>>();
  }
  return j.at("config").get<std::string>();
}

}  // namespace multiwave::training
