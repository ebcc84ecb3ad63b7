// Command line front end: decomposition, synthetic data generation,
// training, evaluation, mask reports, and gradient checking.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "multiwave/data.hpp"
#include "multiwave/gradcheck.hpp"
#include "multiwave/training.hpp"

using namespace multiwave;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return json::parse(in);
}

void write_file(const std::string& path, const std::string& body) {
  if (const auto dir = std::filesystem::path(path).parent_path();
      !dir.empty())
    std::filesystem::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

data::SyntheticConfig synth_from_json(const json& j) {
  data::SyntheticConfig cfg;
  for (const auto& s : j.at("signals"))
    cfg.signals.push_back({s.at("name").get<std::string>(),
                           s.value("freq_hz", 1.0),
                           s.at("rate_hz").get<double>()});
  cfg.duration_s = j.value("duration_s", 1.0);
  cfg.amp_lo = j.value("amp_lo", 0.0);
  cfg.amp_hi = j.value("amp_hi", 10.0);
  cfg.noise_amp = j.value("noise_amp", 3.0);
  cfg.n_train = j.value("n_train", std::size_t{2000});
  cfg.n_val = j.value("n_val", std::size_t{500});
  cfg.n_test = j.value("n_test", std::size_t{500});
  cfg.seed = j.value("seed", std::uint64_t{0});
  return cfg;
}

data::Dataset dataset_from_config(const json& cfg) {
  const auto& d = cfg.at("data");
  if (d.contains("synthetic"))
    return data::gen_square_dataset(synth_from_json(d.at("synthetic")));
  if (d.contains("ingest")) {
    const auto& ing = d.at("ingest");
    const auto spec = data::ingest_spec_from_json(ing.at("spec").dump());
    auto files = [&](const char* key) {
      std::vector<std::string> out;
      if (ing.contains(key))
        for (const auto& f : ing.at(key)) out.push_back(f.get<std::string>());
      return out;
    };
    return data::ingest_csv(spec, files("train_files"), files("val_files"),
                            files("test_files"));
  }
  throw std::invalid_argument(
      "config: data must contain 'synthetic' or 'ingest'");
}

components::ComponentConfig component_from_json(const json& m) {
  components::ComponentConfig cc;
  cc.kind = components::kind_from_string(m.value("component", "lstm"));
  cc.hidden = m.value("hidden", std::size_t{16});
  cc.layers = m.value("layers", std::size_t{1});
  cc.kernel = m.value("kernel", std::size_t{7});
  cc.heads = m.value("heads", std::size_t{2});
  return cc;
}

training::TrainConfig train_from_json(const json& cfg) {
  training::TrainConfig tc;
  if (!cfg.contains("train")) return tc;
  const auto& t = cfg.at("train");
  tc.learning_rate = t.value("learning_rate", tc.learning_rate);
  tc.batch_size = t.value("batch_size", tc.batch_size);
  tc.patience = t.value("patience", tc.patience);
  tc.alpha = t.value("alpha", tc.alpha);
  tc.initial_mask_weight =
      t.value("initial_mask_weight", tc.initial_mask_weight);
  tc.max_epochs = t.value("max_epochs", tc.max_epochs);
  if (t.contains("seeds"))
    tc.seeds = t.at("seeds").get<std::vector<std::uint64_t>>();
  return tc;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoull(tok));
  if (out.empty()) throw std::invalid_argument("--seeds: no seeds given");
  return out;
}

struct CommonFlags {
  std::string config_path, out_path, seeds, component, wavelet;
  std::size_t levels = 0;
  int jobs = 0;
  bool no_masks = false;
  bool add_baseline = false;
};

void apply_overrides(json& cfg, const CommonFlags& f) {
  if (!cfg.contains("model")) cfg["model"] = json::object();
  if (!f.component.empty()) cfg["model"]["component"] = f.component;
  if (!f.wavelet.empty()) cfg["model"]["wavelet"] = f.wavelet;
  if (f.levels > 0) cfg["model"]["l_max"] = f.levels;
  if (f.no_masks) cfg["model"]["masks_enabled"] = false;
  if (f.add_baseline) cfg["model"]["add_baseline"] = true;
  if (!f.seeds.empty()) {
    if (!cfg.contains("train")) cfg["train"] = json::object();
    cfg["train"]["seeds"] = parse_seeds(f.seeds);
  }
#ifdef _OPENMP
  if (f.jobs > 0) omp_set_num_threads(f.jobs);
#endif
}

std::unique_ptr<training::TrainableModel> build_model(
    const json& cfg, const training::PreparedDataset& prepared,
    std::uint64_t seed) {
  const json m = cfg.value("model", json::object());
  const std::string arm = m.value("arm", "multiwave");
  const std::size_t out_dim = prepared.task == data::Task::Regression
                                  ? 1
                                  : prepared.n_classes;
  std::mt19937_64 rng(seed);
  if (arm == "plain")
    return std::make_unique<training::PlainTrainable>(
        prepared.plan.signals.size(), component_from_json(m), out_dim, rng);
  if (arm == "fft-baseline")
    return std::make_unique<training::FftTrainable>(
        prepared.plan.signals.size(), component_from_json(m), out_dim, rng);
  if (arm == "multiwave") {
    components::MultiWaveConfig mw;
    mw.component = component_from_json(m);
    mw.out_dim = out_dim;
    mw.add_baseline = m.value("add_baseline", false);
    mw.masks_enabled = m.value("masks_enabled", true);
    mw.initial_mask_weight = m.value("initial_mask_weight", 0.5);
    return std::make_unique<training::MultiWaveTrainable>(prepared.plan, mw,
                                                          rng);
  }
  throw std::invalid_argument(
      "config: unknown arm '" + arm +
      "' (available: multiwave, plain, fft-baseline)");
}

training::PreparedDataset prepare_from_config(const json& cfg,
                                              const data::Dataset& dataset) {
  const json m = cfg.value("model", json::object());
  const auto filters = wavelet::by_name(m.value("wavelet", "haar"));
  std::size_t l_max = m.value("l_max", std::size_t{0});
  if (l_max == 0)
    l_max = std::min<std::size_t>(6, training::feasible_l_max(dataset));
  return training::prepare(dataset, filters, l_max);
}

int cmd_decompose(const CommonFlags& f) {
  json cfg = load_json(f.config_path);
  const auto filters =
      wavelet::by_name(f.wavelet.empty() ? "haar" : f.wavelet);

  std::vector<wavelet::Signal> signals;
  std::vector<std::pair<std::string, double>> rates;
  for (const auto& s : cfg.at("signals")) {
    wavelet::Signal sig;
    sig.name = s.at("name").get<std::string>();
    sig.rate = s.at("rate").get<double>();
    sig.values = s.at("values").get<std::vector<double>>();
    rates.emplace_back(sig.name, sig.rate);
    signals.push_back(std::move(sig));
  }
  if (signals.empty())
    throw std::invalid_argument("decompose: config has no signals");

  std::size_t l_max = f.levels;
  if (l_max == 0) {
    l_max = SIZE_MAX;
    double f_max = 0.0;
    for (const auto& s : signals) f_max = std::max(f_max, s.rate);
    for (const auto& s : signals) {
      std::size_t offset = 0;
      for (double r = f_max / s.rate; r >= 2.0; r /= 2.0) ++offset;
      l_max = std::min(l_max, offset + wavelet::max_levels(s.values.size()));
    }
  }
  const auto plan = grouping::plan_grouping(rates, l_max);

  json out;
  out["plan"] = json::parse(grouping::to_json(plan));
  out["wavelet"] = filters.name;
  out["decompositions"] = json::array();
  std::map<std::string, wavelet::Decomposition> decs;
  for (const auto& sig : signals) {
    const auto sp =
        std::find_if(plan.signals.begin(), plan.signals.end(),
                     [&](const auto& p) { return p.name == sig.name; });
    auto dec = wavelet::decompose(sig, filters, sp->levels);
    out["decompositions"].push_back(json::parse(wavelet::to_json(dec)));
    decs.emplace(sig.name, std::move(dec));
  }
  const auto inputs = grouping::assemble_inputs(decs, plan);
  out["components"] = json::array();
  for (const auto& ci : inputs) {
    json c;
    c["component"] = ci.component;
    for (const auto& [name, vals] : ci.columns) c["columns"][name] = vals;
    out["components"].push_back(std::move(c));
  }

  const std::string text = out.dump(2);
  if (f.out_path.empty())
    std::cout << text << "\n";
  else
    write_file(f.out_path, text);
  return 0;
}

int cmd_synth(const CommonFlags& f) {
  json cfg = load_json(f.config_path);
  const json& s = cfg.contains("synthetic")
                      ? cfg.at("synthetic")
                      : cfg.at("data").at("synthetic");
  if (f.out_path.empty())
    throw std::invalid_argument("synth: --out directory is required");
  const auto dataset = data::gen_square_dataset(synth_from_json(s));
  data::export_csv(dataset, f.out_path);
  std::cout << "wrote " << dataset.train.size() << " train / "
            << dataset.val.size() << " val / " << dataset.test.size()
            << " test samples to " << f.out_path << "\n";
  return 0;
}

int run_experiment_mode(const json& cfg, const CommonFlags& f) {
  training::ExperimentSpec spec;
  spec.name = cfg.at("experiment").get<std::string>();
  spec.component = component_from_json(cfg.value("model", json::object()));
  spec.train = train_from_json(cfg);
  spec.train.masks_enabled = cfg.value("model", json::object())
                                 .value("masks_enabled", true);
  spec.train.add_baseline = cfg.value("model", json::object())
                                .value("add_baseline", false);
  if (cfg.contains("data") && cfg.at("data").contains("synthetic"))
    spec.base = synth_from_json(cfg.at("data").at("synthetic"));
  else {
    spec.base.n_train = 256;
    spec.base.n_val = 64;
    spec.base.n_test = 64;
  }
  spec.include_nomask_arm = cfg.value("include_nomask_arm", false);

  const auto result = training::run_experiment(spec);
  const std::string base =
      f.out_path.empty() ? ("results-" + spec.name) : f.out_path;
  write_file(base + "/results.csv", training::result_csv(result));
  write_file(base + "/summary.json", training::result_summary_json(result));
  std::cout << training::result_summary_json(result) << "\n";
  return 0;
}

int cmd_train(const CommonFlags& f) {
  json cfg = load_json(f.config_path);
  apply_overrides(cfg, f);
  if (cfg.contains("experiment")) return run_experiment_mode(cfg, f);

  const auto dataset = dataset_from_config(cfg);
  const auto prepared = prepare_from_config(cfg, dataset);
  const auto tc = train_from_json(cfg);
  const std::string out_dir = f.out_path.empty() ? "results" : f.out_path;

  std::ostringstream rows;
  rows << "seed,test_metric,epochs\n";
  for (std::uint64_t seed : tc.seeds) {
    auto model = build_model(cfg, prepared, seed);
    const auto run = training::train(*model, prepared, tc, seed);
    rows << seed << ',' << run.test_metric << ',' << run.epochs << "\n";
    training::save_checkpoint(
        out_dir + "/checkpoint_" + std::to_string(seed) + ".json",
        model->params(), cfg.dump());
    if (!run.mask_trail.empty()) {
      std::ostringstream mr;
      mr << masking::report_csv_header() << "\n";
      for (const auto& row : run.mask_trail)
        mr << masking::report_csv_row(row) << "\n";
      write_file(out_dir + "/mask_report_" + std::to_string(seed) + ".csv",
                 mr.str());
    }
    std::cout << "seed " << seed << ": test metric " << run.test_metric
              << " after " << run.epochs << " epochs\n";
  }
  write_file(out_dir + "/results.csv", rows.str());
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint) {
  // The checkpoint stores the config it was trained with; --config
  // overrides it (e.g. to evaluate on different files).
  json cfg;
  training::PreparedDataset prepared;
  {
    json stored_probe = json::parse(
        [&] {
          std::ifstream in(checkpoint);
          if (!in)
            throw std::invalid_argument("cannot open checkpoint " + checkpoint);
          std::stringstream ss;
          ss << in.rdbuf();
          return ss.str();
        }());
    cfg = f.config_path.empty()
              ? json::parse(stored_probe.at("config").get<std::string>())
              : load_json(f.config_path);
  }
  prepared = prepare_from_config(cfg, dataset_from_config(cfg));
  auto model = build_model(cfg, prepared, 0);
  training::load_checkpoint(checkpoint, model->params());
  const double metric = training::evaluate(*model, prepared, prepared.test);
  json out;
  out["metric"] =
      prepared.task == data::Task::Regression
          ? "mse"
          : (prepared.n_classes == 2 ? "auc" : "accuracy");
  out["value"] = metric;
  const std::string text = out.dump(2);
  if (f.out_path.empty())
    std::cout << text << "\n";
  else
    write_file(f.out_path, text);
  return 0;
}

int cmd_mask_report(const CommonFlags& f, const std::string& checkpoint) {
  json stored;
  {
    std::ifstream in(checkpoint);
    if (!in)
      throw std::invalid_argument("cannot open checkpoint " + checkpoint);
    stored = json::parse(in);
  }
  json cfg = f.config_path.empty()
                 ? json::parse(stored.at("config").get<std::string>())
                 : load_json(f.config_path);
  const auto prepared = prepare_from_config(cfg, dataset_from_config(cfg));
  auto model = build_model(cfg, prepared, 0);
  auto* mw = dynamic_cast<training::MultiWaveTrainable*>(model.get());
  if (!mw || !mw->mask_bank())
    throw std::invalid_argument(
        "mask-report: checkpoint is not a mask-enabled multiwave model");
  training::load_checkpoint(checkpoint, model->params());

  std::ostringstream os;
  os << masking::report_csv_header() << "\n";
  for (const auto& row :
       masking::mask_report(*mw->mask_bank(), prepared.plan, 0))
    os << masking::report_csv_row(row) << "\n";
  if (f.out_path.empty())
    std::cout << os.str();
  else
    write_file(f.out_path, os.str());
  return 0;
}

int cmd_gradcheck(const CommonFlags& f) {
  const auto seeds = f.seeds.empty() ? std::vector<std::uint64_t>{7}
                                     : parse_seeds(f.seeds);
  bool ok = true;
  std::ostringstream os;
  for (const auto seed : seeds) {
    const auto results = gradcheck::check_all(seed);
    os << "seed " << seed << "\n" << gradcheck::to_report(results);
    ok = ok && gradcheck::all_passed(results);
  }
  if (f.out_path.empty())
    std::cout << os.str();
  else
    write_file(f.out_path, os.str());
  if (!ok) throw std::runtime_error("gradcheck: tolerance exceeded");
  std::cout << "gradcheck passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiwave: wavelet-decomposed multirate time series models"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string checkpoint;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", flags.config_path,
                                "JSON configuration file");
    if (need_config) opt->required();
    sub->add_option("--out", flags.out_path, "output file or directory");
    sub->add_option("--seeds", flags.seeds, "comma-separated seed list");
    sub->add_option("--jobs", flags.jobs, "worker thread count");
    sub->add_flag("--no-masks", flags.no_masks, "disable the mask layer");
    sub->add_flag("--add-baseline", flags.add_baseline,
                  "add the undecomposed baseline component");
    sub->add_option("--component", flags.component,
                    "component kind (mlp|lstm|cnn-attn|cnn-lstm|fcn|"
                    "transformer)");
    sub->add_option("--wavelet", flags.wavelet, "wavelet name (haar|db2)");
    sub->add_option("--levels", flags.levels, "decomposition level count");
  };

  auto* dec = app.add_subcommand("decompose",
                                 "decompose signals and print the grouping");
  add_common(dec, true);
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, true);
  auto* train = app.add_subcommand("train", "train models");
  add_common(train, true);
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, false);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  auto* mask = app.add_subcommand("mask-report",
                                  "mask weights of a trained checkpoint");
  add_common(mask, false);
  mask->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  auto* grad = app.add_subcommand("gradcheck",
                                  "finite-difference gradient check");
  add_common(grad, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (dec->parsed()) return cmd_decompose(flags);
    if (synth->parsed()) return cmd_synth(flags);
    if (train->parsed()) return cmd_train(flags);
    if (eval->parsed()) return cmd_eval(flags, checkpoint);
    if (mask->parsed()) return cmd_mask_report(flags, checkpoint);
    if (grad->parsed()) return cmd_gradcheck(flags);
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
