// Command-line surface: data generation, training, pruning, evaluation and
// sparsity sweeps over the ECG beat classifier.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecgprune/dataset.hpp"
#include "ecgprune/errors.hpp"
#include "ecgprune/flops.hpp"
#include "ecgprune/metrics.hpp"
#include "ecgprune/model.hpp"
#include "ecgprune/model_io.hpp"
#include "ecgprune/pruning.hpp"
#include "ecgprune/report.hpp"
#include "ecgprune/rng.hpp"
#include "ecgprune/training.hpp"
#include "ecgprune/version.hpp"

namespace ep = ecgprune;

namespace {

// Exit codes: 0 success, 2 usage/config, 3 data or file errors, 4 numeric
// failures, 5 anything else.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitOther = 5;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ECGPRUNE_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    throw ep::ConfigError(std::string("ECGPRUNE_SEED is not an integer: '") + env + "'");
  }
  return 42;
}

std::vector<double> parse_eta_grid(const std::string& text) {
  auto snap = [](double v) { return static_cast<double>(std::llround(v * 1e9)) / 1e9; };
  std::vector<double> etas;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0 ||
        stop < start) {
      throw ep::ConfigError("sparsity grid must be start:stop:step, got '" + text + "'");
    }
    const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) {
      etas.push_back(snap(start + static_cast<double>(i) * step));
    }
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t comma = text.find(',', pos);
      if (comma == std::string::npos) comma = text.size();
      const std::string field = text.substr(pos, comma - pos);
      try {
        etas.push_back(snap(std::stod(field)));
      } catch (const std::exception&) {
        throw ep::ConfigError("bad sparsity value '" + field + "'");
      }
      pos = comma + 1;
      if (comma == text.size()) break;
    }
  }
  for (double eta : etas) {
    if (eta < 0.0 || eta > 1.0) {
      throw ep::ConfigError("sparsity " + ep::format_eta(eta) + " outside [0,1]");
    }
  }
  if (etas.empty()) throw ep::ConfigError("empty sparsity grid");
  return etas;
}

std::vector<ep::Strategy> parse_strategies(const std::string& text) {
  std::vector<ep::Strategy> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string token = text.substr(pos, comma - pos);
    const auto s = ep::parse_strategy(token);
    if (!s) {
      throw ep::ConfigError("unknown strategy '" + token +
                            "' (expected simple, finetune or multistage)");
    }
    out.push_back(*s);
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  if (out.empty()) throw ep::ConfigError("no strategies given");
  return out;
}

std::array<std::int64_t, ep::kNumClasses> parse_counts(const std::string& text) {
  std::array<std::int64_t, ep::kNumClasses> counts{};
  const int n = std::sscanf(text.c_str(),
                            "%" SCNd64 ",%" SCNd64 ",%" SCNd64 ",%" SCNd64 ",%" SCNd64,
                            &counts[0], &counts[1], &counts[2], &counts[3], &counts[4]);
  if (n != ep::kNumClasses) {
    throw ep::ConfigError("--counts expects 5 comma-separated integers, got '" + text + "'");
  }
  for (auto c : counts) {
    if (c < 0) throw ep::ConfigError("class counts must be >= 0");
  }
  return counts;
}

ep::OptimizerConfig make_optimizer(const std::string& rule, double lr) {
  ep::OptimizerConfig oc;
  if (rule == "adam") {
    oc.rule = ep::OptimizerRule::Adam;
  } else if (rule == "sgd") {
    oc.rule = ep::OptimizerRule::Sgd;
  } else {
    throw ep::ConfigError("unknown optimizer '" + rule + "' (adam or sgd)");
  }
  if (lr < 0) throw ep::ConfigError("learning rate must be >= 0");
  oc.learning_rate = lr;
  return oc;
}

struct SplitData {
  ep::BeatSet train, val, test;
};

// Split 70/15/15 from the top-level seed, then SMOTE-balance the training
// partition only. The same seed and data file always yield the same
// partitions, so train/prune/eval agree across invocations.
SplitData load_split(const std::string& data_path, std::uint64_t seed, bool no_smote,
                     int smote_k) {
  const ep::BeatSet beats = ep::load_beats(data_path);
  ep::SplitResult split = ep::stratified_split(beats, {0.70, 0.15, 0.15}, seed);
  for (const auto& w : split.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  SplitData d;
  d.val = std::move(split.val);
  d.test = std::move(split.test);
  if (no_smote) {
    d.train = std::move(split.train);
  } else {
    d.train = ep::smote_balance(split.train, smote_k, seed).set;
  }
  return d;
}

void print_metrics_table(const ep::ConfusionMatrix& cm) {
  static const char* kHeaders[] = {"N", "SVEB", "VEB", "F", "Q"};
  std::printf("%-12s", "");
  for (const auto* h : kHeaders) std::printf("%9s", h);
  std::printf("%9s\n", "Total");

  ep::MetricsRow rows[ep::kNumClasses];
  for (int c = 0; c < ep::kNumClasses; ++c) rows[c] = ep::per_class_metrics(cm, c);
  const ep::MetricsRow overall = ep::overall_metrics(cm);

  auto line = [&](const char* name, auto get) {
    std::printf("%-12s", name);
    for (int c = 0; c < ep::kNumClasses; ++c) {
      std::printf("%8s%%", ep::format_percent(get(rows[c])).c_str());
    }
    std::printf("%8s%%\n", ep::format_percent(get(overall)).c_str());
  };
  line("Accuracy", [](const ep::MetricsRow& r) { return r.accuracy; });
  line("Sensitivity", [](const ep::MetricsRow& r) { return r.sensitivity; });
  line("Specificity", [](const ep::MetricsRow& r) { return r.specificity; });
  line("Precision", [](const ep::MetricsRow& r) { return r.precision; });
  line("F1 Score", [](const ep::MetricsRow& r) { return r.f1; });
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ep::FormatError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ep::FormatError("write failed for '" + path + "'");
}

int cmd_gen_data(const std::string& counts_text, double sigma, std::uint64_t seed,
                 const std::string& out_path) {
  ep::SyntheticSpec spec;
  spec.counts = parse_counts(counts_text);
  spec.noise_sigma = sigma;
  const ep::BeatSet set = ep::generate_synthetic(spec, seed);
  ep::save_beats(set, out_path);
  std::printf("wrote %zu beats to %s\n", set.size(), out_path.c_str());
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& out_path,
              const std::string& log_path, int epochs, int batch, double lr,
              const std::string& optimizer, int patience, bool no_smote, int smote_k,
              std::uint64_t seed) {
  SplitData d = load_split(data_path, seed, no_smote, smote_k);
  std::printf("beats: train %zu, val %zu, test %zu\n", d.train.size(), d.val.size(),
              d.test.size());

  ep::Model model = ep::build_baseline(ep::mix_seed(seed, "model"));
  ep::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.optimizer = make_optimizer(optimizer, lr);
  cfg.patience = patience;
  cfg.seed = seed;
  const ep::TrainLog log = ep::train(model, d.train, d.val, cfg);
  std::printf("trained %zu epochs (best %d)\n", log.epochs.size(), log.best_epoch);

  ep::save_model(model, out_path);
  if (!log_path.empty()) write_text_file(log_path, ep::train_log_to_csv(log));

  const ep::EvalResult r = ep::evaluate(model, d.test);
  print_metrics_table(r.cm);
  std::printf("loss: %.6f\n", r.mean_loss);
  std::printf("model: %s\n", out_path.c_str());
  return 0;
}

int cmd_prune(const std::string& model_path, const std::string& data_path,
              const std::string& strategy_text, double sparsity, const std::string& out_path,
              int finetune_epochs, int batch, double lr, const std::string& optimizer,
              int patience, bool no_smote, int smote_k, std::uint64_t seed) {
  const auto strategy = ep::parse_strategy(strategy_text);
  if (!strategy) {
    throw ep::ConfigError("unknown strategy '" + strategy_text +
                          "' (expected simple, finetune or multistage)");
  }
  if (sparsity < 0.0 || sparsity > 1.0) {
    throw ep::ConfigError("--sparsity must lie in [0,1]");
  }
  const ep::Model baseline = ep::load_model(model_path);
  SplitData d = load_split(data_path, seed, no_smote, smote_k);

  ep::StrategyConfig sc;
  sc.strategy = *strategy;
  sc.sparsity = sparsity;
  sc.finetune_epochs = finetune_epochs;
  sc.batch_size = batch;
  sc.optimizer = make_optimizer(optimizer, lr);
  sc.patience = patience;
  sc.seed = ep::mix_seed(seed, ep::strategy_name(*strategy), sparsity);
  const ep::Model pruned = ep::run_strategy(baseline, sc, d.train, d.val);
  ep::save_model(pruned, out_path);

  const ep::EvalResult r = ep::evaluate(pruned, d.test);
  print_metrics_table(r.cm);
  std::printf("loss: %.6f\n", r.mean_loss);
  std::printf("flops: %" PRId64 "\n", ep::flops_total(sparsity));
  std::printf("model: %s\n", out_path.c_str());
  return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& data_path,
              const std::string& strategies_text, const std::string& sparsities_text,
              const std::string& out_path, const std::string& figures_dir, int finetune_epochs,
              int batch, double lr, const std::string& optimizer, int patience, int jobs,
              bool no_smote, int smote_k, std::uint64_t seed) {
  const ep::Model baseline = ep::load_model(model_path);
  SplitData d = load_split(data_path, seed, no_smote, smote_k);

  ep::SweepConfig cfg;
  cfg.strategies = parse_strategies(strategies_text);
  cfg.sparsities = parse_eta_grid(sparsities_text);
  cfg.finetune_epochs = finetune_epochs;
  cfg.batch_size = batch;
  cfg.optimizer = make_optimizer(optimizer, lr);
  cfg.patience = patience;
  cfg.seed = seed;
  cfg.jobs = jobs;
  const ep::SweepReport report = ep::sweep(baseline, d.train, d.val, d.test, cfg);

  write_text_file(out_path, ep::report_to_csv(report));
  std::filesystem::path json_path(out_path);
  json_path.replace_extension(".json");
  write_text_file(json_path.string(), ep::report_to_json(report));
  std::printf("report: %s (%zu rows), %s\n", out_path.c_str(), report.rows.size(),
              json_path.string().c_str());

  if (!figures_dir.empty()) {
    std::filesystem::create_directories(figures_dir);
    for (const char* metric : {"accuracy", "f1", "loss", "sensitivity", "flops"}) {
      const auto path = std::filesystem::path(figures_dir) / (std::string(metric) + ".csv");
      write_text_file(path.string(), ep::report_series_csv(report, metric));
    }
    std::printf("figure series: %s\n", figures_dir.c_str());
  }

  int failed = 0;
  for (const auto& row : report.rows) {
    if (!row.error.empty()) {
      ++failed;
      std::fprintf(stderr, "cell %s eta=%s failed: %s\n", row.strategy.c_str(),
                   ep::format_eta(row.eta).c_str(), row.error.c_str());
    }
  }
  if (failed > 0) std::printf("%d cells failed (recorded in the error column)\n", failed);
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, bool no_smote,
             int smote_k, std::uint64_t seed) {
  const ep::Model model = ep::load_model(model_path);
  SplitData d = load_split(data_path, seed, no_smote, smote_k);
  const ep::EvalResult r = ep::evaluate(model, d.test);
  print_metrics_table(r.cm);
  std::printf("loss: %.6f\n", r.mean_loss);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pruning laboratory for a 1D convolutional ECG beat classifier"};
  app.set_version_flag("--version", ep::kArtifactVersion);
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const ep::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic beat-CSV dataset");
  std::string gen_counts = "400,400,400,400,400";
  double gen_sigma = 0.05;
  std::string gen_out;
  gen->add_option("--counts", gen_counts, "Per-class beat counts (N,S,V,F,Q)")->capture_default_str();
  gen->add_option("--sigma", gen_sigma, "Gaussian noise level")->capture_default_str();
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output beat-CSV path")->required();

  auto* train = app.add_subcommand("train", "Train the baseline model on a beat-CSV");
  std::string train_data, train_out, train_log;
  int train_epochs = 50, train_batch = 32, train_patience = 5, train_smote_k = 5;
  double train_lr = 1e-3;
  std::string train_opt = "adam";
  bool train_no_smote = false;
  train->add_option("--data", train_data, "Input beat-CSV")->required();
  train->add_option("--out", train_out, "Output model path")->required();
  train->add_option("--log", train_log, "Optional training-log CSV path");
  train->add_option("--epochs", train_epochs, "Training epochs")->capture_default_str();
  train->add_option("--batch", train_batch, "Mini-batch size")->capture_default_str();
  train->add_option("--lr", train_lr, "Learning rate")->capture_default_str();
  train->add_option("--optimizer", train_opt, "adam or sgd")->capture_default_str();
  train->add_option("--patience", train_patience, "Early-stop patience (0 disables)")->capture_default_str();
  train->add_flag("--no-smote", train_no_smote, "Skip SMOTE balancing of the training split");
  train->add_option("--smote-k", train_smote_k, "SMOTE neighbor count")->capture_default_str();
  train->add_option("--seed", seed, "RNG seed");

  auto* prune = app.add_subcommand("prune", "Apply one pruning strategy to a trained model");
  std::string prune_model, prune_data, prune_strategy, prune_out;
  double prune_sparsity = 0.0;
  int prune_ft_epochs = 10, prune_batch = 32, prune_patience = 5, prune_smote_k = 5;
  double prune_lr = 1e-3;
  std::string prune_opt = "adam";
  bool prune_no_smote = false;
  prune->add_option("--model", prune_model, "Trained baseline model")->required();
  prune->add_option("--data", prune_data, "Beat-CSV (same file used for training)")->required();
  prune->add_option("--strategy", prune_strategy, "simple, finetune or multistage")->required();
  prune->add_option("--sparsity", prune_sparsity, "Sparsity in [0,1]")->required();
  prune->add_option("--out", prune_out, "Output model path")->required();
  prune->add_option("--finetune-epochs", prune_ft_epochs, "Epochs per fine-tune call")->capture_default_str();
  prune->add_option("--batch", prune_batch, "Mini-batch size")->capture_default_str();
  prune->add_option("--lr", prune_lr, "Learning rate")->capture_default_str();
  prune->add_option("--optimizer", prune_opt, "adam or sgd")->capture_default_str();
  prune->add_option("--patience", prune_patience, "Early-stop patience (0 disables)")->capture_default_str();
  prune->add_flag("--no-smote", prune_no_smote, "Skip SMOTE balancing");
  prune->add_option("--smote-k", prune_smote_k, "SMOTE neighbor count")->capture_default_str();
  prune->add_option("--seed", seed, "RNG seed (must match the training run)");

  auto* sweep = app.add_subcommand("sweep", "Run a (strategy x sparsity) sweep");
  std::string sweep_model, sweep_data, sweep_out, sweep_figures;
  std::string sweep_strategies = "simple,finetune,multistage";
  std::string sweep_sparsities = "0.1:0.9:0.1";
  int sweep_ft_epochs = 10, sweep_batch = 32, sweep_patience = 5, sweep_jobs = 1,
      sweep_smote_k = 5;
  double sweep_lr = 1e-3;
  std::string sweep_opt = "adam";
  bool sweep_no_smote = false;
  sweep->add_option("--model", sweep_model, "Trained baseline model")->required();
  sweep->add_option("--data", sweep_data, "Beat-CSV (same file used for training)")->required();
  sweep->add_option("--out", sweep_out, "Output report CSV (JSON written alongside)")
      ->required();
  sweep->add_option("--strategies", sweep_strategies, "Comma list of strategies")->capture_default_str();
  sweep->add_option("--sparsities", sweep_sparsities, "start:stop:step or comma list")->capture_default_str();
  sweep->add_option("--figures", sweep_figures, "Directory for per-metric series CSVs");
  sweep->add_option("--finetune-epochs", sweep_ft_epochs, "Epochs per fine-tune call")->capture_default_str();
  sweep->add_option("--batch", sweep_batch, "Mini-batch size")->capture_default_str();
  sweep->add_option("--lr", sweep_lr, "Learning rate")->capture_default_str();
  sweep->add_option("--optimizer", sweep_opt, "adam or sgd")->capture_default_str();
  sweep->add_option("--patience", sweep_patience, "Early-stop patience (0 disables)")->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "Worker threads for sweep cells")->capture_default_str();
  sweep->add_flag("--no-smote", sweep_no_smote, "Skip SMOTE balancing");
  sweep->add_option("--smote-k", sweep_smote_k, "SMOTE neighbor count")->capture_default_str();
  sweep->add_option("--seed", seed, "RNG seed (must match the training run)");

  auto* eval = app.add_subcommand("eval", "Evaluate a model on the test partition");
  std::string eval_model, eval_data;
  int eval_smote_k = 5;
  bool eval_no_smote = false;
  eval->add_option("--model", eval_model, "Model path")->required();
  eval->add_option("--data", eval_data, "Beat-CSV (same file used for training)")->required();
  eval->add_flag("--no-smote", eval_no_smote, "Skip SMOTE balancing");
  eval->add_option("--smote-k", eval_smote_k, "SMOTE neighbor count")->capture_default_str();
  eval->add_option("--seed", seed, "RNG seed (must match the training run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_counts, gen_sigma, seed, gen_out);
    if (train->parsed()) {
      return cmd_train(train_data, train_out, train_log, train_epochs, train_batch, train_lr,
                       train_opt, train_patience, train_no_smote, train_smote_k, seed);
    }
    if (prune->parsed()) {
      return cmd_prune(prune_model, prune_data, prune_strategy, prune_sparsity, prune_out,
                       prune_ft_epochs, prune_batch, prune_lr, prune_opt, prune_patience,
                       prune_no_smote, prune_smote_k, seed);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_model, sweep_data, sweep_strategies, sweep_sparsities, sweep_out,
                       sweep_figures, sweep_ft_epochs, sweep_batch, sweep_lr, sweep_opt,
                       sweep_patience, sweep_jobs, sweep_no_smote, sweep_smote_k, seed);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_model, eval_data, eval_no_smote, eval_smote_k, seed);
    }
  } catch (const ep::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ep::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  } catch (const ep::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return 0;
}
