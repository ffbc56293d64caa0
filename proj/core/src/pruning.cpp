#include "ecgprune/pruning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ecgprune/errors.hpp"
#include "ecgprune/flops.hpp"
#include "ecgprune/metrics.hpp"
#include "ecgprune/rng.hpp"
#include "ecgprune/version.hpp"

namespace ecgprune {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Simple: return "simple";
    case Strategy::Finetune: return "finetune";
    case Strategy::Multistage: return "multistage";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view token) {
  if (token == "simple") return Strategy::Simple;
  if (token == "finetune") return Strategy::Finetune;
  if (token == "multistage") return Strategy::Multistage;
  return std::nullopt;
}

Tensor magnitude_select(const Tensor& weights, double sparsity) {
  const std::int64_t n = weights.numel();
  const std::int64_t zeros = masked_count(n, sparsity);
  Tensor mask = Tensor::full(weights.shape(), 1.0);
  if (zeros == 0) return mask;

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    const double ma = std::fabs(weights[a]);
    const double mb = std::fabs(weights[b]);
    if (ma != mb) return ma < mb;
    return a < b;  // ties: smaller flat index first
  });
  for (std::int64_t i = 0; i < zeros; ++i) mask[order[static_cast<std::size_t>(i)]] = 0.0;
  return mask;
}

namespace {

void check_sparsity(double sparsity) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw ConfigError("sparsity must lie in [0,1], got " + std::to_string(sparsity));
  }
}

// Selects by magnitude on the layer's current weights and folds the result
// into the existing mask, so already-frozen bits can never come back.
void mask_layer(Model& model, int layer, double sparsity) {
  ParamGroup& group = model.params[static_cast<std::size_t>(layer)];
  const Tensor sel = magnitude_select(group.weight, sparsity);
  for (std::int64_t i = 0; i < group.mask.numel(); ++i) {
    if (sel[i] == 0.0) group.mask[i] = 0.0;
  }
  model.enforce_masks();
}

TrainConfig finetune_config(const StrategyConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.finetune_epochs;
  tc.batch_size = cfg.batch_size;
  tc.optimizer = cfg.optimizer;
  tc.patience = cfg.patience;
  tc.seed = cfg.seed;
  tc.epoch_observer = cfg.epoch_observer;
  return tc;
}

}  // namespace

Model simple_prune(const Model& baseline, double sparsity) {
  check_sparsity(sparsity);
  Model pruned = baseline;
  for (int layer : pruned.prunable_layers()) {
    mask_layer(pruned, layer, sparsity);
  }
  return pruned;
}

Model prune_with_finetune(const Model& baseline, const StrategyConfig& cfg,
                          const BeatSet& train_set, const BeatSet& val_set, TrainLog* log) {
  check_sparsity(cfg.sparsity);
  Model pruned = simple_prune(baseline, cfg.sparsity);
  // Freeze the conv layers completely (weights and biases); everything else
  // stays trainable.
  for (int layer : pruned.prunable_layers()) {
    pruned.params[static_cast<std::size_t>(layer)].weight_trainable = false;
    pruned.params[static_cast<std::size_t>(layer)].bias_trainable = false;
  }
  TrainConfig tc = finetune_config(cfg);
  tc.seed = mix_seed(cfg.seed, "finetune");
  TrainLog l = finetune(pruned, train_set, val_set, tc);
  if (log) *log = std::move(l);
  return pruned;
}

Model multistage_prune(const Model& baseline, const StrategyConfig& cfg,
                       const BeatSet& train_set, const BeatSet& val_set,
                       const std::function<void(int stage, const Model&)>& stage_observer,
                       std::vector<TrainLog>* logs) {
  check_sparsity(cfg.sparsity);
  Model pruned = baseline;
  const auto layers = pruned.prunable_layers();
  for (std::size_t stage = 0; stage < layers.size(); ++stage) {
    mask_layer(pruned, layers[stage], cfg.sparsity);
    // Everything except frozen zero positions trains at every stage.
    for (auto& group : pruned.params) {
      if (group.empty()) continue;
      group.weight_trainable = true;
      group.bias_trainable = true;
    }
    TrainConfig tc = finetune_config(cfg);
    tc.seed = mix_seed(cfg.seed, "stage", static_cast<double>(stage));
    TrainLog l = finetune(pruned, train_set, val_set, tc);
    if (logs) logs->push_back(std::move(l));
    if (stage_observer) stage_observer(static_cast<int>(stage), pruned);
  }
  return pruned;
}

Model run_strategy(const Model& baseline, const StrategyConfig& cfg, const BeatSet& train_set,
                   const BeatSet& val_set) {
  switch (cfg.strategy) {
    case Strategy::Simple: return simple_prune(baseline, cfg.sparsity);
    case Strategy::Finetune: return prune_with_finetune(baseline, cfg, train_set, val_set);
    case Strategy::Multistage: return multistage_prune(baseline, cfg, train_set, val_set);
  }
  throw ConfigError("unknown strategy");
}

SweepRow evaluate_row(const Model& model, const BeatSet& test_set, Strategy strategy,
                      double eta) {
  const EvalResult r = evaluate(model, test_set);
  const MetricsRow overall = overall_metrics(r.cm);
  SweepRow row;
  row.strategy = strategy_name(strategy);
  row.eta = eta;
  row.accuracy = overall.accuracy;
  row.sensitivity = overall.sensitivity;
  row.precision = overall.precision;
  row.f1 = overall.f1;
  row.loss = r.mean_loss;
  row.flops = flops_total(eta);
  return row;
}

SweepReport sweep(const Model& baseline, const BeatSet& train_set, const BeatSet& val_set,
                  const BeatSet& test_set, const SweepConfig& cfg) {
  for (double eta : cfg.sparsities) check_sparsity(eta);
  if (cfg.strategies.empty() || cfg.sparsities.empty()) {
    throw ConfigError("sweep needs at least one strategy and one sparsity");
  }

  struct Cell {
    Strategy strategy;
    double eta;
  };
  std::vector<Cell> cells;
  for (Strategy s : cfg.strategies) {
    for (double eta : cfg.sparsities) cells.push_back({s, eta});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.strategy != b.strategy) return static_cast<int>(a.strategy) < static_cast<int>(b.strategy);
    return a.eta < b.eta;
  });

  SweepReport report;
  report.seed = cfg.seed;
  report.artifact_version = kArtifactVersion;
  {
    std::string canon = "sweep";
    for (const auto& c : cells) {
      canon += std::string("|") + strategy_name(c.strategy) + ":" + format_eta(c.eta);
    }
    canon += "|ft=" + std::to_string(cfg.finetune_epochs);
    canon += "|bs=" + std::to_string(cfg.batch_size);
    canon += "|lr=" + std::to_string(cfg.optimizer.learning_rate);
    canon += "|pat=" + std::to_string(cfg.patience);
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canon)));
    report.config_hash = hex;
  }

  report.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      SweepRow& row = report.rows[i];
      try {
        StrategyConfig sc;
        sc.strategy = cell.strategy;
        sc.sparsity = cell.eta;
        sc.finetune_epochs = cfg.finetune_epochs;
        sc.batch_size = cfg.batch_size;
        sc.optimizer = cfg.optimizer;
        sc.patience = cfg.patience;
        sc.seed = mix_seed(cfg.seed, strategy_name(cell.strategy), cell.eta);
        const Model pruned = run_strategy(baseline, sc, train_set, val_set);
        row = evaluate_row(pruned, test_set, cell.strategy, cell.eta);
      } catch (const Error& e) {
        row.strategy = strategy_name(cell.strategy);
        row.eta = cell.eta;
        row.error = e.what();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cells.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return report;
}

}  // namespace ecgprune
