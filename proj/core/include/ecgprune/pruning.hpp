#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "ecgprune/dataset.hpp"
#include "ecgprune/model.hpp"
#include "ecgprune/report.hpp"
#include "ecgprune/training.hpp"

namespace ecgprune {

enum class Strategy { Simple = 0, Finetune = 1, Multistage = 2 };

const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view token);

// 0/1 mask with exactly floor(eta*N) zeros at the smallest-|w| positions.
// Ties break toward the smaller flat (row-major) index. Ranking is per
// tensor, never global across layers.
Tensor magnitude_select(const Tensor& weights, double sparsity);

struct StrategyConfig {
  Strategy strategy = Strategy::Simple;
  double sparsity = 0.0;
  int finetune_epochs = 10;  // per fine-tune call; multistage fine-tunes once per stage
  int batch_size = 32;
  OptimizerConfig optimizer{};
  int patience = 5;
  std::uint64_t seed = 0;
  // Test hooks forwarded to the fine-tuning loops / stage boundaries.
  std::function<void(int epoch, const Model&, const EpochStats&)> epoch_observer;
};

// Masks the three conv layers independently by magnitude and zeroes the
// selected weights. No retraining; every other parameter is untouched.
Model simple_prune(const Model& baseline, double sparsity);

// Masks as simple_prune, then fine-tunes with the three conv layers fully
// frozen (weights and biases): only the dense layers train.
Model prune_with_finetune(const Model& baseline, const StrategyConfig& cfg,
                          const BeatSet& train_set, const BeatSet& val_set,
                          TrainLog* log = nullptr);

// Prunes one conv layer at a time, in order, fine-tuning everything except
// already-frozen zero positions after each stage. stage_observer (when set)
// runs right after each stage completes.
Model multistage_prune(const Model& baseline, const StrategyConfig& cfg,
                       const BeatSet& train_set, const BeatSet& val_set,
                       const std::function<void(int stage, const Model&)>& stage_observer = {},
                       std::vector<TrainLog>* logs = nullptr);

Model run_strategy(const Model& baseline, const StrategyConfig& cfg, const BeatSet& train_set,
                   const BeatSet& val_set);

struct SweepConfig {
  std::vector<Strategy> strategies;
  std::vector<double> sparsities;
  int finetune_epochs = 10;
  int batch_size = 32;
  OptimizerConfig optimizer{};
  int patience = 5;
  std::uint64_t seed = 0;
  int jobs = 1;  // sweep cells are independent; >1 runs them on worker threads
};

// One row per (strategy, eta), each cell starting from a fresh copy of the
// baseline with a private seed derived from (seed, strategy, eta). A failed
// cell records its error in the row instead of aborting the sweep.
SweepReport sweep(const Model& baseline, const BeatSet& train_set, const BeatSet& val_set,
                  const BeatSet& test_set, const SweepConfig& cfg);

// Metrics for one model on one set, in sweep-row form.
SweepRow evaluate_row(const Model& model, const BeatSet& test_set, Strategy strategy,
                      double eta);

}  // namespace ecgprune
