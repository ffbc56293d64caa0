#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "ecgprune/dataset.hpp"
#include "ecgprune/metrics.hpp"
#include "ecgprune/model.hpp"
#include "ecgprune/optimizer.hpp"

namespace ecgprune {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  OptimizerConfig optimizer{};
  int patience = 5;  // 0 disables early stopping
  std::uint64_t seed = 0;
  // Test hook, called after every completed epoch.
  std::function<void(int epoch, const Model& model, const EpochStats& stats)> epoch_observer;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;  // epoch with the lowest validation loss
};

// Mini-batch cross-entropy training with seeded shuffling. Masked positions
// and untrainable groups stay bit-identical. With patience > 0 the model is
// restored to the best-validation-loss epoch; training stops once the
// validation loss has not improved for `patience` epochs.
TrainLog train(Model& model, const BeatSet& train_set, const BeatSet& val_set,
               const TrainConfig& cfg);

// Same loop, but requires at least one trainable parameter group.
TrainLog finetune(Model& model, const BeatSet& train_set, const BeatSet& val_set,
                  const TrainConfig& cfg);

struct EvalResult {
  ConfusionMatrix cm;
  double mean_loss = 0.0;
};
EvalResult evaluate(const Model& model, const BeatSet& set);

// `epoch,train_loss,val_loss,val_accuracy` rows.
std::string train_log_to_csv(const TrainLog& log);

}  // namespace ecgprune
