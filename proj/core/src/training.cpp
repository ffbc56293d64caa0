#include "ecgprune/training.hpp"

#include <charconv>
#include <cmath>

#include "ecgprune/errors.hpp"
#include "ecgprune/ops.hpp"
#include "ecgprune/rng.hpp"

namespace ecgprune {

EvalResult evaluate(const Model& model, const BeatSet& set) {
  if (set.empty()) throw ConfigError("cannot evaluate on an empty set");
  EvalResult r;
  double loss_sum = 0.0;
  for (const auto& rec : set.records) {
    const Tensor logits = forward(model, beat_to_tensor(rec));
    const int label = static_cast<int>(rec.label);
    const SoftmaxLoss sl = softmax_cross_entropy(logits, label);
    loss_sum += sl.loss;
    int pred = 0;
    for (std::int64_t i = 1; i < sl.probs.dim(0); ++i) {
      if (sl.probs[i] > sl.probs[pred]) pred = static_cast<int>(i);
    }
    ++r.cm.at(label, pred);
  }
  r.mean_loss = loss_sum / static_cast<double>(set.size());
  return r;
}

namespace {

TrainLog run_training(Model& model, const BeatSet& train_set, const BeatSet& val_set,
                      const TrainConfig& cfg, bool require_trainable) {
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (val_set.empty()) throw ConfigError("validation set is empty");
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (cfg.batch_size > static_cast<int>(train_set.size())) {
    throw ConfigError("batch size " + std::to_string(cfg.batch_size) +
                      " exceeds training set size " + std::to_string(train_set.size()));
  }
  const int down_to = model.lowest_trainable_layer();
  if (require_trainable && down_to == static_cast<int>(model.specs.size())) {
    throw ConfigError("no trainable parameters");
  }

  Rng rng(mix_seed(cfg.seed, "train"));
  Optimizer opt(cfg.optimizer, optimizer_slots(model));
  Gradients batch_grads = zero_gradients(model);
  ForwardTrace trace;

  TrainLog log;
  double best_val = 0.0;
  std::vector<ParamGroup> best_params;
  int epochs_since_best = 0;

  const std::size_t n = train_set.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                   n - start);
      batch_grads.reset();
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < bs; ++j) {
        const BeatRecord& rec = train_set.records[order[start + j]];
        const int label = static_cast<int>(rec.label);
        forward(model, beat_to_tensor(rec), &trace);
        batch_loss += softmax_cross_entropy(trace.logits, label).loss;
        backward_into(model, trace, label, batch_grads, down_to);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      loss_sum += batch_loss;
      batch_grads.scale(1.0 / static_cast<double>(bs));
      opt.advance();
      apply_gradients(model, batch_grads, opt);
      ++batch_index;
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(n);
    const EvalResult val = evaluate(model, val_set);
    stats.val_loss = val.mean_loss;
    stats.val_accuracy = static_cast<double>(val.cm.trace()) /
                         static_cast<double>(val.cm.total());
    if (!std::isfinite(stats.val_loss)) {
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    log.epochs.push_back(stats);
    model.history.push_back(stats);
    if (cfg.epoch_observer) cfg.epoch_observer(epoch, model, stats);

    if (log.best_epoch < 0 || stats.val_loss < best_val) {
      best_val = stats.val_loss;
      log.best_epoch = epoch;
      epochs_since_best = 0;
      if (cfg.patience > 0) best_params = model.params;
    } else {
      ++epochs_since_best;
    }
    if (cfg.patience > 0 && epochs_since_best >= cfg.patience) break;
  }

  if (cfg.patience > 0 && !best_params.empty()) {
    model.params = std::move(best_params);
  }
  return log;
}

}  // namespace

TrainLog train(Model& model, const BeatSet& train_set, const BeatSet& val_set,
               const TrainConfig& cfg) {
  return run_training(model, train_set, val_set, cfg, false);
}

TrainLog finetune(Model& model, const BeatSet& train_set, const BeatSet& val_set,
                  const TrainConfig& cfg) {
  return run_training(model, train_set, val_set, cfg, true);
}

std::string train_log_to_csv(const TrainLog& log) {
  auto fmt = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  std::string out = "epoch,train_loss,val_loss,val_accuracy\n";
  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    const auto& e = log.epochs[i];
    out += std::to_string(i) + "," + fmt(e.train_loss) + "," + fmt(e.val_loss) + "," +
           fmt(e.val_accuracy) + "\n";
  }
  return out;
}

}  // namespace ecgprune
