#include "ecgprune/metrics.hpp"

#include "ecgprune/errors.hpp"

namespace ecgprune {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (std::int64_t v : row) t += v;
  }
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t t = 0;
  for (std::int64_t v : counts[static_cast<std::size_t>(truth)]) t += v;
  return t;
}

std::int64_t ConfusionMatrix::col_sum(int pred) const {
  std::int64_t t = 0;
  for (const auto& row : counts) t += row[static_cast<std::size_t>(pred)];
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int c = 0; c < kNumClasses; ++c) t += at(c, c);
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) {
    throw ShapeError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumClasses || preds[i] < 0 || preds[i] >= kNumClasses) {
      throw ConfigError("class index out of range at position " + std::to_string(i));
    }
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

namespace {

double ratio(std::int64_t num, std::int64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

MetricsRow from_binary_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                              std::int64_t tn) {
  MetricsRow row;
  const std::int64_t total = tp + fp + fn + tn;
  bool acc_degenerate = false;
  row.accuracy = ratio(tp + tn, total, acc_degenerate);
  row.sensitivity = ratio(tp, tp + fn, row.sensitivity_degenerate);
  row.specificity = ratio(tn, tn + fp, row.specificity_degenerate);
  row.precision = ratio(tp, tp + fp, row.precision_degenerate);
  const double pr = row.precision + row.sensitivity;
  if (pr == 0.0) {
    row.f1 = 0.0;
    row.f1_degenerate = true;
  } else {
    row.f1 = 2.0 * row.precision * row.sensitivity / pr;
  }
  return row;
}

}  // namespace

MetricsRow per_class_metrics(const ConfusionMatrix& cm, int cls) {
  if (cls < 0 || cls >= kNumClasses) throw ConfigError("class index out of range");
  if (cm.total() == 0) throw ConfigError("empty confusion matrix");
  const std::int64_t tp = cm.at(cls, cls);
  const std::int64_t fp = cm.col_sum(cls) - tp;
  const std::int64_t fn = cm.row_sum(cls) - tp;
  const std::int64_t tn = cm.total() - tp - fp - fn;
  return from_binary_counts(tp, fp, fn, tn);
}

MetricsRow overall_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ConfigError("empty confusion matrix");
  const std::int64_t tn = cm.at(0, 0);
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    tp += cm.at(c, c);
    fn += cm.at(c, 0);
  }
  const std::int64_t fp = cm.total() - tn - tp - fn;
  MetricsRow row = from_binary_counts(tp, fp, fn, tn);
  // (tn + tp) / total is exactly the multiclass trace / total here.
  return row;
}

}  // namespace ecgprune
