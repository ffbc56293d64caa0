#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ecgprune/dataset.hpp"

namespace ecgprune {

// 5x5 counts, rows = true class, columns = predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t& at(int truth, int pred) {
    return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
  }
  std::int64_t at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
  }
  std::int64_t total() const;
  std::int64_t row_sum(int truth) const;
  std::int64_t col_sum(int pred) const;
  std::int64_t trace() const;
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels);

// All values are fractions in [0,1]. A 0/0 ratio is reported as 0 with its
// degenerate flag set.
struct MetricsRow {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  bool sensitivity_degenerate = false;
  bool specificity_degenerate = false;
  bool precision_degenerate = false;
  bool f1_degenerate = false;
};

// One-vs-rest for class c: TP = cm[c][c], FP = column sum - TP,
// FN = row sum - TP, TN = the rest.
MetricsRow per_class_metrics(const ConfusionMatrix& cm, int cls);

// Normal/non-normal collapse with negative = N and positive = {S,V,F,Q}:
//   TN = normal beats predicted normal,
//   TP = non-normal beats classified as their correct class,
//   FN = non-normal beats predicted normal,
//   FP = everything else (the four counts partition the total).
// With this reading accuracy (TN+TP)/total equals the multiclass
// trace/total.
MetricsRow overall_metrics(const ConfusionMatrix& cm);

}  // namespace ecgprune
