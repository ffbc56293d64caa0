#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ecgprune {

struct SweepRow {
  std::string strategy;
  double eta = 0.0;
  double accuracy = 0.0;     // fractions in [0,1]
  double sensitivity = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double loss = 0.0;
  std::int64_t flops = 0;
  std::string error;  // empty on success
};

struct SweepReport {
  std::uint64_t seed = 0;
  std::string config_hash;       // hex of fnv1a64 over the canonical config string
  std::string artifact_version;  // kArtifactVersion
  std::vector<SweepRow> rows;    // sorted by (strategy, eta)
};

// `strategy,eta,accuracy,sensitivity,precision,f1,loss,flops,error` after
// '#'-prefixed metadata lines. Metric columns are percentages with two
// decimals; the JSON form keeps full precision.
std::string report_to_csv(const SweepReport& report);

// Full-precision JSON document; report_from_json(report_to_json(r)) == r.
std::string report_to_json(const SweepReport& report);
SweepReport report_from_json(const std::string& text);

// One plot-ready series file per metric: `eta` column plus one column per
// strategy. metric is one of accuracy, sensitivity, f1, loss, flops.
std::string report_series_csv(const SweepReport& report, const std::string& metric);

std::string format_percent(double fraction);  // "97.70"
std::string format_eta(double eta);           // "0.6"

}  // namespace ecgprune
