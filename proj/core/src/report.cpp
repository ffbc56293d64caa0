#include "ecgprune/report.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "ecgprune/errors.hpp"

namespace ecgprune {

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string format_eta(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eta);
  return buf;
}

namespace {

std::string format_loss(double loss) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", loss);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string report_to_csv(const SweepReport& report) {
  std::string out;
  out += "# seed=" + std::to_string(report.seed) + "\n";
  out += "# config=" + report.config_hash + "\n";
  out += "# version=" + report.artifact_version + "\n";
  out += "strategy,eta,accuracy,sensitivity,precision,f1,loss,flops,error\n";
  for (const auto& row : report.rows) {
    out += row.strategy;
    out += "," + format_eta(row.eta);
    out += "," + format_percent(row.accuracy);
    out += "," + format_percent(row.sensitivity);
    out += "," + format_percent(row.precision);
    out += "," + format_percent(row.f1);
    out += "," + format_loss(row.loss);
    out += "," + std::to_string(row.flops);
    out += "," + csv_escape(row.error);
    out += "\n";
  }
  return out;
}

std::string report_to_json(const SweepReport& report) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["config"] = report.config_hash;
  j["version"] = report.artifact_version;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["strategy"] = row.strategy;
    r["eta"] = row.eta;
    r["accuracy"] = row.accuracy;
    r["sensitivity"] = row.sensitivity;
    r["precision"] = row.precision;
    r["f1"] = row.f1;
    r["loss"] = row.loss;
    r["flops"] = row.flops;
    r["error"] = row.error;
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

SweepReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid report JSON: ") + e.what());
  }
  SweepReport report;
  try {
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_hash = j.at("config").get<std::string>();
    report.artifact_version = j.at("version").get<std::string>();
    for (const auto& r : j.at("rows")) {
      SweepRow row;
      row.strategy = r.at("strategy").get<std::string>();
      row.eta = r.at("eta").get<double>();
      row.accuracy = r.at("accuracy").get<double>();
      row.sensitivity = r.at("sensitivity").get<double>();
      row.precision = r.at("precision").get<double>();
      row.f1 = r.at("f1").get<double>();
      row.loss = r.at("loss").get<double>();
      row.flops = r.at("flops").get<std::int64_t>();
      row.error = r.at("error").get<std::string>();
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report JSON missing fields: ") + e.what());
  }
  return report;
}

std::string report_series_csv(const SweepReport& report, const std::string& metric) {
  auto value_of = [&](const SweepRow& row) -> std::string {
    if (metric == "accuracy") return format_percent(row.accuracy);
    if (metric == "sensitivity") return format_percent(row.sensitivity);
    if (metric == "f1") return format_percent(row.f1);
    if (metric == "loss") return format_loss(row.loss);
    if (metric == "flops") return std::to_string(row.flops);
    throw ConfigError("unknown series metric '" + metric + "'");
  };

  std::vector<std::string> strategies;
  std::vector<double> etas;
  for (const auto& row : report.rows) {
    if (std::find(strategies.begin(), strategies.end(), row.strategy) == strategies.end()) {
      strategies.push_back(row.strategy);
    }
    if (std::find(etas.begin(), etas.end(), row.eta) == etas.end()) etas.push_back(row.eta);
  }
  std::sort(etas.begin(), etas.end());

  std::string out = "eta";
  for (const auto& s : strategies) out += "," + s;
  out += "\n";
  for (double eta : etas) {
    out += format_eta(eta);
    for (const auto& s : strategies) {
      out += ",";
      for (const auto& row : report.rows) {
        if (row.strategy == s && row.eta == eta && row.error.empty()) {
          out += value_of(row);
          break;
        }
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace ecgprune
