#include "ecgprune/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ecgprune/errors.hpp"
#include "ecgprune/rng.hpp"

namespace ecgprune {

const char* label_token(BeatLabel label) {
  switch (label) {
    case BeatLabel::N: return "N";
    case BeatLabel::S: return "S";
    case BeatLabel::V: return "V";
    case BeatLabel::F: return "F";
    case BeatLabel::Q: return "Q";
  }
  return "?";
}

std::optional<BeatLabel> parse_label(std::string_view token) {
  if (token.size() != 1) return std::nullopt;
  switch (token[0]) {
    case 'N': return BeatLabel::N;
    case 'S': return BeatLabel::S;
    case 'V': return BeatLabel::V;
    case 'F': return BeatLabel::F;
    case 'Q': return BeatLabel::Q;
    default: return std::nullopt;
  }
}

std::array<std::int64_t, kNumClasses> BeatSet::histogram() const {
  std::array<std::int64_t, kNumClasses> h{};
  for (const auto& r : records) ++h[static_cast<std::size_t>(r.label)];
  return h;
}

Tensor beat_to_tensor(const BeatRecord& beat) {
  std::vector<double> data(beat.samples.begin(), beat.samples.end());
  return Tensor({1, kBeatSamples}, std::move(data));
}

namespace {

double parse_sample(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(line_no, "non-numeric sample '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line_no, "non-finite sample '" + std::string(field) + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

BeatSet parse_beats(std::string_view text) {
  BeatSet set;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;

    BeatRecord rec;
    std::size_t field_start = 0;
    int field_idx = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i != line.size() && line[i] != ',') continue;
      std::string_view field = line.substr(field_start, i - field_start);
      field_start = i + 1;
      if (field_idx == 0) {
        auto label = parse_label(field);
        if (!label) {
          throw ParseError(line_no, "unknown label token '" + std::string(field) + "'");
        }
        rec.label = *label;
      } else if (field_idx <= kBeatSamples) {
        rec.samples[static_cast<std::size_t>(field_idx - 1)] = parse_sample(field, line_no);
      } else {
        throw ParseError(line_no, "expected " + std::to_string(kBeatSamples) +
                                      " samples, got more");
      }
      ++field_idx;
    }
    if (field_idx != kBeatSamples + 1) {
      throw ParseError(line_no, "expected " + std::to_string(kBeatSamples) +
                                    " samples, got " + std::to_string(field_idx - 1));
    }
    rec.origin = BeatOrigin::Real;
    set.records.push_back(rec);
  }
  return set;
}

std::string format_beats(const BeatSet& set) {
  std::string out;
  out.reserve(set.records.size() * (kBeatSamples * 10 + 2));
  for (const auto& rec : set.records) {
    out += label_token(rec.label);
    for (double s : rec.samples) {
      out += ',';
      out += format_double(s);
    }
    out += '\n';
  }
  return out;
}

BeatSet load_beats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_beats(buf.str());
}

void save_beats(const BeatSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << format_beats(set);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

SplitResult stratified_split(const BeatSet& set, const std::array<double, 3>& fractions,
                             std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f <= 0.0) throw ConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
  }

  SplitResult result;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      if (static_cast<int>(set.records[i].label) == c) members.push_back(i);
    }
    if (members.empty()) continue;
    const std::size_t n = members.size();
    if (n < 3) {
      result.warnings.push_back(std::string("class ") +
                                label_token(static_cast<BeatLabel>(c)) + " has " +
                                std::to_string(n) + " records, fewer than 3 partitions");
    }

    // Canonical order first so the outcome is a function of the record
    // multiset, not of input order.
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = set.records[a];
      const auto& rb = set.records[b];
      if (ra.samples != rb.samples) return ra.samples < rb.samples;
      return ra.origin < rb.origin;
    });
    Rng rng(mix_seed(seed, "split", static_cast<double>(c)));
    rng.shuffle(members);

    // Largest-remainder allocation.
    std::array<std::size_t, 3> alloc{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
      const double ideal = fractions[static_cast<std::size_t>(p)] * static_cast<double>(n);
      alloc[static_cast<std::size_t>(p)] =
          static_cast<std::size_t>(std::floor(ideal + 1e-9));
      frac[static_cast<std::size_t>(p)] =
          ideal - std::floor(ideal + 1e-9);
      assigned += alloc[static_cast<std::size_t>(p)];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[static_cast<std::size_t>(a)] >
                                                frac[static_cast<std::size_t>(b)]; });
    for (std::size_t r = assigned; r < n; ++r) {
      ++alloc[static_cast<std::size_t>(order[(r - assigned) % 3])];
    }

    std::size_t cursor = 0;
    BeatSet* parts[3] = {&result.train, &result.val, &result.test};
    for (int p = 0; p < 3; ++p) {
      for (std::size_t j = 0; j < alloc[static_cast<std::size_t>(p)]; ++j) {
        parts[p]->records.push_back(set.records[members[cursor++]]);
      }
    }
  }
  return result;
}

BeatRecord interpolate_beat(const BeatRecord& a, const BeatRecord& b, double lambda) {
  BeatRecord out;
  out.label = a.label;
  out.origin = BeatOrigin::SyntheticSmote;
  for (int i = 0; i < kBeatSamples; ++i) {
    const std::size_t t = static_cast<std::size_t>(i);
    out.samples[t] = a.samples[t] + lambda * (b.samples[t] - a.samples[t]);
  }
  return out;
}

namespace {

double squared_distance(const BeatRecord& a, const BeatRecord& b) {
  double d = 0.0;
  for (int i = 0; i < kBeatSamples; ++i) {
    const std::size_t t = static_cast<std::size_t>(i);
    const double diff = a.samples[t] - b.samples[t];
    d += diff * diff;
  }
  return d;
}

}  // namespace

SmoteResult smote_balance(const BeatSet& train, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("smote neighbor count must be >= 1, got " + std::to_string(k));
  SmoteResult result;
  result.set.records = train.records;

  const auto hist = train.histogram();
  std::int64_t majority = 0;
  for (auto c : hist) majority = std::max(majority, c);

  for (int c = 0; c < kNumClasses; ++c) {
    const std::int64_t n = hist[static_cast<std::size_t>(c)];
    if (n == 0 || n >= majority) continue;
    if (n == 1) {
      throw ConfigError(std::string("class ") + label_token(static_cast<BeatLabel>(c)) +
                        " has a single record; cannot interpolate");
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < train.records.size(); ++i) {
      if (static_cast<int>(train.records[i].label) == c) members.push_back(i);
    }
    const std::size_t count = members.size();
    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), count - 1);

    // k nearest same-class neighbors per member, ties to the lower index.
    std::vector<std::vector<std::size_t>> neighbors(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<std::pair<double, std::size_t>> dists;
      dists.reserve(count - 1);
      for (std::size_t j = 0; j < count; ++j) {
        if (j == i) continue;
        dists.emplace_back(squared_distance(train.records[members[i]],
                                            train.records[members[j]]),
                           j);
      }
      std::sort(dists.begin(), dists.end());
      neighbors[i].reserve(k_eff);
      for (std::size_t j = 0; j < k_eff; ++j) neighbors[i].push_back(dists[j].second);
    }

    Rng rng(mix_seed(seed, "smote", static_cast<double>(c)));
    for (std::int64_t need = majority - n; need > 0; --need) {
      const std::size_t base_local = static_cast<std::size_t>(rng.below(count));
      const std::size_t nb_local =
          neighbors[base_local][static_cast<std::size_t>(rng.below(k_eff))];
      const double lambda = rng.uniform();
      const std::size_t base = members[base_local];
      const std::size_t nb = members[nb_local];
      BeatRecord synth =
          interpolate_beat(result.set.records[base], result.set.records[nb], lambda);
      result.pairs.push_back({base, nb, result.set.records.size(), lambda});
      result.set.records.push_back(synth);
    }
  }
  return result;
}

namespace {

// Gaussian bump centered at c with width w and amplitude a.
void add_bump(std::array<double, kBeatSamples>& x, double c, double w, double a) {
  for (int t = 0; t < kBeatSamples; ++t) {
    const double z = (static_cast<double>(t) - c) / w;
    x[static_cast<std::size_t>(t)] += a * std::exp(-0.5 * z * z);
  }
}

}  // namespace

std::array<double, kBeatSamples> class_template(BeatLabel label) {
  std::array<double, kBeatSamples> x{};
  switch (label) {
    case BeatLabel::N:
      // P wave, narrow upright QRS with Q/S dips, T wave.
      add_bump(x, 85, 8, 0.18);
      add_bump(x, 122, 3, -0.15);
      add_bump(x, 130, 5, 1.00);
      add_bump(x, 138, 3, -0.20);
      add_bump(x, 185, 14, 0.30);
      break;
    case BeatLabel::S:
      // Early narrow beat, no P wave.
      add_bump(x, 111, 3, -0.12);
      add_bump(x, 118, 4, 0.95);
      add_bump(x, 126, 3, -0.18);
      add_bump(x, 168, 12, 0.22);
      break;
    case BeatLabel::V:
      // Wide biphasic QRS, inverted T.
      add_bump(x, 120, 13, -0.80);
      add_bump(x, 145, 11, 0.85);
      add_bump(x, 195, 16, -0.35);
      break;
    case BeatLabel::F:
      // Fusion: two merged medium peaks at reduced amplitude.
      add_bump(x, 86, 8, 0.10);
      add_bump(x, 126, 8, 0.55);
      add_bump(x, 139, 6, 0.40);
      add_bump(x, 183, 13, 0.22);
      break;
    case BeatLabel::Q:
      // Low wide hump with ripple.
      add_bump(x, 100, 5, 0.15);
      add_bump(x, 130, 22, 0.45);
      add_bump(x, 160, 5, -0.15);
      add_bump(x, 200, 8, 0.10);
      break;
  }
  return x;
}

BeatSet generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  BeatSet set;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::int64_t count = spec.counts[static_cast<std::size_t>(c)];
    if (count < 0) throw ConfigError("negative class count");
    const auto tmpl = class_template(static_cast<BeatLabel>(c));
    Rng rng(mix_seed(seed, "gen", static_cast<double>(c)));
    for (std::int64_t i = 0; i < count; ++i) {
      BeatRecord rec;
      rec.label = static_cast<BeatLabel>(c);
      rec.origin = BeatOrigin::SyntheticGenerated;
      for (int t = 0; t < kBeatSamples; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        rec.samples[ti] = tmpl[ti] + spec.noise_sigma * rng.normal();
      }
      set.records.push_back(rec);
    }
  }
  return set;
}

}  // namespace ecgprune
