#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecgprune/tensor.hpp"

namespace ecgprune {

// One segmented heartbeat: a 260-sample window at 360 Hz centered on the QRS
// complex.
constexpr int kBeatSamples = 260;

// AAMI classes: N, S (SVEB), V (VEB), F, Q.
constexpr int kNumClasses = 5;

enum class BeatLabel : std::uint8_t { N = 0, S = 1, V = 2, F = 3, Q = 4 };
enum class BeatOrigin : std::uint8_t { Real = 0, SyntheticSmote = 1, SyntheticGenerated = 2 };

const char* label_token(BeatLabel label);
std::optional<BeatLabel> parse_label(std::string_view token);

struct BeatRecord {
  std::array<double, kBeatSamples> samples{};
  BeatLabel label = BeatLabel::N;
  BeatOrigin origin = BeatOrigin::Real;
};

struct BeatSet {
  std::vector<BeatRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::array<std::int64_t, kNumClasses> histogram() const;
};

// [1, 260] tensor view of one beat.
Tensor beat_to_tensor(const BeatRecord& beat);

// Beat-CSV: one row per beat, `label,s1,...,s260`, '#' comment lines skipped.
// Parse failures throw ParseError naming the offending line.
BeatSet load_beats(const std::string& path);
void save_beats(const BeatSet& set, const std::string& path);
BeatSet parse_beats(std::string_view text);
std::string format_beats(const BeatSet& set);

struct SplitResult {
  BeatSet train, val, test;
  std::vector<std::string> warnings;
};

// Per-class proportional allocation with largest-remainder rounding and a
// seeded shuffle inside each class. Records are brought into a canonical
// order first, so the same multiset of beats splits the same way regardless
// of input order.
SplitResult stratified_split(const BeatSet& set, const std::array<double, 3>& fractions,
                             std::uint64_t seed);

// a + lambda * (b - a), labeled like a, origin SyntheticSmote.
BeatRecord interpolate_beat(const BeatRecord& a, const BeatRecord& b, double lambda);

struct SmotePair {
  std::size_t base;      // index into SmoteResult::set.records
  std::size_t neighbor;  // index into SmoteResult::set.records
  std::size_t synth;     // index of the emitted synthetic record
  double lambda;
};

struct SmoteResult {
  BeatSet set;
  std::vector<SmotePair> pairs;  // provenance of every synthetic record
};

// Oversamples every minority class up to the majority count by interpolating
// between a random class member and one of its k nearest same-class
// neighbors (Euclidean distance). Original records are kept untouched in
// their input order; synthetics are appended.
SmoteResult smote_balance(const BeatSet& train, int k, std::uint64_t seed);

struct SyntheticSpec {
  std::array<std::int64_t, kNumClasses> counts{};
  double noise_sigma = 0.05;
};

// Class-parameterized morphology templates (distinct QRS width, amplitude,
// polarity and offset bumps per class) plus seeded Gaussian noise. With
// noise_sigma == 0 all beats of a class are identical.
BeatSet generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Noise-free morphology template for one class.
std::array<double, kBeatSamples> class_template(BeatLabel label);

}  // namespace ecgprune
