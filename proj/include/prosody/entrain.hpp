#pragma once

// Global entrainment: each dialog act is paired with an earlier same-label act
// of its interlocutor (within) and a same-label act of an unrelated speaker
// (across); convergence and synchrony distances are contrasted as
// d = d_s - d_d.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prosody/dialacts.hpp"

namespace prosody {

/// Segment-by-feature matrix; NaN marks a missing value.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<DialogActSegment> segments;
  std::vector<std::vector<double>> values;

  std::optional<std::size_t> column_index(const std::string& name) const;
  bool has(std::size_t seg, std::size_t col) const;
};

enum class Measure : std::uint8_t { convergence, synchrony };
std::string_view to_string(Measure m);

enum class PairKind : std::uint8_t { within, across };

struct SegmentPair {
  std::size_t target = 0;
  std::size_t partner = 0;
  PairKind kind = PairKind::within;
};

/// Per (speaker, dialog) means and counts of the values present, by column.
struct SpeakerMeans {
  std::map<std::pair<std::string, std::string>, std::vector<double>> mean;
  std::map<std::pair<std::string, std::string>, std::vector<int>> count;

  /// Mean for the segment's speaker in its dialog when at least `min_count`
  /// of that speaker's segments carry the column.
  std::optional<double> get(const DialogActSegment& s, std::size_t col, int min_count = 2) const;
};

SpeakerMeans speaker_means(const FeatureTable& table);

double convergence_distance(double xa, double xb);
double synchrony_distance(double xa, double xb, double mean_a, double mean_b);
double delta_d(double d_s, double d_d);

struct PairingOptions {
  bool condition_matched = true;
};

struct SkipCounts {
  std::size_t no_within = 0;
  std::size_t no_across = 0;
};

/// One draw: per target at most one within and one across partner.
struct PairSample {
  std::vector<std::optional<std::size_t>> within;  // by target segment index
  std::vector<std::optional<std::size_t>> across;
  SkipCounts skipped;

  std::vector<SegmentPair> pairs() const;
};

PairSample sample_pairs(const std::vector<DialogActSegment>& segments, std::uint64_t seed,
                        const PairingOptions& opts = {});

/// Independent draws with seeds derived from `seed` and the draw index.
std::vector<PairSample> sample_pairs(const std::vector<DialogActSegment>& segments, std::uint64_t seed,
                                     int n_resamples, const PairingOptions& opts = {});

struct EntrainmentRecord {
  std::size_t segment = 0;
  std::string segment_id;
  std::string dialog_id;
  std::string speaker_id;
  DaLabel label = DaLabel::AC;
  Condition condition = Condition::cooperative;
  std::string feature;
  Measure measure = Measure::convergence;
  double d_s = 0.0;
  double d_d = 0.0;
  double d = 0.0;
  int resample = 0;
};

/// Records for every (target, feature, measure) where both distances exist.
std::vector<EntrainmentRecord> compute_records(const FeatureTable& table, const PairSample& sample,
                                               const SpeakerMeans& means, int resample = 0);

void write_jsonl(std::ostream& os, const std::vector<EntrainmentRecord>& records);
std::vector<EntrainmentRecord> read_jsonl(std::istream& is, const std::string& source);

/// Stable 64-bit seed derivation (FNV-1a over the tag, mixed with the base).
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

}  // namespace prosody
