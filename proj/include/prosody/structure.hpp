#pragma once

// Prosodic structure from a speaker channel plus its word alignment:
// energy-based syllable nuclei, and bootstrapped nearest-centroid detection of
// phrase boundaries and pitch accents.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prosody/signal.hpp"
#include "prosody/stylize.hpp"

namespace prosody {

struct WordSegment {
  std::string dialog_id;
  std::string speaker_id;
  double start = 0.0;
  double end = 0.0;
  std::string word;
  std::optional<double> stress_nucleus;
  bool pause_followed = false;
};

/// Sets pause_followed on a single speaker's time-sorted word stream: the gap to
/// the next word exceeds `min_pause` seconds, or the word is the last one.
void mark_pauses(std::vector<WordSegment>& words, double min_pause = 0.2);

/// Two-class nearest-centroid model over standardized features.
struct CentroidModel {
  std::vector<std::string> feature_names;
  std::vector<double> centroid_pos;
  std::vector<double> centroid_neg;
  std::vector<double> weights;  // non-negative, sum to 1
  std::vector<double> feature_mean;
  std::vector<double> feature_sd;

  std::vector<double> standardize(std::span<const double> raw) const;
  double distance_pos(std::span<const double> raw) const;
  double distance_neg(std::span<const double> raw) const;
  /// distance_neg - distance_pos; positive values classify as the positive class.
  double margin(std::span<const double> raw) const;
};

/// Builds centroids from weakly labelled rows (init: 1 positive, 0 negative,
/// -1 unlabelled). Standardization statistics use all rows; weights are
/// |mean_pos - mean_neg| / pooled sd per feature, normalized to sum 1.
/// Throws Error("cannot bootstrap") when either class is empty.
CentroidModel bootstrap_centroids(const std::vector<std::vector<double>>& rows, const std::vector<int>& init,
                                  std::vector<std::string> names);

struct NucleusConfig {
  double band_low = 200.0;
  double band_high = 3000.0;
  double analysis_window = 0.05;
  double reference_window = 0.2;
  double step = 0.05;
  double energy_factor = 1.1;
  double absolute_fraction = 0.05;
  double min_gap = 0.1;
  /// Search step used to refine each nucleus position around its coarse maximum.
  double refine_step = 0.005;
};

std::vector<double> detect_syllable_nuclei(const AudioBuffer& audio, const NucleusConfig& cfg = {});

/// Zero-phase Butterworth band-pass (two cascaded 2nd-order sections per edge).
std::vector<double> bandpass(const AudioBuffer& audio, double low_hz, double high_hz);

struct BoundaryConfig {
  double min_phrase = 1.0;
  double context_window = 0.5;
};

struct BoundaryResult {
  std::vector<double> boundaries;
  CentroidModel model;
};

/// Candidates are the right edges of all words. Features: RMSD between the
/// midlines fitted to the voiced samples (valid mask) within context_window
/// before and after the edge, midline reset, and the z-scored distance
/// between the last nucleus of the word and its end.
BoundaryResult detect_phrase_boundaries(const std::vector<WordSegment>& words, const SampledTrack& f0_st,
                                        std::span<const double> nuclei, const BoundaryConfig& cfg = {});

/// Boundaries at every pause-followed word edge; used when bootstrapping fails.
std::vector<double> pause_boundaries(const std::vector<WordSegment>& words);

struct AccentConfig {
  double long_word = 0.5;   // longer words initialize the accented centroid
  double short_word = 0.1;  // shorter words initialize the unaccented centroid
  double window = 0.3;
  /// Peak energy is taken within +/- energy_window / 2 of the nucleus.
  double energy_window = 0.1;
};

struct AccentResult {
  std::vector<double> accents;
  CentroidModel model;
};

/// `phrases` are the [start, end] extents used to clip accent windows.
AccentResult detect_pitch_accents(const std::vector<WordSegment>& words, const SampledTrack& norm_f0,
                                  const SampledTrack& energy, std::span<const double> nuclei,
                                  std::span<const std::pair<double, double>> phrases,
                                  const AccentConfig& cfg = {});

struct ProsodicStructure {
  std::vector<double> nuclei;
  std::vector<double> phrase_boundaries;
  std::vector<double> accents;
};

}  // namespace prosody
