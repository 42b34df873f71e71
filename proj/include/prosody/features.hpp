#pragma once

// Per dialog-act prosodic features in five sets: general energy (GEN) and f0
// (GF0) statistics, phrase register (IP), local pitch events (ACC) and rhythm
// (RHY). Missing features are simply absent from the map.

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prosody/signal.hpp"
#include "prosody/stylize.hpp"

namespace prosody {

enum class FeatureSet { GEN, GF0, IP, ACC, RHY };

inline constexpr std::array<FeatureSet, 5> kAllFeatureSets{FeatureSet::GEN, FeatureSet::GF0, FeatureSet::IP,
                                                           FeatureSet::ACC, FeatureSet::RHY};

std::string_view to_string(FeatureSet s);
FeatureSet parse_feature_set(std::string_view s);

/// Feature names of a set in table order, e.g. "rng.c0.F" or "syl.prop.f0".
const std::vector<std::string>& feature_names(FeatureSet s);
/// "IP.rng.c0.F" style column name.
std::string qualified_name(FeatureSet s, std::string_view name);
/// All qualified names, set by set.
const std::vector<std::string>& all_feature_columns();
/// Set of a qualified column name; throws Error for unknown columns.
FeatureSet set_of_column(std::string_view column);

using FeatureMap = std::map<std::string, double>;

struct FeatureVector {
  FeatureSet set = FeatureSet::GEN;
  FeatureMap entries;  // unqualified names
};

struct TrackStats {
  double max = 0.0;
  double med = 0.0;
  double sd = 0.0;  // population sd
};

/// Statistics over the valid samples with time in [start, end].
/// Throws Error("empty segment") when there are none.
TrackStats track_stats(const SampledTrack& track, double start, double end);

struct Phrase {
  double start = 0.0;
  double end = 0.0;
  RegisterStylization reg;
};

struct DialogActContext {
  double start = 0.0;
  double end = 0.0;
  std::vector<Phrase> phrases;       // overlapping the segment, in time order
  std::vector<AccentShape> accents;  // inside the segment, in time order
};

FeatureVector ip_features(const DialogActContext& ctx);
FeatureVector acc_features(const DialogActContext& ctx);

struct DctConfig {
  double cutoff = 10.0;
  double half_band = 1.0;
  bool include_dc = false;
  double min_duration = 0.2;
};

/// Share of absolute orthonormal DCT-II amplitude within rate +/- half_band
/// among all coefficients up to the cutoff, with f(k) = k / (2 N dt).
/// 0 for flat contours. Throws Error for contours shorter than min_duration.
double dct_weight(std::span<const double> contour, double sample_rate, double rate, const DctConfig& cfg = {});

FeatureVector rhy_features(const SampledTrack& f0, const SampledTrack& energy, std::span<const double> nuclei,
                           double start, double end, const DctConfig& cfg = {});

struct StylizeConfig {
  RegisterConfig reg;
  double accent_window = 0.3;
  double min_span = 0.1;
};

/// Stylized prosody of one speaker channel.
struct ChannelProsody {
  SampledTrack f0_st;
  SampledTrack energy;
  SampledTrack norm_f0;  // range-normalized per phrase
  std::vector<double> nuclei;
  std::vector<Phrase> phrases;
  std::vector<AccentShape> accents;
};

/// Phrases run from the first word start after a boundary to the next
/// boundary (track edges close the first and last stretch; without words the
/// previous boundary opens the phrase). Accents whose window holds too few
/// samples are dropped.
ChannelProsody stylize_channel(SampledTrack f0_st, SampledTrack energy, std::vector<double> nuclei,
                               std::span<const double> boundaries, std::span<const double> accents,
                               std::span<const double> word_starts = {}, const StylizeConfig& cfg = {});

DialogActContext context_for(const ChannelProsody& ch, double start, double end);

/// All five sets for one segment, keyed by qualified name.
FeatureMap segment_features(const ChannelProsody& ch, double start, double end, const DctConfig& dct = {});

}  // namespace prosody
