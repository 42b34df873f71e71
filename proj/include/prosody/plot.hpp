#pragma once

// Entrainment profile of one (dialog act, feature set, measure) cell as SVG:
// per-feature mean within (solid) and across (dashed) distances over a
// feature axis, with the two grand means as vertical rules.

#include <optional>
#include <span>
#include <string>

#include "prosody/entrain.hpp"
#include "prosody/features.hpp"

namespace prosody {

struct ProfilePlotSpec {
  DaLabel label = DaLabel::EX;
  FeatureSet set = FeatureSet::IP;
  Measure measure = Measure::convergence;
  std::optional<Condition> condition;  // empty: both conditions
  double width = 480.0;
  double height = 360.0;
};

/// Throws Error("no data") when no record falls in the cell.
std::string plot_profiles(std::span<const EntrainmentRecord> records, const ProfilePlotSpec& spec);

}  // namespace prosody
