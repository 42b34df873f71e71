#pragma once

// Significance testing over entrainment records: Welch t-tests per
// (condition, dialog act, feature set, measure) cell, sign grids, proportion
// tables by grouping level, and a speaker-stratified permutation test.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prosody/dialacts.hpp"
#include "prosody/entrain.hpp"
#include "prosody/features.hpp"

namespace prosody {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Two-sided unequal-variance t-test. Both samples need at least two values.
/// Zero variance in both samples gives t = 0, p = 1 for equal means and throws
/// Error("degenerate samples") otherwise.
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);

enum class Sign : std::uint8_t { zero, plus, minus };
std::string_view to_string(Sign s);

struct SignCell {
  Condition condition = Condition::cooperative;
  DaLabel label = DaLabel::AC;
  FeatureSet set = FeatureSet::GEN;
  std::string feature;  // empty when the set is pooled
  Measure measure = Measure::convergence;
  Sign sign = Sign::zero;
  bool available = false;  // false: too little data, sign stays 0
  double p = 1.0;
  double t = 0.0;
  double mean_d_s = 0.0;
  double mean_d_d = 0.0;
  std::size_t n = 0;
};

struct SignOptions {
  double alpha = 0.05;
  bool per_feature = false;
};

/// One cell per (condition, label, set or feature, measure) present in the records.
/// Cells are returned in a fixed order independent of record order.
std::vector<SignCell> sign_table(std::span<const EntrainmentRecord> records, const SignOptions& opts = {});

/// Majority vote over resamples: + or - when more than half of the draws agree,
/// otherwise 0. p and means are medians over the draws.
struct SignSummary {
  SignCell cell;  // consensus sign, median statistics
  int n_plus = 0;
  int n_minus = 0;
  int n_draws = 0;
  double p_min = 1.0;
  double p_max = 1.0;
};
std::vector<SignSummary> summarize_draws(const std::vector<std::vector<SignCell>>& draws);

struct ProportionRow {
  std::string dimension;
  std::string level;
  Condition condition = Condition::cooperative;
  double p_plus = 0.0;
  double p_minus = 0.0;
  std::size_t n_cells = 0;
};

/// Cells whose level function returns empty are left out.
using LevelOf = std::function<std::optional<std::string>(const SignCell&)>;
std::vector<ProportionRow> proportion_table(std::span<const SignCell> cells, const std::string& dimension,
                                            const LevelOf& level_of);

struct GroupTestResult {
  double p = 1.0;
  double diff = 0.0;  // mean(level 1) - mean(level 0) over the retained strata
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t strata = 0;
};

/// Two-sided permutation test of the mean difference between levels 0 and 1,
/// permuting level labels within strata. Strata holding one level only are
/// dropped. p = (1 + #{|perm| >= |obs|}) / (1 + n_perm).
GroupTestResult permutation_group_test(std::span<const double> values, std::span<const int> levels,
                                       std::span<const int> strata, int n_perm, std::uint64_t seed);

/// One-sample Kolmogorov-Smirnov test against U(0, 1); returns the p-value.
double ks_uniform_pvalue(std::vector<double> sample);

}  // namespace prosody
