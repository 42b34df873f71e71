#pragma once

// Superpositional f0 stylization: phrase register (base/mid/top lines and a
// range line), range normalization, local third-order accent shapes and the
// register deviation of an accent from its phrase.

#include <array>
#include <span>

#include "prosody/signal.hpp"

namespace prosody {

struct Line {
  double c0 = 0.0;  // intercept
  double c1 = 0.0;  // slope per normalized time unit
  double at(double t) const { return c0 + c1 * t; }
};

/// Register lines over normalized time t in [0, 1], where t = 0 and t = 1 are
/// the first and last sample times inside the fitted window.
struct RegisterStylization {
  Line base, mid, top, range;
  double start = 0.0;
  double end = 0.0;

  double norm_time(double t) const { return end > start ? (t - start) / (end - start) : 0.0; }
};

struct RegisterConfig {
  double window = 0.05;
  double step = 0.01;
  double low_percentile = 10.0;
  double high_percentile = 90.0;
};

/// Each sub-window contributes a base point (median of values below the low
/// percentile, the minimum when it holds fewer than 10 samples), a top point
/// (mirror image) and a mid point (median). Points are placed at the times of
/// the samples they are taken from. The range line is fitted to the per
/// sub-window top - base distances. Windows shorter than one sub-window are
/// fitted as a single point set with zero slopes.
RegisterStylization fit_register(const SampledTrack& f0, double start, double end,
                                 const RegisterConfig& cfg = {});

/// (f0 - base) / (top - base), with the span floored at `min_span` semitones.
SampledTrack range_normalize(const SampledTrack& f0, const RegisterStylization& reg, double min_span = 0.1);

using AccentPoly = std::array<double, 4>;

/// Least-squares cubic over the window [nucleus - w/2, nucleus + w/2] clipped to
/// [clip_lo, clip_hi]; time is mapped to [-1, 1] over the clipped extent.
/// Throws Error("accent window underpopulated") with fewer than 4 samples.
AccentPoly fit_accent_poly(const SampledTrack& norm_f0, double nucleus, double clip_lo, double clip_hi,
                           double window = 0.3);

struct GestaltDeviation {
  double lev_rmsd = 0.0;
  double rng_rmsd = 0.0;
};

/// RMSD between the midlines and between the range lines, each line evaluated
/// in its own normalized time at the given absolute times.
GestaltDeviation gestalt_deviation(const RegisterStylization& local, const RegisterStylization& phrase,
                                   std::span<const double> times);
/// Same, at the sample times of `grid` that fall inside [start, end].
GestaltDeviation gestalt_deviation(const RegisterStylization& local, const RegisterStylization& phrase,
                                   const SampledTrack& grid, double start, double end);

struct AccentShape {
  AccentPoly poly{};
  RegisterStylization local_register;
  double gst_lev = 0.0;
  double gst_rng = 0.0;
  double nucleus_time = 0.0;
};

/// Full local stylization of one pitch event: shape polynomial on the
/// range-normalized contour, local register on the semitone contour, and
/// deviation from the phrase register.
AccentShape stylize_accent(const SampledTrack& f0_st, const SampledTrack& norm_f0,
                           const RegisterStylization& phrase, double nucleus, double clip_lo, double clip_hi,
                           double window = 0.3, const RegisterConfig& reg_cfg = {});

/// Ordinary least squares y = c0 + c1 x; slope 0 when x has no spread.
Line fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace prosody
