#pragma once

// Contour extraction and preprocessing: autocorrelation f0, outlier removal,
// gap interpolation, Savitzky-Golay smoothing, semitone transform and
// windowed RMS energy. All functions are pure.

#include <cstddef>
#include <utility>
#include <vector>

namespace prosody {

/// Uniformly sampled scalar contour with a validity mask (false = unvoiced/missing).
struct SampledTrack {
  std::vector<double> values;
  std::vector<bool> valid;
  double sample_rate = 100.0;
  double t0 = 0.0;

  static SampledTrack from_values(std::vector<double> v, double rate = 100.0, double start = 0.0);

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
  double end_time() const { return values.empty() ? t0 : time(values.size() - 1); }
  std::size_t valid_count() const;
  bool fully_valid() const;
  /// Throws Error when the invariants (equal lengths, positive rate) are broken.
  void check() const;
  /// Half-open index range [first, last) of samples with time inside [start, end].
  std::pair<std::size_t, std::size_t> index_range(double start, double end) const;
};

/// Mono linear PCM in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  void check() const;
};

struct SemitoneBase {
  double base_hz = 0.0;
};

struct F0Config {
  double f_min = 75.0;
  double f_max = 500.0;
  double frame_length = 0.04;
  double hop = 0.01;
  /// Minimum normalized autocorrelation peak for a frame to count as voiced.
  double voicing_threshold = 0.45;
  /// Frames whose peak amplitude is below this fraction of the recording peak are unvoiced.
  double silence_threshold = 0.03;
  /// Per-octave bonus for higher-frequency candidates, suppresses octave-down errors.
  double octave_cost = 0.01;
};

SampledTrack extract_f0_autocorr(const AudioBuffer& audio, const F0Config& cfg);
SampledTrack extract_f0_autocorr(const AudioBuffer& audio, double f_min, double f_max);

/// Interior gaps are bridged linearly, leading/trailing gaps take the nearest valid value.
SampledTrack interpolate_gaps(const SampledTrack& track);

/// Invalidates valid samples outside median +/- k * IQR. Masks only grow.
SampledTrack mark_outliers(const SampledTrack& track, double k = 2.0);

/// Order-3, width-5 Savitzky-Golay filter. Edge samples are taken from the
/// cubic fitted to the first (last) five samples, so cubics pass unchanged.
SampledTrack savgol_smooth(const SampledTrack& track);

/// Converts Hz to semitones relative to the median of the values strictly below
/// the 5th percentile (overall median when that set is empty).
std::pair<SampledTrack, SemitoneBase> semitone_transform(const SampledTrack& track_hz);

struct EnergyConfig {
  double window = 0.05;
  double hop = 0.01;
};

/// Hamming-windowed RMS, one frame per hop, frame k centred at (k + 0.5) * hop.
SampledTrack rms_energy(const AudioBuffer& audio, const EnergyConfig& cfg = {});

/// Standard preprocessing for an f0 track in Hz: outliers, interpolation,
/// smoothing, semitones.
std::pair<SampledTrack, SemitoneBase> preprocess_f0(const SampledTrack& f0_hz, double outlier_k = 2.0);

// Small statistics helpers shared by the numeric modules.
double median(std::vector<double> v);
/// Linear-interpolation percentile (q in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> v, double q);

}  // namespace prosody
