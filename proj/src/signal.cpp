#include "prosody/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "prosody/error.hpp"
#include "prosody/kernels/kernels.hpp"

namespace prosody {

SampledTrack SampledTrack::from_values(std::vector<double> v, double rate, double start) {
  SampledTrack t;
  t.valid.assign(v.size(), true);
  t.values = std::move(v);
  t.sample_rate = rate;
  t.t0 = start;
  return t;
}

std::size_t SampledTrack::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

bool SampledTrack::fully_valid() const { return valid_count() == valid.size(); }

void SampledTrack::check() const {
  if (values.size() != valid.size()) throw Error("track values and mask differ in length");
  if (!(sample_rate > 0.0)) throw Error("track sample rate must be positive");
}

std::pair<std::size_t, std::size_t> SampledTrack::index_range(double start, double end) const {
  if (values.empty() || end < start) return {0, 0};
  const double eps = 1e-9;
  const double first = std::ceil((start - t0) * sample_rate - eps);
  const double last = std::floor((end - t0) * sample_rate + eps);
  const auto n = static_cast<double>(values.size());
  const double lo = std::clamp(first, 0.0, n);
  const double hi = std::clamp(last + 1.0, 0.0, n);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

void AudioBuffer::check() const {
  if (sample_rate < 8000.0) throw InputError("audio sample rate must be at least 8000 Hz");
}

double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw Error("percentile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

std::vector<double> valid_values(const SampledTrack& t) {
  std::vector<double> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.valid[i]) out.push_back(t.values[i]);
  return out;
}

}  // namespace

SampledTrack extract_f0_autocorr(const AudioBuffer& audio, double f_min, double f_max) {
  F0Config cfg;
  cfg.f_min = f_min;
  cfg.f_max = f_max;
  return extract_f0_autocorr(audio, cfg);
}

SampledTrack extract_f0_autocorr(const AudioBuffer& audio, const F0Config& cfg) {
  if (audio.samples.empty()) throw InputError("empty input");
  if (!(cfg.f_min > 0.0) || cfg.f_min >= cfg.f_max) throw ConfigError("bad range");
  audio.check();
  const double sr = audio.sample_rate;
  const std::size_t n_samples = audio.samples.size();
  const auto window = static_cast<std::size_t>(std::lround(cfg.frame_length * sr));
  const auto min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sr / cfg.f_max)));
  const auto max_lag = static_cast<std::size_t>(std::ceil(sr / cfg.f_min)) + 1;
  const std::size_t span = window + max_lag + 1;
  if (n_samples < window) throw InputError("audio shorter than one analysis frame");

  const auto n_frames = static_cast<std::size_t>(std::floor(audio.duration() / cfg.hop + 1e-9));
  SampledTrack out;
  out.sample_rate = 1.0 / cfg.hop;
  out.t0 = 0.5 * cfg.hop;
  out.values.assign(n_frames, 0.0);
  out.valid.assign(n_frames, false);
  if (n_samples < span) return out;

  double global_peak = 0.0;
  for (double s : audio.samples) global_peak = std::max(global_peak, std::fabs(s));
  if (global_peak == 0.0) return out;

  const auto& k = kernels::active();
  std::vector<double> frame(span);
  std::vector<double> prefix(span + 1);
  const std::size_t lo_lag = min_lag - 1;
  const std::size_t hi_lag = max_lag + 1 <= span - window ? max_lag + 1 : span - window;
  std::vector<double> products(hi_lag - lo_lag + 1);
  std::vector<double> r(products.size());

  for (std::size_t f = 0; f < n_frames; ++f) {
    const double centre = (static_cast<double>(f) + 0.5) * cfg.hop * sr;
    const double start_d = std::round(centre - 0.5 * static_cast<double>(window));
    const auto start = static_cast<std::size_t>(
        std::clamp(start_d, 0.0, static_cast<double>(n_samples - span)));
    double mean = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < span; ++i) mean += audio.samples[start + i];
    mean /= static_cast<double>(span);
    for (std::size_t i = 0; i < span; ++i) {
      frame[i] = audio.samples[start + i] - mean;
      if (i < window) peak = std::max(peak, std::fabs(audio.samples[start + i]));
    }
    if (peak < cfg.silence_threshold * global_peak) continue;

    prefix[0] = 0.0;
    for (std::size_t i = 0; i < span; ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];
    const double e0 = prefix[window];
    if (e0 <= 0.0) continue;
    k.lagged_products(frame.data(), window, lo_lag, hi_lag, products.data());
    for (std::size_t j = 0; j < products.size(); ++j) {
      const std::size_t lag = lo_lag + j;
      const double el = prefix[lag + window] - prefix[lag];
      r[j] = el > 0.0 ? products[j] / std::sqrt(e0 * el) : 0.0;
    }

    double best_score = -1e300;
    double best_freq = 0.0;
    double best_strength = 0.0;
    for (std::size_t j = 1; j + 1 < r.size(); ++j) {
      if (!(r[j] >= r[j - 1] && r[j] > r[j + 1])) continue;
      const double denom = r[j - 1] - 2.0 * r[j] + r[j + 1];
      const double delta = denom != 0.0 ? 0.5 * (r[j - 1] - r[j + 1]) / denom : 0.0;
      const double strength = r[j] - 0.25 * (r[j - 1] - r[j + 1]) * delta;
      const double lag = static_cast<double>(lo_lag + j) + delta;
      const double freq = sr / lag;
      if (freq < cfg.f_min || freq > cfg.f_max) continue;
      const double score = strength + cfg.octave_cost * std::log2(freq / cfg.f_min);
      if (score > best_score) {
        best_score = score;
        best_freq = freq;
        best_strength = strength;
      }
    }
    if (best_freq > 0.0 && best_strength >= cfg.voicing_threshold) {
      out.values[f] = best_freq;
      out.valid[f] = true;
    }
  }
  return out;
}

SampledTrack interpolate_gaps(const SampledTrack& track) {
  track.check();
  const std::size_t n = track.size();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (track.valid[i]) idx.push_back(i);
  if (idx.empty()) throw InputError("no voiced frames");
  SampledTrack out = track;
  for (std::size_t i = 0; i < idx.front(); ++i) out.values[i] = track.values[idx.front()];
  for (std::size_t i = idx.back() + 1; i < n; ++i) out.values[i] = track.values[idx.back()];
  for (std::size_t g = 0; g + 1 < idx.size(); ++g) {
    const std::size_t a = idx[g], b = idx[g + 1];
    for (std::size_t i = a + 1; i < b; ++i) {
      const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
      out.values[i] = (1.0 - w) * track.values[a] + w * track.values[b];
    }
  }
  out.valid.assign(n, true);
  return out;
}

SampledTrack mark_outliers(const SampledTrack& track, double k) {
  track.check();
  SampledTrack out = track;
  const auto vals = valid_values(track);
  if (vals.size() < 5) return out;
  const double med = median(vals);
  const double iqr = percentile(vals, 75.0) - percentile(vals, 25.0);
  if (iqr <= 0.0) return out;
  const double lo = med - k * iqr, hi = med + k * iqr;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.valid[i] && (out.values[i] < lo || out.values[i] > hi)) out.valid[i] = false;
  return out;
}

SampledTrack savgol_smooth(const SampledTrack& track) {
  track.check();
  const std::size_t n = track.size();
  if (n < 5) throw InputError("track too short");
  if (!track.fully_valid()) throw InputError("savgol_smooth needs a fully valid track");
  const auto& x = track.values;
  SampledTrack out = track;
  for (std::size_t i = 2; i + 2 < n; ++i)
    out.values[i] = (-3.0 * x[i - 2] + 12.0 * x[i - 1] + 17.0 * x[i] + 12.0 * x[i + 1] - 3.0 * x[i + 2]) / 35.0;
  // Cubic through five samples evaluated at offsets -2 and -1 from the centre.
  auto edge2 = [](double a, double b, double c, double d, double e) {
    return (69.0 * a + 4.0 * b - 6.0 * c + 4.0 * d - e) / 70.0;
  };
  auto edge1 = [](double a, double b, double c, double d, double e) {
    return (2.0 * a + 27.0 * b + 12.0 * c - 8.0 * d + 2.0 * e) / 35.0;
  };
  out.values[0] = edge2(x[0], x[1], x[2], x[3], x[4]);
  out.values[1] = edge1(x[0], x[1], x[2], x[3], x[4]);
  out.values[n - 1] = edge2(x[n - 1], x[n - 2], x[n - 3], x[n - 4], x[n - 5]);
  out.values[n - 2] = edge1(x[n - 1], x[n - 2], x[n - 3], x[n - 4], x[n - 5]);
  return out;
}

std::pair<SampledTrack, SemitoneBase> semitone_transform(const SampledTrack& track_hz) {
  track_hz.check();
  const auto vals = valid_values(track_hz);
  if (vals.empty()) throw InputError("no voiced frames");
  for (double v : vals)
    if (!(v > 0.0)) throw InputError("invalid Hz");
  const double p5 = percentile(vals, 5.0);
  std::vector<double> low;
  for (double v : vals)
    if (v < p5) low.push_back(v);
  const double base = low.empty() ? median(vals) : median(low);
  SampledTrack out = track_hz;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.valid[i]) out.values[i] = 12.0 * std::log2(out.values[i] / base);
  return {std::move(out), SemitoneBase{base}};
}

SampledTrack rms_energy(const AudioBuffer& audio, const EnergyConfig& cfg) {
  audio.check();
  if (audio.duration() + 1e-12 < cfg.window) throw InputError("audio shorter than the energy window");
  const double sr = audio.sample_rate;
  const auto len = static_cast<std::size_t>(std::lround(cfg.window * sr));
  std::vector<double> hamming(len);
  for (std::size_t i = 0; i < len; ++i)
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(len - 1));
  double wnorm = 0.0;
  for (double w : hamming) wnorm += w * w;

  const auto n_frames = static_cast<std::size_t>(std::floor(audio.duration() / cfg.hop + 1e-9));
  SampledTrack out;
  out.sample_rate = 1.0 / cfg.hop;
  out.t0 = 0.5 * cfg.hop;
  out.values.assign(n_frames, 0.0);
  out.valid.assign(n_frames, true);
  const auto& k = kernels::active();
  const auto n = static_cast<std::ptrdiff_t>(audio.samples.size());
  std::vector<double> padded(len);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double centre = (static_cast<double>(f) + 0.5) * cfg.hop * sr;
    const auto start = static_cast<std::ptrdiff_t>(std::llround(centre - 0.5 * static_cast<double>(len)));
    double acc;
    if (start >= 0 && start + static_cast<std::ptrdiff_t>(len) <= n) {
      acc = k.weighted_sum_squares(audio.samples.data() + start, hamming.data(), len);
    } else {
      for (std::size_t i = 0; i < len; ++i) {
        const std::ptrdiff_t j = start + static_cast<std::ptrdiff_t>(i);
        padded[i] = (j >= 0 && j < n) ? audio.samples[static_cast<std::size_t>(j)] : 0.0;
      }
      acc = k.weighted_sum_squares(padded.data(), hamming.data(), len);
    }
    out.values[f] = std::sqrt(acc / wnorm);
  }
  return out;
}

std::pair<SampledTrack, SemitoneBase> preprocess_f0(const SampledTrack& f0_hz, double outlier_k) {
  auto cleaned = interpolate_gaps(mark_outliers(f0_hz, outlier_k));
  if (cleaned.size() >= 5) cleaned = savgol_smooth(cleaned);
  for (double& v : cleaned.values) v = std::max(v, 1e-3);
  return semitone_transform(cleaned);
}

}  // namespace prosody
