#include "prosody/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "prosody/error.hpp"

namespace prosody {

void mark_pauses(std::vector<WordSegment>& words, double min_pause) {
  for (std::size_t i = 0; i < words.size(); ++i)
    words[i].pause_followed = (i + 1 == words.size()) || (words[i + 1].start - words[i].end > min_pause);
}

// ---------------------------------------------------------------- centroids

std::vector<double> CentroidModel::standardize(std::span<const double> raw) const {
  std::vector<double> z(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) z[i] = (raw[i] - feature_mean[i]) / feature_sd[i];
  return z;
}

namespace {

double weighted_distance(const std::vector<double>& z, const std::vector<double>& c, const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += w[i] * (z[i] - c[i]) * (z[i] - c[i]);
  return std::sqrt(acc);
}

}  // namespace

double CentroidModel::distance_pos(std::span<const double> raw) const {
  return weighted_distance(standardize(raw), centroid_pos, weights);
}
double CentroidModel::distance_neg(std::span<const double> raw) const {
  return weighted_distance(standardize(raw), centroid_neg, weights);
}
double CentroidModel::margin(std::span<const double> raw) const {
  const auto z = standardize(raw);
  return weighted_distance(z, centroid_neg, weights) - weighted_distance(z, centroid_pos, weights);
}

CentroidModel bootstrap_centroids(const std::vector<std::vector<double>>& rows, const std::vector<int>& init,
                                  std::vector<std::string> names) {
  if (rows.size() != init.size()) throw Error("bootstrap rows and labels differ in length");
  const std::size_t dim = names.size();
  std::size_t n_pos = 0, n_neg = 0;
  for (int v : init) {
    n_pos += v == 1;
    n_neg += v == 0;
  }
  if (n_pos == 0 || n_neg == 0) throw Error("cannot bootstrap");

  CentroidModel m;
  m.feature_names = std::move(names);
  m.feature_mean.assign(dim, 0.0);
  m.feature_sd.assign(dim, 1.0);
  const auto n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t j = 0; j < dim; ++j) m.feature_mean[j] += r[j] / n;
  for (std::size_t j = 0; j < dim; ++j) {
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[j] - m.feature_mean[j]) * (r[j] - m.feature_mean[j]);
    const double sd = std::sqrt(ss / n);
    m.feature_sd[j] = sd > 1e-12 ? sd : 1.0;
  }

  m.centroid_pos.assign(dim, 0.0);
  m.centroid_neg.assign(dim, 0.0);
  std::vector<std::vector<double>> z(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) z[i] = m.standardize(rows[i]);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (init[i] == 1)
      for (std::size_t j = 0; j < dim; ++j) m.centroid_pos[j] += z[i][j] / static_cast<double>(n_pos);
    if (init[i] == 0)
      for (std::size_t j = 0; j < dim; ++j) m.centroid_neg[j] += z[i][j] / static_cast<double>(n_neg);
  }

  m.weights.assign(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    double ss_pos = 0.0, ss_neg = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (init[i] == 1) ss_pos += (z[i][j] - m.centroid_pos[j]) * (z[i][j] - m.centroid_pos[j]);
      if (init[i] == 0) ss_neg += (z[i][j] - m.centroid_neg[j]) * (z[i][j] - m.centroid_neg[j]);
    }
    const double dof = static_cast<double>(n_pos + n_neg) - 2.0;
    const double pooled = dof > 0.0 ? std::sqrt((ss_pos + ss_neg) / dof) : 1.0;
    m.weights[j] = std::fabs(m.centroid_pos[j] - m.centroid_neg[j]) / std::max(pooled, 1e-6);
  }
  const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  for (auto& w : m.weights) w = total > 0.0 ? w / total : 1.0 / static_cast<double>(dim);
  return m;
}

// ---------------------------------------------------------------- nuclei

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
      double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      // decaying tails in silence would otherwise go subnormal
      if (std::fabs(y) < 1e-200) y = 0.0;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
};

Biquad make_biquad(double freq, double sr, double q, bool highpass) {
  const double w0 = 2.0 * std::numbers::pi * freq / sr;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad b{};
  if (highpass) {
    b.b0 = (1.0 + cw) / 2.0 / a0;
    b.b1 = -(1.0 + cw) / a0;
  } else {
    b.b0 = (1.0 - cw) / 2.0 / a0;
    b.b1 = (1.0 - cw) / a0;
  }
  b.b2 = b.b0;
  b.a1 = -2.0 * cw / a0;
  b.a2 = (1.0 - alpha) / a0;
  return b;
}

}  // namespace

std::vector<double> bandpass(const AudioBuffer& audio, double low_hz, double high_hz) {
  const double sr = audio.sample_rate;
  const double hi = std::min(high_hz, 0.45 * sr);
  // 4th-order Butterworth section Qs
  constexpr double kQ1 = 0.54119610014619701;
  constexpr double kQ2 = 1.3065629648763766;
  const std::array<Biquad, 4> sections{make_biquad(low_hz, sr, kQ1, true), make_biquad(low_hz, sr, kQ2, true),
                                       make_biquad(hi, sr, kQ1, false), make_biquad(hi, sr, kQ2, false)};
  std::vector<double> x = audio.samples;
  for (const auto& s : sections) s.run(x);
  std::reverse(x.begin(), x.end());
  for (const auto& s : sections) s.run(x);
  std::reverse(x.begin(), x.end());
  return x;
}

std::vector<double> detect_syllable_nuclei(const AudioBuffer& audio, const NucleusConfig& cfg) {
  if (audio.samples.empty()) return {};
  audio.check();
  const auto filtered = bandpass(audio, cfg.band_low, cfg.band_high);
  const double sr = audio.sample_rate;
  std::vector<double> prefix(filtered.size() + 1, 0.0);
  for (std::size_t i = 0; i < filtered.size(); ++i) prefix[i + 1] = prefix[i] + filtered[i] * filtered[i];
  const double duration = audio.duration();

  // Mean power in a window of length `len` centred at time t, clipped to the signal.
  auto power = [&](double t, double len) {
    const double a = std::clamp((t - 0.5 * len) * sr, 0.0, static_cast<double>(filtered.size()));
    const double b = std::clamp((t + 0.5 * len) * sr, 0.0, static_cast<double>(filtered.size()));
    const auto ia = static_cast<std::size_t>(std::lround(a));
    const auto ib = static_cast<std::size_t>(std::lround(b));
    return ib > ia ? (prefix[ib] - prefix[ia]) / static_cast<double>(ib - ia) : 0.0;
  };

  std::vector<double> times, ea, er;
  for (double t = 0.5 * cfg.step; t <= duration; t += cfg.step) {
    times.push_back(t);
    ea.push_back(power(t, cfg.analysis_window));
    er.push_back(power(t, cfg.reference_window));
  }
  if (times.empty()) return {};
  const double peak = *std::max_element(ea.begin(), ea.end());
  if (peak <= 0.0) return {};

  struct Candidate {
    double time;
    double energy;
  };
  std::vector<Candidate> cands;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const bool left_ok = k == 0 || ea[k] > ea[k - 1];
    const bool right_ok = k + 1 == times.size() || ea[k] >= ea[k + 1];
    if (!left_ok || !right_ok) continue;
    if (ea[k] < cfg.energy_factor * er[k] || ea[k] < cfg.absolute_fraction * peak) continue;
    double best_t = times[k], best_e = ea[k];
    if (cfg.refine_step > 0.0) {
      for (double t = times[k] - 0.5 * cfg.step; t <= times[k] + 0.5 * cfg.step + 1e-12; t += cfg.refine_step) {
        if (t < 0.0 || t > duration) continue;
        const double e = power(t, cfg.analysis_window);
        if (e > best_e) {
          best_e = e;
          best_t = t;
        }
      }
    }
    cands.push_back({best_t, best_e});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.energy > b.energy || (a.energy == b.energy && a.time < b.time);
  });
  std::vector<double> kept;
  for (const auto& c : cands) {
    const bool clear = std::all_of(kept.begin(), kept.end(),
                                   [&](double t) { return std::fabs(t - c.time) >= cfg.min_gap; });
    if (clear) kept.push_back(c.time);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// ---------------------------------------------------------------- boundaries

std::vector<double> pause_boundaries(const std::vector<WordSegment>& words) {
  std::vector<double> out;
  for (const auto& w : words)
    if (w.pause_followed) out.push_back(w.end);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Midline over the `count` voiced samples before (after) time t; false when none.
bool voiced_midline(const SampledTrack& f0, double t, std::size_t count, bool before, Line& out) {
  std::vector<double> v;
  if (before) {
    std::size_t i = f0.index_range(f0.t0, t).second;
    while (i > 0 && v.size() < count) {
      --i;
      if (f0.valid[i]) v.push_back(f0.values[i]);
    }
    std::reverse(v.begin(), v.end());
  } else {
    for (std::size_t i = f0.index_range(f0.t0, t).second; i < f0.size() && v.size() < count; ++i)
      if (f0.valid[i] && f0.time(i) > t + 1e-9) v.push_back(f0.values[i]);
  }
  if (v.empty()) return false;
  const auto seg = SampledTrack::from_values(std::move(v), f0.sample_rate, 0.0);
  out = fit_register(seg, seg.t0, seg.end_time()).mid;
  return true;
}

// Pause intervals of a word stream, including the silence before the first word.
std::vector<std::pair<double, double>> pause_intervals(const std::vector<WordSegment>& words) {
  std::vector<std::pair<double, double>> out;
  if (words.empty()) return out;
  out.emplace_back(-std::numeric_limits<double>::infinity(), words.front().start);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!words[i].pause_followed) continue;
    const double next = i + 1 < words.size() ? words[i + 1].start : std::numeric_limits<double>::infinity();
    out.emplace_back(words[i].end, next);
  }
  return out;
}

double distance_to_interval(double t, const std::pair<double, double>& iv) {
  if (t < iv.first) return iv.first - t;
  if (t > iv.second) return t - iv.second;
  return 0.0;
}

void zscore_column(std::vector<std::vector<double>>& rows, std::size_t col) {
  if (rows.empty()) return;
  double mean = 0.0;
  for (const auto& r : rows) mean += r[col];
  mean /= static_cast<double>(rows.size());
  double ss = 0.0;
  for (const auto& r : rows) ss += (r[col] - mean) * (r[col] - mean);
  const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
  for (auto& r : rows) r[col] = sd > 1e-12 ? (r[col] - mean) / sd : 0.0;
}

}  // namespace

BoundaryResult detect_phrase_boundaries(const std::vector<WordSegment>& words, const SampledTrack& f0_st,
                                        std::span<const double> nuclei, const BoundaryConfig& cfg) {
  if (words.size() < 2) throw Error("boundary detection needs at least two words");
  const auto pauses = pause_intervals(words);

  std::vector<std::vector<double>> rows;
  std::vector<int> init;
  rows.reserve(words.size());
  for (const auto& w : words) {
    const double t = w.end;
    Line pre, post;
    const auto count = static_cast<std::size_t>(std::lround(cfg.context_window * f0_st.sample_rate));
    const bool have_pre = voiced_midline(f0_st, t, count, true, pre);
    const bool have_post = voiced_midline(f0_st, t, count, false, post);
    double rmsd = 0.0, reset = 0.0;
    if (have_pre && have_post) {
      constexpr int kGrid = 11;
      for (int g = 0; g < kGrid; ++g) {
        const double tau = static_cast<double>(g) / (kGrid - 1);
        const double d = pre.at(tau) - post.at(tau);
        rmsd += d * d;
      }
      rmsd = std::sqrt(rmsd / kGrid);
      reset = std::fabs(post.at(0.0) - pre.at(1.0));
    }
    double last_nucleus = -1.0;
    for (double n : nuclei)
      if (n >= w.start && n <= w.end) last_nucleus = n;
    const double tail = last_nucleus >= 0.0 ? w.end - last_nucleus : 0.5 * (w.end - w.start);
    rows.push_back({rmsd, reset, tail});

    int label = -1;
    if (w.pause_followed) {
      label = 1;
    } else {
      const bool near_pause = std::any_of(pauses.begin(), pauses.end(), [&](const auto& iv) {
        return distance_to_interval(t, iv) < cfg.min_phrase;
      });
      if (near_pause) label = 0;
    }
    init.push_back(label);
  }
  zscore_column(rows, 2);

  BoundaryResult result;
  result.model = bootstrap_centroids(rows, init, {"mid.rmsd", "mid.reset", "tail.z"});

  std::vector<double> fixed;
  struct Scored {
    double time;
    double margin;
  };
  std::vector<Scored> proposed;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (init[i] == 1) fixed.push_back(words[i].end);
    if (init[i] != -1) continue;
    const double m = result.model.margin(rows[i]);
    if (m > 0.0) proposed.push_back({words[i].end, m});
  }
  std::sort(proposed.begin(), proposed.end(), [](const Scored& a, const Scored& b) {
    return a.margin > b.margin || (a.margin == b.margin && a.time < b.time);
  });
  std::vector<double> accepted = fixed;
  for (const auto& p : proposed) {
    const bool clear = std::all_of(accepted.begin(), accepted.end(),
                                   [&](double t) { return std::fabs(t - p.time) >= cfg.min_phrase; });
    if (clear) accepted.push_back(p.time);
  }
  std::sort(accepted.begin(), accepted.end());
  accepted.erase(std::unique(accepted.begin(), accepted.end()), accepted.end());
  result.boundaries = std::move(accepted);
  return result;
}

// ---------------------------------------------------------------- accents

AccentResult detect_pitch_accents(const std::vector<WordSegment>& words, const SampledTrack& norm_f0,
                                  const SampledTrack& energy, std::span<const double> nuclei,
                                  std::span<const std::pair<double, double>> phrases, const AccentConfig& cfg) {
  struct Candidate {
    double time;
    bool is_nucleus;
    int init;
  };
  std::vector<Candidate> cands;
  std::vector<std::vector<double>> rows;

  auto energy_at = [&](double t) {
    const auto [a, b] = energy.index_range(t - 0.5 * cfg.energy_window, t + 0.5 * cfg.energy_window);
    double peak = 0.0;
    for (std::size_t i = a; i < b; ++i) peak = std::max(peak, energy.values[i]);
    return peak;
  };
  auto clip_for = [&](double t) -> std::pair<double, double> {
    for (const auto& ph : phrases)
      if (t >= ph.first && t <= ph.second) return ph;
    return {norm_f0.t0, norm_f0.end_time()};
  };

  for (const auto& w : words) {
    std::vector<double> inside;
    for (double n : nuclei)
      if (n >= w.start && n <= w.end) inside.push_back(n);
    double pos;
    bool is_nucleus = !inside.empty();
    if (is_nucleus) {
      if (w.stress_nucleus) {
        pos = *std::min_element(inside.begin(), inside.end(), [&](double a, double b) {
          return std::fabs(a - *w.stress_nucleus) < std::fabs(b - *w.stress_nucleus);
        });
      } else {
        pos = *std::max_element(inside.begin(), inside.end(),
                                [&](double a, double b) { return energy_at(a) < energy_at(b); });
      }
    } else {
      pos = w.stress_nucleus.value_or(0.5 * (w.start + w.end));
    }
    const auto clip = clip_for(pos);
    AccentPoly poly;
    try {
      poly = fit_accent_poly(norm_f0, pos, clip.first, clip.second, cfg.window);
    } catch (const Error&) {
      continue;
    }
    const double dur = w.end - w.start;
    const int init = dur > cfg.long_word ? 1 : (dur < cfg.short_word ? 0 : -1);
    cands.push_back({pos, is_nucleus, init});
    rows.push_back({poly[0], poly[1], poly[2], poly[3], 20.0 * std::log10(std::max(energy_at(pos), 1e-9))});
  }

  std::vector<int> init(cands.size());
  std::transform(cands.begin(), cands.end(), init.begin(), [](const Candidate& c) { return c.init; });
  AccentResult result;
  result.model = bootstrap_centroids(rows, init, {"c0", "c1", "c2", "c3", "energy.db"});
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands[i].is_nucleus) continue;
    const bool accented = cands[i].init == 1 || (cands[i].init == -1 && result.model.margin(rows[i]) > 0.0);
    if (accented) result.accents.push_back(cands[i].time);
  }
  std::sort(result.accents.begin(), result.accents.end());
  result.accents.erase(std::unique(result.accents.begin(), result.accents.end()), result.accents.end());
  return result;
}

}  // namespace prosody
