#include "prosody/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prosody/error.hpp"
#include "prosody/kernels/kernels.hpp"

namespace prosody {

std::string_view to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::GEN: return "GEN";
    case FeatureSet::GF0: return "GF0";
    case FeatureSet::IP: return "IP";
    case FeatureSet::ACC: return "ACC";
    case FeatureSet::RHY: return "RHY";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view s) {
  for (auto set : kAllFeatureSets)
    if (to_string(set) == s) return set;
  throw Error("unknown feature set '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> first_last(std::initializer_list<const char*> stems) {
  std::vector<std::string> out;
  for (const char* suffix : {".F", ".L"})
    for (const char* s : stems) out.push_back(std::string(s) + suffix);
  return out;
}

}  // namespace

const std::vector<std::string>& feature_names(FeatureSet s) {
  static const std::vector<std::string> gen{"max", "med", "sd"};
  static const std::vector<std::string> ip = first_last({"rng.c0", "rng.c1", "lev.c0", "lev.c1"});
  static const std::vector<std::string> acc =
      first_last({"c0", "c1", "c2", "c3", "rng.c0", "rng.c1", "lev.c0", "lev.c1", "gst.lev", "gst.rng"});
  static const std::vector<std::string> rhy{"syl.rate", "syl.prop.en", "syl.prop.f0"};
  switch (s) {
    case FeatureSet::GEN:
    case FeatureSet::GF0: return gen;
    case FeatureSet::IP: return ip;
    case FeatureSet::ACC: return acc;
    case FeatureSet::RHY: return rhy;
  }
  return gen;
}

std::string qualified_name(FeatureSet s, std::string_view name) {
  return std::string(to_string(s)) + "." + std::string(name);
}

const std::vector<std::string>& all_feature_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> out;
    for (auto s : kAllFeatureSets)
      for (const auto& n : feature_names(s)) out.push_back(qualified_name(s, n));
    return out;
  }();
  return cols;
}

FeatureSet set_of_column(std::string_view column) {
  const auto dot = column.find('.');
  if (dot == std::string_view::npos) throw Error("unknown feature column '" + std::string(column) + "'");
  const auto set = parse_feature_set(column.substr(0, dot));
  const auto& names = feature_names(set);
  if (std::find(names.begin(), names.end(), column.substr(dot + 1)) == names.end())
    throw Error("unknown feature column '" + std::string(column) + "'");
  return set;
}

TrackStats track_stats(const SampledTrack& track, double start, double end) {
  const auto [a, b] = track.index_range(start, end);
  std::vector<double> v;
  for (std::size_t i = a; i < b; ++i)
    if (track.valid[i]) v.push_back(track.values[i]);
  if (v.empty()) throw Error("empty segment");
  TrackStats s;
  s.max = *std::max_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  s.sd = std::sqrt(ss / static_cast<double>(v.size()));
  s.med = median(std::move(v));
  return s;
}

FeatureVector ip_features(const DialogActContext& ctx) {
  FeatureVector fv{FeatureSet::IP, {}};
  if (ctx.phrases.empty()) return fv;
  auto put = [&](const RegisterStylization& r, const std::string& sfx) {
    fv.entries["rng.c0" + sfx] = r.range.c0;
    fv.entries["rng.c1" + sfx] = r.range.c1;
    fv.entries["lev.c0" + sfx] = r.mid.c0;
    fv.entries["lev.c1" + sfx] = r.mid.c1;
  };
  put(ctx.phrases.front().reg, ".F");
  put(ctx.phrases.back().reg, ".L");
  return fv;
}

FeatureVector acc_features(const DialogActContext& ctx) {
  FeatureVector fv{FeatureSet::ACC, {}};
  if (ctx.accents.empty()) return fv;
  auto put = [&](const AccentShape& a, const std::string& sfx) {
    for (int i = 0; i < 4; ++i) fv.entries["c" + std::to_string(i) + sfx] = a.poly[i];
    fv.entries["rng.c0" + sfx] = a.local_register.range.c0;
    fv.entries["rng.c1" + sfx] = a.local_register.range.c1;
    fv.entries["lev.c0" + sfx] = a.local_register.mid.c0;
    fv.entries["lev.c1" + sfx] = a.local_register.mid.c1;
    fv.entries["gst.lev" + sfx] = a.gst_lev;
    fv.entries["gst.rng" + sfx] = a.gst_rng;
  };
  put(ctx.accents.front(), ".F");
  put(ctx.accents.back(), ".L");
  return fv;
}

double dct_weight(std::span<const double> contour, double sample_rate, double rate, const DctConfig& cfg) {
  const std::size_t n = contour.size();
  const double dt = 1.0 / sample_rate;
  if (n < 2 || static_cast<double>(n) * dt < cfg.min_duration - 1e-9) throw Error("contour too short for DCT");
  const double df = 1.0 / (2.0 * static_cast<double>(n) * dt);
  const auto k_max = std::min(n - 1, static_cast<std::size_t>(std::floor(cfg.cutoff / df + 1e-9)));
  std::vector<double> basis(n);
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  double num = 0.0, den = 0.0;
  for (std::size_t k = cfg.include_dc ? 0 : 1; k <= k_max; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      basis[i] = std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(i) + 0.5) /
                          static_cast<double>(n));
    const double c = std::fabs(kernels::dot(contour, basis)) * (k == 0 ? std::sqrt(1.0 / n) : scale);
    den += c;
    if (std::fabs(static_cast<double>(k) * df - rate) <= cfg.half_band + 1e-9) num += c;
  }
  // relative floor keeps rounding residue of flat contours from counting as modulation
  double mag = 0.0;
  for (double x : contour) mag = std::max(mag, std::fabs(x));
  if (den <= 1e-12 * std::max(1.0, mag) * static_cast<double>(n)) return 0.0;
  return num / den;
}

FeatureVector rhy_features(const SampledTrack& f0, const SampledTrack& energy, std::span<const double> nuclei,
                           double start, double end, const DctConfig& cfg) {
  if (!(end > start)) throw Error("segment duration must be positive");
  FeatureVector fv{FeatureSet::RHY, {}};
  const auto count = std::count_if(nuclei.begin(), nuclei.end(), [&](double t) { return t >= start && t <= end; });
  const double rate = static_cast<double>(count) / (end - start);
  fv.entries["syl.rate"] = rate;
  auto weight = [&](const SampledTrack& tr, const char* name) {
    const auto [a, b] = tr.index_range(start, end);
    if (b <= a) return;
    const std::span<const double> v(tr.values.data() + a, b - a);
    if (static_cast<double>(v.size()) / tr.sample_rate < cfg.min_duration - 1e-9) return;
    fv.entries[name] = dct_weight(v, tr.sample_rate, rate, cfg);
  };
  weight(energy, "syl.prop.en");
  weight(f0, "syl.prop.f0");
  return fv;
}

ChannelProsody stylize_channel(SampledTrack f0_st, SampledTrack energy, std::vector<double> nuclei,
                               std::span<const double> boundaries, std::span<const double> accents,
                               std::span<const double> word_starts, const StylizeConfig& cfg) {
  f0_st.check();
  if (f0_st.size() == 0) throw Error("empty f0 track");
  ChannelProsody ch;
  ch.f0_st = std::move(f0_st);
  ch.energy = std::move(energy);
  ch.nuclei = std::move(nuclei);
  const double t_begin = ch.f0_st.t0;
  const double t_end = ch.f0_st.end_time();

  std::vector<double> edges{t_begin};
  for (double b : boundaries)
    if (b > edges.back() + 1e-9 && b < t_end - 1e-9) edges.push_back(b);
  edges.push_back(t_end);

  ch.norm_f0 = ch.f0_st;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    Phrase ph{edges[p], edges[p + 1], {}};
    if (!word_starts.empty()) {
      const auto it = std::lower_bound(word_starts.begin(), word_starts.end(), ph.start - 1e-9);
      if (it == word_starts.end() || *it >= ph.end) continue;
      ph.start = *it;
    }
    const auto [a, b] = ch.f0_st.index_range(ph.start, ph.end);
    if (b <= a) continue;
    ph.reg = fit_register(ch.f0_st, ph.start, ph.end, cfg.reg);
    // samples on a boundary belong to the phrase it closes
    const std::size_t first = p == 0 || ph.start > edges[p] ? a : (ch.f0_st.time(a) <= ph.start + 1e-9 ? a + 1 : a);
    for (std::size_t i = first; i < b; ++i) {
      const double tn = ph.reg.norm_time(ch.f0_st.time(i));
      const double base = ph.reg.base.at(tn);
      const double span = std::max(ph.reg.top.at(tn) - base, cfg.min_span);
      ch.norm_f0.values[i] = (ch.f0_st.values[i] - base) / span;
    }
    ch.phrases.push_back(ph);
  }

  for (double t : accents) {
    const auto it = std::find_if(ch.phrases.begin(), ch.phrases.end(),
                                 [&](const Phrase& ph) { return t >= ph.start && t <= ph.end; });
    if (it == ch.phrases.end()) continue;
    try {
      ch.accents.push_back(stylize_accent(ch.f0_st, ch.norm_f0, it->reg, t, it->start, it->end,
                                          cfg.accent_window, cfg.reg));
    } catch (const Error&) {
    }
  }
  return ch;
}

DialogActContext context_for(const ChannelProsody& ch, double start, double end) {
  DialogActContext ctx;
  ctx.start = start;
  ctx.end = end;
  for (const auto& ph : ch.phrases)
    if (ph.end > start && ph.start < end) ctx.phrases.push_back(ph);
  for (const auto& a : ch.accents)
    if (a.nucleus_time >= start && a.nucleus_time <= end) ctx.accents.push_back(a);
  return ctx;
}

FeatureMap segment_features(const ChannelProsody& ch, double start, double end, const DctConfig& dct) {
  FeatureMap out;
  auto merge = [&](const FeatureVector& fv) {
    for (const auto& [k, v] : fv.entries)
      if (std::isfinite(v)) out[qualified_name(fv.set, k)] = v;
  };
  auto stats = [&](const SampledTrack& tr, FeatureSet set) {
    try {
      const auto s = track_stats(tr, start, end);
      merge({set, {{"max", s.max}, {"med", s.med}, {"sd", s.sd}}});
    } catch (const Error&) {
    }
  };
  stats(ch.energy, FeatureSet::GEN);
  stats(ch.f0_st, FeatureSet::GF0);
  const auto ctx = context_for(ch, start, end);
  merge(ip_features(ctx));
  merge(acc_features(ctx));
  merge(rhy_features(ch.f0_st, ch.energy, ch.nuclei, start, end, dct));
  return out;
}

}  // namespace prosody
