#include "prosody/stylize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "prosody/error.hpp"

namespace prosody {
namespace {

struct Point {
  double time;
  double value;
};

// Median of the selected samples, located at the median sample's time (mean of
// the two middle times for even counts).
Point median_point(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.value < b.value || (a.value == b.value && a.time < b.time);
  });
  const std::size_t n = pts.size();
  if (n % 2 == 1) return pts[n / 2];
  const Point& a = pts[n / 2 - 1];
  const Point& b = pts[n / 2];
  return {0.5 * (a.time + b.time), 0.5 * (a.value + b.value)};
}

struct WindowPoints {
  Point base, mid, top;
};

WindowPoints window_points(const std::vector<Point>& pts, const RegisterConfig& cfg) {
  WindowPoints w;
  w.mid = median_point(pts);
  if (pts.size() < 10) {
    auto lo = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.value < b.value; });
    auto hi = std::max_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.value < b.value; });
    w.base = *lo;
    w.top = *hi;
    return w;
  }
  std::vector<double> vals(pts.size());
  std::transform(pts.begin(), pts.end(), vals.begin(), [](const Point& p) { return p.value; });
  const double qlo = percentile(vals, cfg.low_percentile);
  const double qhi = percentile(vals, cfg.high_percentile);
  std::vector<Point> low, high;
  for (const auto& p : pts) {
    if (p.value < qlo) low.push_back(p);
    if (p.value > qhi) high.push_back(p);
  }
  if (low.empty())
    for (const auto& p : pts)
      if (p.value <= qlo) low.push_back(p);
  if (high.empty())
    for (const auto& p : pts)
      if (p.value >= qhi) high.push_back(p);
  w.base = median_point(low);
  w.top = median_point(high);
  return w;
}

}  // namespace

Line fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw Error("fit_line needs equal, non-empty inputs");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-300) return {my, 0.0};
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

RegisterStylization fit_register(const SampledTrack& f0, double start, double end, const RegisterConfig& cfg) {
  f0.check();
  const auto [first, last] = f0.index_range(start, end);
  if (last <= first) throw Error("register window holds no samples");
  RegisterStylization reg;
  reg.start = f0.time(first);
  reg.end = f0.time(last - 1);

  std::vector<Point> all;
  for (std::size_t i = first; i < last; ++i) all.push_back({reg.norm_time(f0.time(i)), f0.values[i]});

  const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.window * f0.sample_rate)));
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.step * f0.sample_rate)));
  if (all.size() < len) {
    const auto w = window_points(all, cfg);
    reg.base = {w.base.value, 0.0};
    reg.mid = {w.mid.value, 0.0};
    reg.top = {w.top.value, 0.0};
    reg.range = {w.top.value - w.base.value, 0.0};
    return reg;
  }

  std::vector<double> bt, bv, mt, mv, tt, tv, rt, rv;
  std::vector<Point> sub(len);
  for (std::size_t k = 0; k + len <= all.size(); k += step) {
    std::copy(all.begin() + static_cast<std::ptrdiff_t>(k), all.begin() + static_cast<std::ptrdiff_t>(k + len),
              sub.begin());
    const auto w = window_points(sub, cfg);
    bt.push_back(w.base.time);
    bv.push_back(w.base.value);
    mt.push_back(w.mid.time);
    mv.push_back(w.mid.value);
    tt.push_back(w.top.time);
    tv.push_back(w.top.value);
    rt.push_back(0.5 * (w.base.time + w.top.time));
    rv.push_back(w.top.value - w.base.value);
  }
  reg.base = fit_line(bt, bv);
  reg.mid = fit_line(mt, mv);
  reg.top = fit_line(tt, tv);
  reg.range = fit_line(rt, rv);
  return reg;
}

SampledTrack range_normalize(const SampledTrack& f0, const RegisterStylization& reg, double min_span) {
  f0.check();
  SampledTrack out = f0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = reg.norm_time(f0.time(i));
    const double base = reg.base.at(t);
    const double span = std::max(reg.top.at(t) - base, min_span);
    out.values[i] = (f0.values[i] - base) / span;
  }
  return out;
}

AccentPoly fit_accent_poly(const SampledTrack& norm_f0, double nucleus, double clip_lo, double clip_hi,
                           double window) {
  norm_f0.check();
  const double lo = std::max(nucleus - 0.5 * window, clip_lo);
  const double hi = std::min(nucleus + 0.5 * window, clip_hi);
  const auto [first, last] = norm_f0.index_range(lo, hi);
  if (hi <= lo || last < first + 4) throw Error("accent window underpopulated");
  const auto n = static_cast<Eigen::Index>(last - first);
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = first + static_cast<std::size_t>(r);
    const double tau = 2.0 * (norm_f0.time(i) - lo) / (hi - lo) - 1.0;
    design(r, 0) = 1.0;
    design(r, 1) = tau;
    design(r, 2) = tau * tau;
    design(r, 3) = tau * tau * tau;
    rhs(r) = norm_f0.values[i];
  }
  const Eigen::Vector4d coef = design.colPivHouseholderQr().solve(rhs);
  return {coef(0), coef(1), coef(2), coef(3)};
}

GestaltDeviation gestalt_deviation(const RegisterStylization& local, const RegisterStylization& phrase,
                                   std::span<const double> times) {
  if (times.empty()) return {};
  double lev = 0.0, rng = 0.0;
  for (double t : times) {
    const double tl = local.norm_time(t);
    const double tp = phrase.norm_time(t);
    const double dl = local.mid.at(tl) - phrase.mid.at(tp);
    const double dr = local.range.at(tl) - phrase.range.at(tp);
    lev += dl * dl;
    rng += dr * dr;
  }
  const auto n = static_cast<double>(times.size());
  return {std::sqrt(lev / n), std::sqrt(rng / n)};
}

GestaltDeviation gestalt_deviation(const RegisterStylization& local, const RegisterStylization& phrase,
                                   const SampledTrack& grid, double start, double end) {
  const auto [first, last] = grid.index_range(start, end);
  std::vector<double> times;
  for (std::size_t i = first; i < last; ++i) times.push_back(grid.time(i));
  return gestalt_deviation(local, phrase, times);
}

AccentShape stylize_accent(const SampledTrack& f0_st, const SampledTrack& norm_f0,
                           const RegisterStylization& phrase, double nucleus, double clip_lo, double clip_hi,
                           double window, const RegisterConfig& reg_cfg) {
  AccentShape a;
  a.nucleus_time = nucleus;
  a.poly = fit_accent_poly(norm_f0, nucleus, clip_lo, clip_hi, window);
  const double lo = std::max(nucleus - 0.5 * window, clip_lo);
  const double hi = std::min(nucleus + 0.5 * window, clip_hi);
  a.local_register = fit_register(f0_st, lo, hi, reg_cfg);
  const auto g = gestalt_deviation(a.local_register, phrase, f0_st, lo, hi);
  a.gst_lev = g.lev_rmsd;
  a.gst_rng = g.rng_rmsd;
  return a;
}

}  // namespace prosody
