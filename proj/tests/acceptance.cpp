// Acceptance run: one PASS/FAIL line per criterion, process exit status 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prosody/dialacts.hpp"
#include "prosody/entrain.hpp"
#include "prosody/error.hpp"
#include "prosody/features.hpp"
#include "prosody/io.hpp"
#include "prosody/pipeline.hpp"
#include "prosody/signal.hpp"
#include "prosody/stats.hpp"
#include "prosody/stylize.hpp"
#include "prosody/synth.hpp"

namespace fs = std::filesystem;
using namespace prosody;

namespace {

struct WelchCase {
  std::vector<double> a, b;
  double t, df, p;
};

const std::vector<WelchCase> kWelchCases = {
#include "data/welch_oracle.inc"
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(secs < limit_s, "runtime " + fmt(secs, 3) + " s < " + fmt(limit_s) + " s");
  std::printf("criterion %d %s: %s - %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

AudioBuffer tone(double hz, double secs, double rate = 16000.0) {
  AudioBuffer a;
  a.sample_rate = rate;
  a.samples.resize(static_cast<std::size_t>(secs * rate));
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    a.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  return a;
}

// ---------------------------------------------------------------- 1

Outcome signal_chain() {
  Outcome o;
  std::vector<double> impulse(11, 0.0);
  impulse[5] = 1.0;
  const auto sm = savgol_smooth(SampledTrack::from_values(impulse));
  const double coef[5] = {-3, 12, 17, 12, -3};
  double err = 0.0;
  for (int k = 0; k < 5; ++k) err = std::max(err, std::fabs(sm.values[3 + k] - coef[4 - k] / 35.0));
  o.check(err <= 1e-12, "SG coefficient error " + fmt(err));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double cubic_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    std::vector<double> v(60);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = static_cast<double>(i) / 30.0 - 1.0;
      v[i] = a + x * (b + x * (c + x * d));
    }
    const auto s = savgol_smooth(SampledTrack::from_values(v));
    for (std::size_t i = 0; i < v.size(); ++i) cubic_err = std::max(cubic_err, std::fabs(s.values[i] - v[i]));
  }
  o.check(cubic_err <= 1e-9, "cubic preservation error " + fmt(cubic_err));

  std::vector<double> hz(100, 100.0);
  hz[50] = 200.0;
  const auto [st, base] = semitone_transform(SampledTrack::from_values(hz));
  o.check(base.base_hz == 100.0 && st.values[50] == 12.0, "200 Hz over base 100 Hz = " + fmt(st.values[50], 17) + " st");

  double worst = 0.0;
  for (double f : {75.0, 100.0, 150.0, 200.0, 250.0, 300.0, 400.0}) {
    const auto track = extract_f0_autocorr(tone(f, 1.0), 75.0, 500.0);
    std::vector<double> voiced;
    for (std::size_t i = 0; i < track.size(); ++i)
      if (track.valid[i]) voiced.push_back(track.values[i]);
    const double rel = voiced.empty() ? 1.0 : std::fabs(median(voiced) - f) / f;
    worst = std::max(worst, rel);
  }
  o.check(worst < 0.01, "worst pure-tone f0 error " + fmt(100 * worst) + "%");
  return o;
}

// ---------------------------------------------------------------- 2

// Period-5 texture: every 5-sample run holds each of the levels 0, .25, .5,
// .75, 1 between the base and top lines exactly once. With n - 4 a multiple of
// 5 the top/base sample offsets of the sliding sub-windows cancel in the range
// regression.
SampledTrack register_family(const Line& base, const Line& top, std::size_t n) {
  static const double q[5] = {0.0, 0.75, 0.25, 1.0, 0.5};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(n - 1);
    const double b = base.at(tau);
    v[i] = b + (top.at(tau) - b) * q[i % 5];
  }
  return SampledTrack::from_values(v);
}

Outcome stylization_recovery() {
  Outcome o;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double icpt = 0.0, slope = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Line base{2.0 + u(rng), 2.0 * u(rng)};
    // top above base everywhere: span between 2 and 8 st at both ends
    const double s0 = 5.0 + 3.0 * u(rng), s1 = 5.0 + 3.0 * u(rng);
    const Line top{base.c0 + s0, base.c1 + (s1 - s0)};
    const std::size_t n = 84 + 5 * static_cast<std::size_t>(trial % 24);
    const auto tr = register_family(base, top, n);
    const auto reg = fit_register(tr, tr.t0, tr.end_time());
    const Line range{s0, s1 - s0};
    const Line mid{0.5 * (base.c0 + top.c0), 0.5 * (base.c1 + top.c1)};
    for (const auto& [got, want] : {std::pair{reg.base, base}, {reg.top, top}, {reg.mid, mid}, {reg.range, range}}) {
      icpt = std::max(icpt, std::fabs(got.c0 - want.c0));
      slope = std::max(slope, std::fabs(got.c1 - want.c1));
    }
  }
  o.check(icpt <= 1e-3, "register intercept error " + fmt(icpt));
  o.check(slope <= 1e-2, "register slope error " + fmt(slope));

  double poly_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const AccentPoly p{u(rng), u(rng), u(rng), u(rng)};
    std::vector<double> v(61);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double tau = (static_cast<double>(i) - 30.0) / 15.0;
      v[i] = p[0] + tau * (p[1] + tau * (p[2] + tau * p[3]));
    }
    const auto flat = fit_accent_poly(SampledTrack::from_values(v), 0.3, 0.0, 0.6);
    for (int k = 0; k < 4; ++k) poly_err = std::max(poly_err, std::fabs(flat[k] - p[k]));
  }
  o.check(poly_err <= 1e-6, "noiseless accent coefficient error " + fmt(poly_err));

  // noisy accents: f0 = base + span * poly in semitones, noise sd 0.3 st,
  // normalized with the generating register
  std::normal_distribution<double> noise(0.0, 0.3);
  int within = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const AccentPoly p{0.5 + 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
    const double b = 3.0 * u(rng), span = 6.0;
    std::vector<double> v(31);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double tau = (static_cast<double>(i) - 15.0) / 15.0;
      const double f0 = b + span * (p[0] + tau * (p[1] + tau * (p[2] + tau * p[3]))) + noise(rng);
      v[i] = (f0 - b) / span;
    }
    const auto got = fit_accent_poly(SampledTrack::from_values(v), 0.15, 0.0, 0.3);
    bool ok = true;
    for (int k = 0; k < 4; ++k) ok = ok && std::fabs(got[k] - p[k]) <= 0.1;
    within += ok;
  }
  o.check(within >= 950, "noisy accents within 0.1: " + std::to_string(within) + "/1000");
  return o;
}

// ---------------------------------------------------------------- 3

// Contours sit on the energy frame grid, frame k centred at (k + 0.5) * hop.
Outcome rhythm_weight() {
  Outcome o;
  auto cosine = [](double f, double offset) {
    std::vector<double> v(200);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::cos(2.0 * std::numbers::pi * f * (static_cast<double>(i) + offset) / 100.0);
    return v;
  };
  double in_min = 1.0, off_max = 0.0, inv = 0.0, origin_min = 1.0;
  for (double r : {3.0, 4.0, 5.0, 6.0}) {
    auto energy = SampledTrack::from_values(cosine(r, 0.5), 100.0, 0.005);
    for (auto& x : energy.values) x += 2.0;
    std::vector<double> nuclei;
    for (int k = 0; k < static_cast<int>(2 * r); ++k) nuclei.push_back((k + 0.5) / r);
    const auto fv = rhy_features(energy, energy, nuclei, 0.0, 2.0);
    const double w = fv.entries.at("syl.prop.en");
    in_min = std::min(in_min, w);
    off_max = std::max(off_max, dct_weight(energy.values, 100.0, r + 4.0));
    std::vector<double> g(energy.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 3.7 * energy.values[i] + 12.5;
    inv = std::max(inv, std::fabs(dct_weight(g, 100.0, r) - w));
    origin_min = std::min(origin_min, dct_weight(cosine(r, 0.0), 100.0, r));
  }
  o.check(in_min >= 0.95, "in-band syl.prop.en min " + fmt(in_min));
  o.check(off_max <= 0.05, "off-band w max " + fmt(off_max));
  o.check(inv <= 1e-9, "gain/offset change " + fmt(inv));
  o.detail += "; (cosine phased at frame starts instead: w min " + fmt(origin_min) + ")";
  return o;
}

// ---------------------------------------------------------------- 4

Outcome grouping_golden() {
  Outcome o;
  // label, authority high, support yes
  const std::map<std::string, std::pair<bool, bool>> table{
      {"AC", {false, true}}, {"AL", {false, true}}, {"CH", {false, false}}, {"CL", {true, true}},
      {"EX", {true, true}},  {"IN", {true, false}}, {"QW", {false, false}}, {"QY", {false, false}},
      {"RE", {false, false}}, {"RN", {true, true}}, {"RW", {true, true}},  {"RY", {true, true}}};
  int match = 0;
  for (const auto& [name, row] : table) {
    const auto t = label_traits(parse_label(name));
    match += t.high_authority == row.first && t.supportive == row.second;
  }
  o.check(match == 12, "label table rows matching " + std::to_string(match) + "/12");

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::map<DaLabel, double> probs;
    double total = 0.0;
    std::vector<double> raw(12);
    for (auto& r : raw) {
      r = trial % 4 == 0 ? std::floor(u(rng) * 4.0) : u(rng);  // ties in a quarter of the trials
      total += r;
    }
    for (std::size_t i = 0; i < 12; ++i) probs[kAllLabels[i]] = total > 0 ? raw[i] / total : 0.0;
    // brute force: a label is high when more than half of the 12 values are
    // strictly smaller than it, or it exceeds the average of the two middle values
    std::vector<double> sorted;
    for (const auto& [l, p] : probs) sorted.push_back(p);
    std::sort(sorted.begin(), sorted.end());
    const double med = 0.5 * (sorted[5] + sorted[6]);
    std::set<DaLabel> expect;
    for (const auto& [l, p] : probs)
      if (p > med) expect.insert(l);
    const auto got = high_frequency_labels(probs);
    agree += std::set<DaLabel>(got.begin(), got.end()) == expect;
  }
  o.check(agree == 100, "median split agreement " + std::to_string(agree) + "/100");
  return o;
}

// ---------------------------------------------------------------- 5 / 6 helpers

const std::vector<DaLabel> kCoupled{DaLabel::EX, DaLabel::IN, DaLabel::QY, DaLabel::RY};

bool coupled(DaLabel l) { return std::find(kCoupled.begin(), kCoupled.end(), l) != kCoupled.end(); }

struct SignCounts {
  std::size_t affected = 0, affected_hit = 0, other = 0, other_sig = 0;
};

void tally(const std::vector<SignCell>& cells, Sign want, SignCounts& c) {
  for (const auto& cell : cells) {
    if (coupled(cell.label)) {
      ++c.affected;
      c.affected_hit += cell.sign == want;
    } else {
      ++c.other;
      c.other_sig += cell.sign != Sign::zero;
    }
  }
}

std::vector<SignCell> one_draw_cells(const FeatureTable& table, std::uint64_t seed, PipelineConfig cfg) {
  cfg.n_resamples = 1;
  cfg.seed = seed;
  const auto ent = run_entrainment(table, cfg);
  return sign_table(ent.records, {cfg.alpha, false});
}

SynthScenario feature_scenario(std::uint64_t seed, double rho) {
  SynthScenario sc;
  sc.n_dialogs = 10;
  sc.n_segments_per_dialog = 200;
  sc.seed = seed;
  if (rho != 0.0)
    for (auto l : kCoupled) sc.coupling[l] = rho;
  return sc;
}

Outcome entrainment_power() {
  Outcome o;
  const PipelineConfig cfg;
  SignCounts plus, minus;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pos = generate_corpus(feature_scenario(seed, 0.9));
    tally(one_draw_cells(*pos.features, seed, cfg), Sign::plus, plus);
    const auto neg = generate_corpus(feature_scenario(100 + seed, -0.9));
    tally(one_draw_cells(*neg.features, seed, cfg), Sign::minus, minus);
  }
  const double rp = static_cast<double>(plus.affected_hit) / static_cast<double>(plus.affected);
  const double rm = static_cast<double>(minus.affected_hit) / static_cast<double>(minus.affected);
  o.check(rp >= 0.9, "rho=+0.9 cells '+' " + fmt(rp) + " of " + std::to_string(plus.affected));
  o.check(rm >= 0.9, "rho=-0.9 cells '-' " + fmt(rm) + " of " + std::to_string(minus.affected));

  std::size_t cells = 0, sig = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto null = generate_corpus(feature_scenario(1000 + seed, 0.0));
    for (const auto& c : one_draw_cells(*null.features, seed, cfg)) {
      ++cells;
      sig += c.sign != Sign::zero;
    }
  }
  const double rate = static_cast<double>(sig) / static_cast<double>(cells);
  o.check(rate >= 0.03 && rate <= 0.07,
          "null significant rate " + fmt(rate) + " over " + std::to_string(cells) + " cells of 200 corpora");
  return o;
}

double f1(const std::vector<double>& truth, const std::vector<double>& found, double tol) {
  if (truth.empty() && found.empty()) return 1.0;
  std::vector<bool> used(truth.size(), false);
  std::size_t tp = 0;
  for (double f : found) {
    std::size_t best = truth.size();
    double bd = tol;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (!used[i] && std::fabs(truth[i] - f) <= bd) {
        bd = std::fabs(truth[i] - f);
        best = i;
      }
    if (best < truth.size()) {
      used[best] = true;
      ++tp;
    }
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(truth.size() + found.size());
}

SynthScenario contour_scenario(std::uint64_t seed, double rho, double poly_sd) {
  SynthScenario sc;
  sc.mode = SynthMode::contour;
  sc.n_dialogs = 8;
  sc.n_segments_per_dialog = 80;
  sc.seed = seed;
  sc.accent_poly_sd = poly_sd;
  for (auto l : {DaLabel::EX, DaLabel::IN, DaLabel::QY, DaLabel::RY, DaLabel::AC, DaLabel::CH})
    sc.da_distribution[l] = 1.0 / 6.0;
  if (rho != 0.0)
    for (auto l : kCoupled) sc.coupling[l] = rho;
  return sc;
}

struct ContourRun {
  double boundary_f1 = 0.0, accent_f1 = 0.0;
  double poly_err_p95 = 0.0;
  std::vector<SignSummary> signs;
  std::vector<ProportionRow> proportions;
};

ContourRun run_contour(const SynthScenario& sc, const fs::path& dir) {
  const auto corpus = generate_corpus(sc);
  fs::remove_all(dir);
  write_corpus(dir, corpus);
  PipelineConfig cfg;
  cfg.n_perm = 200;
  auto files = load_corpus(dir);
  const auto channels = analyze_corpus(files, cfg);
  ContourRun r;
  std::vector<double> bf, af;
  std::vector<double> poly_errs;
  for (const auto& truth : corpus.channels) {
    const auto it = std::find_if(channels.begin(), channels.end(), [&](const ChannelAnalysis& c) {
      return c.dialog_id == truth.dialog_id && c.speaker_id == truth.speaker_id;
    });
    if (it == channels.end()) continue;
    bf.push_back(f1(truth.boundaries, it->structure.phrase_boundaries, 0.01));
    af.push_back(f1(truth.accents, it->structure.accents, 0.04));
    for (std::size_t k = 0; k < truth.accents.size(); ++k) {
      const auto ac = std::find_if(it->prosody.accents.begin(), it->prosody.accents.end(), [&](const AccentShape& a) {
        return std::fabs(a.nucleus_time - truth.accents[k]) <= 0.04;
      });
      if (ac == it->prosody.accents.end()) continue;
      double e = 0.0;
      for (int i = 0; i < 4; ++i) e = std::max(e, std::fabs(ac->poly[i] - truth.accent_polys[k][i]));
      poly_errs.push_back(e);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  r.boundary_f1 = mean(bf);
  r.accent_f1 = mean(af);
  if (!poly_errs.empty()) {
    std::sort(poly_errs.begin(), poly_errs.end());
    r.poly_err_p95 = poly_errs[static_cast<std::size_t>(0.95 * static_cast<double>(poly_errs.size() - 1))];
  }
  const auto table = build_feature_table(files.segments, channels, cfg);
  const auto ent = run_entrainment(table, cfg);
  const auto stats = run_stats(ent.records, table.segments, cfg);
  r.signs = stats.signs;
  r.proportions = stats.proportions;
  return r;
}

std::vector<ProportionRow> emitted_rows;

Outcome contour_end_to_end(const fs::path& scratch) {
  Outcome o;
  const auto fixed = run_contour(contour_scenario(3, 0.0, 0.0), scratch / "fixed");
  o.check(fixed.boundary_f1 >= 0.8, "boundary F1 " + fmt(fixed.boundary_f1));
  o.check(fixed.accent_f1 >= 0.8, "accent F1 " + fmt(fixed.accent_f1));
  o.detail += "; planted accent shape error p95 " + fmt(fixed.poly_err_p95);

  constexpr int kSeeds = 6;
  for (const double rho : {0.9, -0.9}) {
    std::size_t affected = 0, hit = 0;
    for (int k = 1; k <= kSeeds; ++k) {
      const std::uint64_t seed = (rho > 0 ? 10 : 20) + k;
      auto sc = contour_scenario(seed, rho, 0.08);
      sc.n_dialogs = 10;
      sc.n_segments_per_dialog = 200;
      const auto run = run_contour(sc, scratch / ("signs_" + std::to_string(seed)));
      for (const auto& s : run.signs)
        if (coupled(s.cell.label)) {
          ++affected;
          hit += s.cell.sign == (rho > 0 ? Sign::plus : Sign::minus);
        }
      emitted_rows.insert(emitted_rows.end(), run.proportions.begin(), run.proportions.end());
    }
    const double rate = affected ? static_cast<double>(hit) / static_cast<double>(affected) : 0.0;
    o.check(rate >= 0.8, std::string(rho > 0 ? "entrainment" : "disentrainment") + " cells " + fmt(rate) + " of " +
                             std::to_string(affected) + " over " + std::to_string(kSeeds) + " corpora");
  }
  return o;
}

// ---------------------------------------------------------------- 7

Outcome statistics() {
  Outcome o;
  double worst = 0.0;
  for (const auto& c : kWelchCases) {
    const auto r = welch_ttest(c.a, c.b);
    worst = std::max(worst, std::fabs(r.p - c.p));
  }
  o.check(kWelchCases.size() == 50 && worst <= 1e-6,
          "Welch p error " + fmt(worst) + " over " + std::to_string(kWelchCases.size()) + " oracle cases");

  std::mt19937_64 rng(71);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> ps;
  for (int sim = 0; sim < 500; ++sim) {
    std::vector<double> v;
    std::vector<int> lev, strata;
    for (int s = 0; s < 8; ++s)
      for (int i = 0; i < 12; ++i) {
        v.push_back(n01(rng) + 0.5 * s);
        lev.push_back((i + s) % 3 == 0 ? 1 : 0);
        strata.push_back(s);
      }
    ps.push_back(permutation_group_test(v, lev, strata, 999, derive_seed(71, std::to_string(sim))).p);
  }
  const double ks = ks_uniform_pvalue(ps);
  o.check(ks > 0.01, "permutation null KS p " + fmt(ks));
  return o;
}

// ---------------------------------------------------------------- 8 / 9

std::map<std::string, std::string> bundle(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const char* f : {"features.tsv", "entrain.jsonl", "signs.tsv", "proportions.tsv", "group_tests.tsv",
                        "run_manifest.json"})
    out[f] = io::read_text(dir / f);
  return out;
}

Outcome determinism(const fs::path& scratch) {
  Outcome o;
  PipelineConfig cfg;
  cfg.n_resamples = 3;
  cfg.n_perm = 500;
  auto sc = feature_scenario(8, 0.9);
  write_corpus(scratch / "det_features", generate_corpus(sc));
  auto csc = contour_scenario(9, 0.9, 0.08);
  csc.n_dialogs = 4;
  csc.n_segments_per_dialog = 30;
  write_corpus(scratch / "det_contour", generate_corpus(csc));
  for (const char* name : {"det_features", "det_contour"}) {
    run_pipeline(scratch / name, cfg, scratch / (std::string(name) + "_a"));
    // replay from the manifest written by the first run
    const auto replay = load_config(scratch / (std::string(name) + "_a") / "run_manifest.json");
    run_pipeline(scratch / name, replay, scratch / (std::string(name) + "_b"));
    const bool same = bundle(scratch / (std::string(name) + "_a")) == bundle(scratch / (std::string(name) + "_b"));
    o.check(same, std::string(name) + " bundles byte-identical");
    std::istringstream rows(io::read_text(scratch / (std::string(name) + "_a") / "proportions.tsv"));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
      std::istringstream f(line);
      std::string dim, level, cond, plus, minus;
      f >> dim >> level >> cond >> plus >> minus;
      ProportionRow r;
      r.dimension = dim;
      r.level = level;
      r.p_plus = io::parse_double(plus, "proportions.tsv", "p_plus");
      r.p_minus = io::parse_double(minus, "proportions.tsv", "p_minus");
      emitted_rows.push_back(r);
    }
  }
  return o;
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "prosody_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  report(1, "signal chain oracles", 5.0, signal_chain);
  report(2, "stylization recovery", 30.0, stylization_recovery);
  report(3, "rhythm weight", 5.0, rhythm_weight);
  report(4, "grouping golden", 5.0, grouping_golden);
  report(5, "entrainment power and calibration", 300.0, entrainment_power);
  report(6, "contour end to end", 900.0, [&] { return contour_end_to_end(scratch); });
  report(7, "statistics", 60.0, statistics);
  report(8, "determinism", 120.0, [&] { return determinism(scratch); });
  report(9, "proportion arithmetic", 5.0, [] {
    Outcome o;
    std::size_t bad = 0;
    for (const auto& r : emitted_rows) bad += !(r.p_plus + r.p_minus <= 1.0 + 1e-12);
    o.check(!emitted_rows.empty() && bad == 0,
            std::to_string(emitted_rows.size() - bad) + "/" + std::to_string(emitted_rows.size()) +
                " rows with p_plus + p_minus <= 1");
    return o;
  });
  fs::remove_all(scratch);
  return failures == 0 ? 0 : 1;
}

