#include "prosody/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "prosody/error.hpp"
#include "prosody/features.hpp"
#include "prosody/io.hpp"

namespace prosody {

using nlohmann::json;

void SynthScenario::validate() const {
  if (n_dialogs < 2) throw ConfigError("scenario field 'n_dialogs': need at least 2 dialogs");
  if (n_segments_per_dialog < 2) throw ConfigError("scenario field 'n_segments_per_dialog': need at least 2");
  if (!da_distribution.empty()) {
    double total = 0.0;
    for (const auto& [l, p] : da_distribution) {
      if (!(p >= 0.0)) throw ConfigError("scenario field 'da_distribution': negative probability");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-6) throw ConfigError("scenario field 'da_distribution': must sum to 1");
  }
  for (const auto& [l, r] : coupling)
    if (!(r >= -1.0 && r <= 1.0)) throw ConfigError("scenario field 'coupling': rho must lie in [-1, 1]");
  if (!(noise_sd > 0.0)) throw ConfigError("scenario field 'noise_sd': must be positive");
  if (!(speaker_sd >= 0.0)) throw ConfigError("scenario field 'speaker_sd': must be non-negative");
  if (!(audio_rate >= 8000.0)) throw ConfigError("scenario field 'audio_rate': must be at least 8000");
  if (calibration_rounds < 0) throw ConfigError("scenario field 'calibration_rounds': must be non-negative");
}

double SynthScenario::rho(DaLabel l) const {
  const auto it = coupling.find(l);
  return it == coupling.end() ? 0.0 : it->second;
}

std::string scenario_to_json(const SynthScenario& s) {
  json j;
  j["mode"] = s.mode == SynthMode::features ? "features" : "contour";
  j["n_dialogs"] = s.n_dialogs;
  j["n_segments_per_dialog"] = s.n_segments_per_dialog;
  json dist = json::object();
  for (const auto& [l, p] : s.da_distribution) dist[std::string(to_string(l))] = p;
  j["da_distribution"] = dist;
  json coup = json::object();
  for (const auto& [l, r] : s.coupling) coup[std::string(to_string(l))] = r;
  j["coupling"] = coup;
  j["noise_sd"] = s.noise_sd;
  j["speaker_sd"] = s.speaker_sd;
  j["seed"] = s.seed;
  j["condition"] = s.condition ? json(std::string(to_string(*s.condition))) : json("alternate");
  j["audio_rate"] = s.audio_rate;
  j["accent_poly"] = s.accent_poly;
  j["accent_poly_sd"] = s.accent_poly_sd;
  j["calibration_rounds"] = s.calibration_rounds;
  return j.dump(2);
}

SynthScenario scenario_from_json(const std::string& text) {
  SynthScenario s;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  std::string field;
  try {
    for (const auto& [key, v] : j.items()) {
      field = key;
      if (key == "mode") {
        const auto m = v.get<std::string>();
        if (m != "features" && m != "contour") throw ConfigError("unknown mode '" + m + "'");
        s.mode = m == "features" ? SynthMode::features : SynthMode::contour;
      } else if (key == "n_dialogs") {
        s.n_dialogs = v.get<int>();
      } else if (key == "n_segments_per_dialog") {
        s.n_segments_per_dialog = v.get<int>();
      } else if (key == "da_distribution") {
        for (const auto& [l, p] : v.items()) s.da_distribution[parse_label(l)] = p.get<double>();
      } else if (key == "coupling") {
        for (const auto& [l, r] : v.items()) s.coupling[parse_label(l)] = r.get<double>();
      } else if (key == "noise_sd") {
        s.noise_sd = v.get<double>();
      } else if (key == "speaker_sd") {
        s.speaker_sd = v.get<double>();
      } else if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
      } else if (key == "condition") {
        const auto c = v.get<std::string>();
        if (c == "alternate") s.condition.reset();
        else s.condition = parse_condition(c);
      } else if (key == "audio_rate") {
        s.audio_rate = v.get<double>();
      } else if (key == "accent_poly") {
        s.accent_poly = v.get<AccentPoly>();
      } else if (key == "accent_poly_sd") {
        s.accent_poly_sd = v.get<double>();
      } else if (key == "calibration_rounds") {
        s.calibration_rounds = v.get<int>();
      } else {
        throw ConfigError("unknown key");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("scenario field '" + field + "': " + e.what());
  } catch (const Error& e) {
    throw ConfigError("scenario field '" + field + "': " + e.what());
  }
  s.validate();
  return s;
}

std::string channel_stem(const std::string& dialog_id, const std::string& speaker_id) {
  return dialog_id + "_" + speaker_id;
}

namespace {

// Latent draws with the planted coupling: one shared value per
// (dialog, label, parameter), speaker sign +1 / -1 for disentrainment.
class LatentModel {
 public:
  LatentModel(const SynthScenario& sc, std::size_t n_params, std::mt19937_64& rng)
      : sc_(sc), n_(n_params), rng_(rng) {
    for (int s = 0; s < 2; ++s) {
      spk_[s].resize(n_);
      for (auto& m : spk_[s]) m = sc.speaker_sd * normal_(rng_);
    }
  }

  std::vector<double> draw(DaLabel label, int speaker) {
    const double rho = sc_.rho(label);
    auto& shared = shared_[label];
    if (shared.empty()) {
      shared.resize(n_);
      for (auto& z : shared) z = normal_(rng_);
    }
    std::vector<double> theta(n_);
    const double keep = std::sqrt(1.0 - rho * rho);
    const double sign = rho < 0.0 && speaker == 1 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double e = std::fabs(rho) * sign * shared[k] + keep * normal_(rng_);
      theta[k] = spk_[speaker][k] + sc_.noise_sd * e;
    }
    return theta;
  }

 private:
  const SynthScenario& sc_;
  std::size_t n_;
  std::mt19937_64& rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::array<std::vector<double>, 2> spk_;
  std::map<DaLabel, std::vector<double>> shared_;
};

struct DialogPlan {
  std::string id;
  Condition condition;
  std::array<std::string, 2> speakers;
};

std::vector<DialogPlan> plan_dialogs(const SynthScenario& sc) {
  std::vector<DialogPlan> out;
  for (int d = 0; d < sc.n_dialogs; ++d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "d%02d", d);
    DialogPlan p;
    p.id = buf;
    p.condition = sc.condition.value_or(d % 2 == 0 ? Condition::cooperative : Condition::competitive);
    p.speakers = {p.id + "A", p.id + "B"};
    out.push_back(p);
  }
  return out;
}

DaLabel draw_label(const SynthScenario& sc, std::mt19937_64& rng) {
  if (sc.da_distribution.empty()) {
    std::uniform_int_distribution<std::size_t> u(0, kAllLabels.size() - 1);
    return kAllLabels[u(rng)];
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  DaLabel last = sc.da_distribution.begin()->first;
  for (const auto& [l, p] : sc.da_distribution) {
    if (p <= 0.0) continue;
    acc += p;
    last = l;
    if (x < acc) return l;
  }
  return last;
}

SynthCorpus generate_features(const SynthScenario& sc) {
  SynthCorpus c;
  c.scenario = sc;
  FeatureTable table;
  table.columns = all_feature_columns();
  for (const auto& plan : plan_dialogs(sc)) {
    std::mt19937_64 rng(derive_seed(sc.seed, "dialog/" + plan.id));
    LatentModel latent(sc, table.columns.size(), rng);
    std::uniform_real_distribution<double> dur(1.0, 3.0), coin(0.0, 1.0);
    double t = 0.5;
    int speaker = 0;
    for (int i = 0; i < sc.n_segments_per_dialog; ++i) {
      if (i > 0 && coin(rng) < 0.8) speaker = 1 - speaker;
      DialogActSegment s;
      s.dialog_id = plan.id;
      s.speaker_id = plan.speakers[speaker];
      s.label = draw_label(sc, rng);
      s.condition = plan.condition;
      s.start = t;
      s.end = t + dur(rng);
      t = s.end + 0.3;
      table.values.push_back(latent.draw(s.label, speaker));
      table.segments.push_back(s);
    }
  }
  assign_dialog_indices(table.segments);
  c.segments = table.segments;
  c.features = std::move(table);
  return c;
}

// ------------------------------------------------------------------ contours

enum Param : std::size_t {
  kAmp,
  kLevel,
  kSpan,
  kDecl,
  kRangeSlope,
  kPoly0,
  kPoly1,
  kPoly2,
  kPoly3,
  kSylDur,
  kTexture,
  kParamCount
};

constexpr double kRefHz = 110.0;
constexpr double kTrackRate = 100.0;
constexpr double kAccentHalf = 0.15;
constexpr double kAccentMargin = 0.03;
constexpr double kShortSyllable = 0.09;

struct Syllable {
  double center;
  double dur;
  bool accented;
};

struct PlannedAccent {
  double time;
  AccentPoly poly;
};

struct PlannedPhrase {
  double start, end;
  double level, span, decl, range_slope, texture;
  std::vector<Syllable> syllables;
  std::vector<PlannedAccent> accents;
};

struct ChannelPlan {
  std::vector<PlannedPhrase> phrases;
  std::vector<WordSegment> words;
  std::vector<double> amp;  // per syllable, parallel to the flattened syllable list
};

double poly_at(const AccentPoly& p, double tau) { return p[0] + tau * (p[1] + tau * (p[2] + tau * p[3])); }

// Normalized planted shape and the accent (if any) governing time t.
double planted_norm(const PlannedPhrase& ph, double t, const PlannedAccent** acc) {
  *acc = nullptr;
  for (const auto& a : ph.accents)
    if (std::fabs(t - a.time) <= kAccentHalf + 1e-9) {
      *acc = &a;
      return poly_at(a.poly, (t - a.time) / kAccentHalf);
    }
  for (const auto& s : ph.syllables)
    if (t >= s.center - 0.5 * s.dur - 1e-9 && t <= s.center + 0.5 * s.dur + 1e-9)
      return 0.5 + ph.texture * std::cos(2.0 * std::numbers::pi * (t - s.center) / s.dur);
  return 0.5 - ph.texture;
}

PlannedPhrase plan_phrase(double start, const std::vector<double>& theta, const SynthScenario& sc,
                          std::mt19937_64& rng, std::vector<WordSegment>& words, const DialogPlan& plan,
                          const std::string& speaker) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlannedPhrase ph{};
  ph.start = start;
  ph.level = 2.0 * theta[kLevel];
  ph.span = std::max(5.0 + theta[kSpan], 2.0);
  ph.decl = -2.0 + 0.8 * theta[kDecl];
  ph.range_slope = 0.6 * theta[kRangeSlope];
  ph.texture = std::clamp(0.3 + 0.06 * theta[kTexture], 0.1, 0.45);
  const double syl = 0.24 * std::exp(0.3 * theta[kSylDur]);
  AccentPoly poly = sc.accent_poly;
  for (int i = 0; i < 4; ++i) poly[i] += sc.accent_poly_sd * theta[kPoly0 + i];

  const double target = 1.2 + 1.2 * u(rng);
  double t = start;
  struct Word {
    double start, end;
    int kind;  // 0 short, 1..3 syllables
    std::size_t first_syl;
  };
  std::vector<Word> ws;
  while (t - start < target) {
    const double x = u(rng);
    const int kind = x < 0.2 ? 0 : (x < 0.55 ? 1 : (x < 0.85 ? 2 : 3));
    Word w{t, t, kind, ph.syllables.size()};
    const int n_syl = std::max(kind, 1);
    const double d = kind == 0 ? kShortSyllable : syl;
    for (int k = 0; k < n_syl; ++k) {
      ph.syllables.push_back({t + 0.5 * d, d, false});
      t += d;
    }
    w.end = t;
    ws.push_back(w);
  }
  ph.end = t;

  // words over half a second always carry an accent on the stressed syllable, short words never
  std::vector<std::pair<std::size_t, bool>> cand;  // syllable index, mandatory
  for (const auto& w : ws) {
    const std::size_t stress = w.kind == 3 ? w.first_syl + 1 : w.first_syl;
    if (w.kind == 3 || w.end - w.start > 0.5) cand.emplace_back(stress, true);
    else if (w.kind > 0 && u(rng) < 0.35) cand.emplace_back(stress, false);
  }
  std::vector<std::size_t> chosen;
  for (const auto& [si, mandatory] : cand) {
    const double c = ph.syllables[si].center;
    if (!mandatory && (c - ph.start < 0.2 || ph.end - c < 0.2)) continue;
    if (!chosen.empty() && c - ph.syllables[chosen.back()].center < 0.4) {
      if (!mandatory) continue;
      chosen.pop_back();
    }
    chosen.push_back(si);
  }
  for (std::size_t si : chosen) {
    ph.syllables[si].accented = true;
    ph.accents.push_back({ph.syllables[si].center, poly});
  }

  int n = static_cast<int>(words.size());
  for (const auto& w : ws) {
    WordSegment seg;
    seg.dialog_id = plan.id;
    seg.speaker_id = speaker;
    seg.start = w.start;
    seg.end = w.end;
    seg.word = "w" + std::to_string(n++);
    const std::size_t stress = w.kind == 3 ? w.first_syl + 1 : w.first_syl;
    seg.stress_nucleus = ph.syllables[stress].center;
    words.push_back(seg);
  }
  return ph;
}

void render_f0(const std::vector<PlannedPhrase>& phrases, std::vector<double>& g, std::vector<bool>& voiced) {
  for (const auto& ph : phrases) {
    const auto a = static_cast<std::size_t>(std::ceil(ph.start * kTrackRate - 1e-9));
    const auto b = static_cast<std::size_t>(std::floor(ph.end * kTrackRate + 1e-9));
    for (std::size_t i = a; i <= b && i < g.size(); ++i) {
      const double t = static_cast<double>(i) / kTrackRate;
      const double tau = (t - ph.start) / (ph.end - ph.start);
      const double base = ph.level + ph.decl * tau;
      const double span = ph.span + ph.range_slope * tau;
      const PlannedAccent* acc = nullptr;
      g[i] = base + span * planted_norm(ph, t, &acc);
      voiced[i] = true;
    }
  }
}

SampledTrack to_hz(const std::vector<double>& g, const std::vector<bool>& voiced) {
  SampledTrack t;
  t.sample_rate = kTrackRate;
  t.values.resize(g.size());
  t.valid = voiced;
  for (std::size_t i = 0; i < g.size(); ++i) t.values[i] = voiced[i] ? kRefHz * std::exp2(g[i] / 12.0) : 0.0;
  return t;
}

// Re-expresses the accent windows in the register that the stylization of the
// rendered channel actually fits, so planted shapes survive normalization.
void calibrate_accents(const std::vector<PlannedPhrase>& phrases, const std::vector<WordSegment>& words,
                       std::vector<double>& g, const std::vector<bool>& voiced, int rounds) {
  std::vector<double> bounds, accents, starts;
  for (const auto& ph : phrases) {
    bounds.push_back(ph.end);
    for (const auto& a : ph.accents) accents.push_back(a.time);
  }
  for (const auto& w : words) starts.push_back(w.start);
  std::sort(starts.begin(), starts.end());
  for (int r = 0; r < rounds; ++r) {
    double moved = 0.0;
    const auto [st, base] = preprocess_f0(to_hz(g, voiced));
    const double shift = 12.0 * std::log2(base.base_hz / kRefHz);
    const auto ch = stylize_channel(st, SampledTrack{}, {}, bounds, {}, starts);
    for (const auto& ph : phrases) {
      const auto fitted = std::find_if(ch.phrases.begin(), ch.phrases.end(), [&](const Phrase& p) {
        return std::fabs(p.end - ph.end) < 1e-9;
      });
      if (fitted == ch.phrases.end()) continue;
      for (const auto& a : ph.accents) {
        // a few samples past the window keep the smoother's edge taps on the cubic
        const auto [lo, hi] = st.index_range(std::max(a.time - kAccentHalf - kAccentMargin, fitted->start),
                                             std::min(a.time + kAccentHalf + kAccentMargin, fitted->end));
        for (std::size_t i = lo; i < hi; ++i) {
          const double t = st.time(i);
          const double tn = fitted->reg.norm_time(t);
          const double b = fitted->reg.base.at(tn);
          const double span = std::max(fitted->reg.top.at(tn) - b, 0.1);
          const double v = shift + b + span * poly_at(a.poly, (t - a.time) / kAccentHalf);
          moved = std::max(moved, std::fabs(v - g[i]));
          g[i] = v;
        }
      }
    }
    if (moved < 1e-10) break;
  }
}

AudioBuffer render_audio(const std::vector<PlannedPhrase>& phrases, const std::vector<double>& amp,
                         double duration, double rate) {
  AudioBuffer a;
  a.sample_rate = rate;
  a.samples.assign(static_cast<std::size_t>(std::ceil(duration * rate)), 0.0);
  std::size_t k = 0;
  for (const auto& ph : phrases)
    for (const auto& s : ph.syllables) {
      const double width = s.dur == kShortSyllable ? 0.08 : 0.8 * s.dur;
      const double gain = amp[k++] * (s.accented ? 1.6 : 1.0);
      const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil((s.center - 0.5 * width) * rate)));
      const auto i1 = std::min(a.samples.size(), static_cast<std::size_t>((s.center + 0.5 * width) * rate));
      for (std::size_t i = i0; i < i1; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double env = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (t - s.center) / width);
        a.samples[i] += gain * env * std::sin(2.0 * std::numbers::pi * 1000.0 * t);
      }
    }
  return a;
}

SynthCorpus generate_contours(const SynthScenario& sc) {
  SynthCorpus c;
  c.scenario = sc;
  for (const auto& plan : plan_dialogs(sc)) {
    std::mt19937_64 rng(derive_seed(sc.seed, "dialog/" + plan.id));
    LatentModel latent(sc, kParamCount, rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<ChannelPlan, 2> chans;
    double t = 0.5;
    int speaker = 0;
    std::vector<DialogActSegment> segs;
    for (int i = 0; i < sc.n_segments_per_dialog; ++i) {
      if (i > 0 && u(rng) < 0.8) speaker = 1 - speaker;
      DialogActSegment s;
      s.dialog_id = plan.id;
      s.speaker_id = plan.speakers[speaker];
      s.label = draw_label(sc, rng);
      s.condition = plan.condition;
      const auto theta = latent.draw(s.label, speaker);
      auto& ch = chans[speaker];
      const int n_phrases = u(rng) < 0.6 ? 1 : 2;
      s.start = t;
      for (int p = 0; p < n_phrases; ++p) {
        if (p > 0 && u(rng) < 0.5) t += 0.3 + 0.2 * u(rng);
        auto ph = plan_phrase(t, theta, sc, rng, ch.words, plan, s.speaker_id);
        const double a = 0.25 * std::exp(0.2 * theta[kAmp]);
        for (std::size_t k = 0; k < ph.syllables.size(); ++k) ch.amp.push_back(a);
        t = ph.end;
        ch.phrases.push_back(std::move(ph));
      }
      s.end = t;
      segs.push_back(s);
      t += 0.3 + 0.5 * u(rng);
    }
    const double duration = t + 0.3;
    const auto n_frames = static_cast<std::size_t>(std::floor(duration * kTrackRate)) + 1;
    for (int s = 0; s < 2; ++s) {
      auto& plan_ch = chans[s];
      if (plan_ch.phrases.empty()) continue;
      std::vector<double> g(n_frames, 0.0);
      std::vector<bool> voiced(n_frames, false);
      render_f0(plan_ch.phrases, g, voiced);
      calibrate_accents(plan_ch.phrases, plan_ch.words, g, voiced, sc.calibration_rounds);
      SynthChannel out;
      out.dialog_id = plan.id;
      out.speaker_id = plan.speakers[s];
      out.f0_hz = to_hz(g, voiced);
      out.audio = render_audio(plan_ch.phrases, plan_ch.amp, duration, sc.audio_rate);
      out.words = plan_ch.words;
      for (const auto& ph : plan_ch.phrases) {
        for (const auto& syl : ph.syllables) out.nuclei.push_back(syl.center);
        out.boundaries.push_back(ph.end);
        for (const auto& a : ph.accents) {
          out.accents.push_back(a.time);
          out.accent_polys.push_back(a.poly);
        }
      }
      c.channels.push_back(std::move(out));
    }
    c.segments.insert(c.segments.end(), segs.begin(), segs.end());
  }
  assign_dialog_indices(c.segments);
  return c;
}

}  // namespace

SynthCorpus generate_corpus(const SynthScenario& scenario) {
  scenario.validate();
  return scenario.mode == SynthMode::features ? generate_features(scenario) : generate_contours(scenario);
}

void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  io::write_da_tier(dir / "da.tsv", corpus.segments);
  json truth;
  truth["scenario"] = json::parse(scenario_to_json(corpus.scenario));
  if (corpus.features) {
    io::write_feature_table(dir / "features.tsv", *corpus.features);
  } else {
    std::vector<WordSegment> words;
    json channels = json::array();
    for (const auto& ch : corpus.channels) {
      const auto stem = channel_stem(ch.dialog_id, ch.speaker_id);
      io::write_f0_track(dir / "f0" / (stem + ".f0"), ch.f0_hz);
      io::write_wav(dir / "audio" / (stem + ".wav"), ch.audio);
      words.insert(words.end(), ch.words.begin(), ch.words.end());
      json j;
      j["dialog"] = ch.dialog_id;
      j["speaker"] = ch.speaker_id;
      j["nuclei"] = ch.nuclei;
      j["boundaries"] = ch.boundaries;
      j["accents"] = ch.accents;
      j["accent_polys"] = ch.accent_polys;
      channels.push_back(j);
    }
    io::write_word_tier(dir / "words.tsv", words);
    truth["channels"] = channels;
  }
  io::write_text(dir / "truth.json", truth.dump(1) + "\n");
}

}  // namespace prosody
