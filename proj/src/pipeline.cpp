#include "prosody/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <tuple>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "prosody/error.hpp"
#include "prosody/io.hpp"
#include "prosody/kernels/kernels.hpp"
#include "prosody/synth.hpp"

namespace prosody {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ConditionFilter parse_condition_filter(std::string_view s) {
  if (s == "both") return ConditionFilter::both;
  if (s == "coop" || s == "cooperative") return ConditionFilter::coop;
  if (s == "comp" || s == "competitive") return ConditionFilter::comp;
  throw ConfigError("field 'condition': expected coop, comp or both, got '" + std::string(s) + "'");
}

std::string_view to_string(ConditionFilter c) {
  switch (c) {
    case ConditionFilter::coop: return "coop";
    case ConditionFilter::comp: return "comp";
    case ConditionFilter::both: return "both";
  }
  return "both";
}

// ------------------------------------------------------------------ config

namespace {

// Binds config fields to JSON keys once, for both directions.
struct Binder {
  ordered_json* out = nullptr;
  const nlohmann::json* in = nullptr;
  std::string prefix;
  std::set<std::string>* seen = nullptr;

  template <typename T>
  void operator()(const char* key, T& v) {
    const std::string path = prefix + key;
    if (out) {
      (*out)[key] = v;
      return;
    }
    if (!in->contains(key)) return;
    seen->insert(key);
    try {
      v = in->at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config field '" + path + "': wrong type");
    }
  }
};

template <typename Fn>
void section(ordered_json* out, const nlohmann::json* in, const std::string& name, Fn&& fn) {
  if (out) {
    ordered_json sub = ordered_json::object();
    Binder b{&sub, nullptr, name + ".", nullptr};
    fn(b);
    (*out)[name] = sub;
    return;
  }
  if (!in->contains(name)) return;
  const auto& sub = in->at(name);
  if (!sub.is_object()) throw ConfigError("config field '" + name + "': expected an object");
  std::set<std::string> seen;
  Binder b{nullptr, &sub, name + ".", &seen};
  fn(b);
  for (const auto& [k, v] : sub.items())
    if (!seen.count(k)) throw ConfigError("config field '" + name + "." + k + "': unknown key");
}

void bind_all(PipelineConfig& c, ordered_json* out, const nlohmann::json* in) {
  section(out, in, "f0", [&](Binder& b) {
    b("f_min", c.f0.f_min);
    b("f_max", c.f0.f_max);
    b("frame_length", c.f0.frame_length);
    b("hop", c.f0.hop);
    b("voicing_threshold", c.f0.voicing_threshold);
    b("silence_threshold", c.f0.silence_threshold);
    b("octave_cost", c.f0.octave_cost);
    b("outlier_k", c.outlier_k);
  });
  section(out, in, "energy", [&](Binder& b) {
    b("window", c.energy.window);
    b("hop", c.energy.hop);
  });
  section(out, in, "nuclei", [&](Binder& b) {
    b("band_low", c.nuclei.band_low);
    b("band_high", c.nuclei.band_high);
    b("analysis_window", c.nuclei.analysis_window);
    b("reference_window", c.nuclei.reference_window);
    b("step", c.nuclei.step);
    b("energy_factor", c.nuclei.energy_factor);
    b("absolute_fraction", c.nuclei.absolute_fraction);
    b("min_gap", c.nuclei.min_gap);
    b("refine_step", c.nuclei.refine_step);
  });
  section(out, in, "structure", [&](Binder& b) {
    b("pause_threshold", c.pause_threshold);
    b("min_phrase", c.boundary.min_phrase);
    b("context_window", c.boundary.context_window);
    b("accent_long_word", c.accent.long_word);
    b("accent_short_word", c.accent.short_word);
    b("accent_energy_window", c.accent.energy_window);
    b("accent_window", c.accent.window);
  });
  section(out, in, "stylize", [&](Binder& b) {
    b("register_window", c.stylize.reg.window);
    b("register_step", c.stylize.reg.step);
    b("low_percentile", c.stylize.reg.low_percentile);
    b("high_percentile", c.stylize.reg.high_percentile);
    b("accent_window", c.stylize.accent_window);
    b("min_span", c.stylize.min_span);
  });
  section(out, in, "rhythm", [&](Binder& b) {
    b("cutoff", c.dct.cutoff);
    b("half_band", c.dct.half_band);
    b("include_dc", c.dct.include_dc);
    b("min_duration", c.dct.min_duration);
  });
  section(out, in, "entrainment", [&](Binder& b) {
    b("seed", c.seed);
    b("resamples", c.n_resamples);
    b("condition_matched", c.condition_matched);
    b("frozen_groupings", c.frozen_groupings);
  });
  section(out, in, "stats", [&](Binder& b) {
    b("alpha", c.alpha);
    b("per_feature", c.per_feature);
    b("permutations", c.n_perm);
    std::string cond(to_string(c.condition));
    b("condition", cond);
    c.condition = parse_condition_filter(cond);
  });
}

}  // namespace

void PipelineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string("config field '") + name + "': must be positive");
  };
  if (!(f0.f_min > 0.0 && f0.f_min < f0.f_max)) throw ConfigError("config field 'f0.f_min': bad range");
  positive(f0.frame_length, "f0.frame_length");
  positive(f0.hop, "f0.hop");
  positive(outlier_k, "f0.outlier_k");
  positive(energy.window, "energy.window");
  positive(energy.hop, "energy.hop");
  if (!(nuclei.band_low > 0.0 && nuclei.band_low < nuclei.band_high))
    throw ConfigError("config field 'nuclei.band_low': bad band");
  positive(nuclei.analysis_window, "nuclei.analysis_window");
  positive(nuclei.reference_window, "nuclei.reference_window");
  positive(nuclei.step, "nuclei.step");
  positive(pause_threshold, "structure.pause_threshold");
  positive(boundary.min_phrase, "structure.min_phrase");
  positive(boundary.context_window, "structure.context_window");
  positive(accent.window, "structure.accent_window");
  positive(accent.energy_window, "structure.accent_energy_window");
  positive(stylize.reg.window, "stylize.register_window");
  positive(stylize.reg.step, "stylize.register_step");
  positive(stylize.accent_window, "stylize.accent_window");
  positive(stylize.min_span, "stylize.min_span");
  positive(dct.cutoff, "rhythm.cutoff");
  positive(dct.half_band, "rhythm.half_band");
  if (n_resamples < 1) throw ConfigError("config field 'entrainment.resamples': must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config field 'stats.alpha': must lie in (0, 1)");
  if (n_perm < 1) throw ConfigError("config field 'stats.permutations': must be at least 1");
}

std::string PipelineConfig::to_json() const {
  ordered_json j = ordered_json::object();
  PipelineConfig copy = *this;
  bind_all(copy, &j, nullptr);
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("manifest_version")) j = j.at("config");
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> sections{"f0",     "energy",      "nuclei", "structure",
                                              "stylize", "rhythm", "entrainment", "stats"};
  for (const auto& [k, v] : j.items())
    if (!sections.count(k)) throw ConfigError("config field '" + k + "': unknown section");
  PipelineConfig c;
  bind_all(c, nullptr, &j);
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  try {
    return PipelineConfig::from_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------------ corpus

CorpusFiles load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError(dir.string() + ": corpus directory not found");
  CorpusFiles c;
  c.root = dir;
  const auto da = dir / "da.tsv";
  if (!fs::exists(da)) throw InputError(da.string() + ": missing dialog-act tier");
  c.segments = io::read_da_tier(da);
  c.inputs.push_back(da);
  const auto feats = dir / "features.tsv";
  const auto words = dir / "words.tsv";
  if (fs::exists(feats)) {
    c.features = io::read_feature_table(feats);
    c.inputs.push_back(feats);
  } else if (fs::exists(words)) {
    c.words = io::read_word_tier(words);
    c.inputs.push_back(words);
  } else {
    throw InputError(words.string() + ": missing word tier (and no features.tsv)");
  }
  return c;
}

ChannelAnalysis analyze_channel(const std::optional<AudioBuffer>& audio, const std::optional<SampledTrack>& f0_hz,
                                std::vector<WordSegment> words, const PipelineConfig& cfg) {
  if (!audio && !f0_hz) throw InputError("channel has neither audio nor an f0 track");
  ChannelAnalysis out;
  SampledTrack raw = f0_hz ? *f0_hz : extract_f0_autocorr(*audio, cfg.f0);
  const auto masked = mark_outliers(raw, cfg.outlier_k);
  auto [st, base] = preprocess_f0(raw, cfg.outlier_k);
  out.semitone_base_hz = base.base_hz;
  SampledTrack voiced = st;
  voiced.valid = masked.valid;

  SampledTrack energy;
  if (audio) energy = rms_energy(*audio, cfg.energy);
  std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  mark_pauses(words, cfg.pause_threshold);

  std::vector<double> nuclei;
  if (audio) {
    nuclei = detect_syllable_nuclei(*audio, cfg.nuclei);
  } else {
    for (const auto& w : words)
      if (w.stress_nucleus) nuclei.push_back(*w.stress_nucleus);
    std::sort(nuclei.begin(), nuclei.end());
  }
  std::vector<double> starts;
  for (const auto& w : words) starts.push_back(w.start);

  std::vector<double> boundaries;
  if (words.size() >= 2) {
    try {
      boundaries = detect_phrase_boundaries(words, voiced, nuclei, cfg.boundary).boundaries;
    } catch (const Error&) {
      boundaries = pause_boundaries(words);
      out.boundary_fallback = true;
    }
  } else {
    boundaries = pause_boundaries(words);
    out.boundary_fallback = true;
  }

  const auto phrased = stylize_channel(st, energy, nuclei, boundaries, {}, starts, cfg.stylize);
  std::vector<std::pair<double, double>> extents;
  for (const auto& ph : phrased.phrases) extents.emplace_back(ph.start, ph.end);
  std::vector<double> accents;
  try {
    AccentConfig acfg = cfg.accent;
    accents = detect_pitch_accents(words, phrased.norm_f0, energy, nuclei, extents, acfg).accents;
  } catch (const Error&) {
    out.accent_fallback = true;
  }
  out.structure = {nuclei, boundaries, accents};
  out.prosody = stylize_channel(std::move(st), std::move(energy), std::move(nuclei), boundaries, accents, starts,
                                cfg.stylize);
  return out;
}

std::vector<ChannelAnalysis> analyze_corpus(CorpusFiles& corpus, const PipelineConfig& cfg) {
  std::map<std::pair<std::string, std::string>, std::vector<WordSegment>> by_channel;
  for (const auto& w : corpus.words) by_channel[{w.dialog_id, w.speaker_id}].push_back(w);
  for (const auto& s : corpus.segments) by_channel.try_emplace({s.dialog_id, s.speaker_id});
  std::vector<ChannelAnalysis> out;
  for (auto& [key, words] : by_channel) {
    const auto stem = channel_stem(key.first, key.second);
    const auto f0_path = corpus.root / "f0" / (stem + ".f0");
    const auto wav_path = corpus.root / "audio" / (stem + ".wav");
    std::optional<SampledTrack> f0;
    std::optional<AudioBuffer> audio;
    if (fs::exists(f0_path)) {
      f0 = io::read_f0_track(f0_path);
      corpus.inputs.push_back(f0_path);
    }
    if (fs::exists(wav_path)) {
      audio = io::read_wav(wav_path);
      corpus.inputs.push_back(wav_path);
    }
    if (!f0 && !audio) throw InputError(f0_path.string() + ": missing f0 track (and no " + wav_path.string() + ")");
    try {
      auto a = analyze_channel(audio, f0, std::move(words), cfg);
      a.dialog_id = key.first;
      a.speaker_id = key.second;
      out.push_back(std::move(a));
    } catch (const InputError& e) {
      throw InputError(stem + ": " + e.what());
    }
  }
  return out;
}

FeatureTable build_feature_table(const std::vector<DialogActSegment>& segments,
                                 const std::vector<ChannelAnalysis>& channels, const PipelineConfig& cfg) {
  std::map<std::pair<std::string, std::string>, const ChannelAnalysis*> index;
  for (const auto& c : channels) index[{c.dialog_id, c.speaker_id}] = &c;
  FeatureTable t;
  t.columns = all_feature_columns();
  t.segments = segments;
  for (const auto& s : segments) {
    std::vector<double> row(t.columns.size(), std::nan(""));
    const auto it = index.find({s.dialog_id, s.speaker_id});
    if (it != index.end()) {
      const auto fm = segment_features(it->second->prosody, s.start, s.end, cfg.dct);
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto f = fm.find(t.columns[c]);
        if (f != fm.end()) row[c] = f->second;
      }
    }
    t.values.push_back(std::move(row));
  }
  return t;
}

EntrainmentResult run_entrainment(const FeatureTable& table, const PipelineConfig& cfg) {
  EntrainmentResult r;
  const auto means = speaker_means(table);
  const auto draws = sample_pairs(table.segments, cfg.seed, cfg.n_resamples, {cfg.condition_matched});
  for (std::size_t d = 0; d < draws.size(); ++d) {
    auto recs = compute_records(table, draws[d], means, static_cast<int>(d));
    r.records.insert(r.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    r.skipped.push_back(draws[d].skipped);
  }
  return r;
}

std::vector<EntrainmentRecord> filter_condition(std::vector<EntrainmentRecord> records, ConditionFilter c) {
  if (c == ConditionFilter::both) return records;
  const Condition keep = c == ConditionFilter::coop ? Condition::cooperative : Condition::competitive;
  std::erase_if(records, [&](const EntrainmentRecord& r) { return r.condition != keep; });
  return records;
}

// ------------------------------------------------------------------ stats

namespace {

std::vector<std::vector<SignCell>> per_draw_tables(const std::vector<EntrainmentRecord>& records,
                                                   const SignOptions& opts) {
  std::map<int, std::vector<EntrainmentRecord>> by_draw;
  for (const auto& r : records) by_draw[r.resample].push_back(r);
  std::vector<std::vector<SignCell>> out;
  for (const auto& [d, recs] : by_draw) out.push_back(sign_table(recs, opts));
  return out;
}

}  // namespace

StatsResult run_stats(const std::vector<EntrainmentRecord>& records, const std::vector<DialogActSegment>& segments,
                      const PipelineConfig& cfg) {
  StatsResult out;
  const SignOptions opts{cfg.alpha, cfg.per_feature};
  out.signs = summarize_draws(per_draw_tables(records, opts));

  const auto probs = compute_da_probs(segments);
  const auto groups = assign_groupings(segments, probs, cfg.frozen_groupings);
  std::map<std::string, const DaGrouping*> by_id;
  for (std::size_t i = 0; i < segments.size(); ++i) by_id[segments[i].id()] = &groups[i];
  const auto high_freq = high_frequency_labels(probs.unigram);
  auto label_high_freq = [&](DaLabel l) {
    if (cfg.frozen_groupings) return label_traits(l).table_frequency_high;
    return std::find(high_freq.begin(), high_freq.end(), l) != high_freq.end();
  };

  std::vector<SignCell> consensus;
  for (const auto& s : out.signs) consensus.push_back(s.cell);
  auto add_rows = [&](const std::vector<ProportionRow>& rows) {
    out.proportions.insert(out.proportions.end(), rows.begin(), rows.end());
  };
  add_rows(proportion_table(consensus, "authority", [](const SignCell& c) -> std::optional<std::string> {
    return label_traits(c.label).high_authority ? "high" : "low";
  }));
  add_rows(proportion_table(consensus, "support", [](const SignCell& c) -> std::optional<std::string> {
    return label_traits(c.label).supportive ? "yes" : "no";
  }));
  add_rows(proportion_table(consensus, "frequency", [&](const SignCell& c) -> std::optional<std::string> {
    return label_high_freq(c.label) ? "high" : "low";
  }));

  // predictability is a property of occurrences: cells are recomputed per level
  for (const bool high : {true, false}) {
    std::vector<EntrainmentRecord> subset;
    for (const auto& r : records) {
      const auto it = by_id.find(r.segment_id);
      if (it == by_id.end() || !it->second->high_predictability) continue;
      if (*it->second->high_predictability == high) subset.push_back(r);
    }
    if (subset.empty()) continue;
    std::vector<SignCell> cells;
    for (const auto& s : summarize_draws(per_draw_tables(subset, opts))) cells.push_back(s.cell);
    const std::string level = high ? "high" : "low";
    add_rows(proportion_table(cells, "predictability",
                              [&](const SignCell&) -> std::optional<std::string> { return level; }));
  }

  // group tests on per-segment mean delta d of the first draw
  struct Unit {
    double sum = 0.0;
    int n = 0;
  };
  using UnitKey = std::tuple<Condition, FeatureSet, Measure, std::string>;
  std::map<UnitKey, Unit> units;
  for (const auto& r : records) {
    if (r.resample != 0) continue;
    auto& u = units[{r.condition, set_of_column(r.feature), r.measure, r.segment_id}];
    u.sum += r.d;
    ++u.n;
  }
  std::map<std::string, int> speaker_code;
  for (const auto& s : segments) speaker_code.try_emplace(s.speaker_id, static_cast<int>(speaker_code.size()));
  std::map<std::string, const DialogActSegment*> seg_by_id;
  for (const auto& s : segments) seg_by_id[s.id()] = &s;

  struct Dim {
    const char* name;
    const char* level;
    std::function<std::optional<bool>(const DialogActSegment&, const DaGrouping&)> of;
  };
  const std::vector<Dim> dims{
      {"authority", "high", [](const auto&, const DaGrouping& g) { return std::optional<bool>(g.high_authority); }},
      {"support", "yes", [](const auto&, const DaGrouping& g) { return std::optional<bool>(g.supportive); }},
      {"frequency", "high",
       [&](const DialogActSegment& s, const DaGrouping&) { return std::optional<bool>(label_high_freq(s.label)); }},
      {"predictability", "high", [](const auto&, const DaGrouping& g) { return g.high_predictability; }},
  };
  for (const auto& dim : dims)
    for (const Condition cond : {Condition::cooperative, Condition::competitive})
      for (const FeatureSet set : kAllFeatureSets)
        for (const Measure m : {Measure::convergence, Measure::synchrony}) {
          std::vector<double> vals;
          std::vector<int> lev, strata;
          for (auto it = units.lower_bound({cond, set, m, std::string()});
               it != units.end() && std::get<0>(it->first) == cond && std::get<1>(it->first) == set &&
               std::get<2>(it->first) == m;
               ++it) {
            const auto& id = std::get<3>(it->first);
            const auto sit = seg_by_id.find(id);
            if (sit == seg_by_id.end()) continue;
            const auto level = dim.of(*sit->second, *by_id.at(id));
            if (!level) continue;
            vals.push_back(it->second.sum / it->second.n);
            lev.push_back(*level ? 1 : 0);
            strata.push_back(speaker_code.at(sit->second->speaker_id));
          }
          if (vals.empty()) continue;
          GroupTestRow row;
          row.dimension = dim.name;
          row.level = dim.level;
          row.condition = cond;
          row.set = set;
          row.measure = m;
          try {
            const auto tag = std::string(dim.name) + "/" + std::string(to_string(cond)) + "/" +
                             std::string(to_string(set)) + "/" + std::string(to_string(m));
            row.result = permutation_group_test(vals, lev, strata, cfg.n_perm, derive_seed(cfg.seed, tag));
            row.available = true;
            double s1 = 0, s0 = 0;
            int n1 = 0, n0 = 0;
            for (std::size_t i = 0; i < vals.size(); ++i) (lev[i] ? (s1 += vals[i], ++n1) : (s0 += vals[i], ++n0));
            row.mean_level = n1 ? s1 / n1 : std::nan("");
            row.mean_other = n0 ? s0 / n0 : std::nan("");
          } catch (const Error&) {
            row.available = false;
          }
          out.group_tests.push_back(std::move(row));
        }
  return out;
}

// ------------------------------------------------------------------ writers

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write file");
  return out;
}

}  // namespace

void write_signs(const fs::path& path, const std::vector<SignSummary>& signs) {
  auto out = open_out(path);
  out << "condition\tda_label\tset\tfeature\tmeasure\tsign\tstatus\tp_median\tp_min\tp_max\tn_plus\tn_minus\t"
         "n_draws\tmean_d_s\tmean_d_d\tn\n";
  using io::format_double;
  for (const auto& s : signs) {
    const auto& c = s.cell;
    out << to_string(c.condition) << '\t' << to_string(c.label) << '\t' << to_string(c.set) << '\t'
        << (c.feature.empty() ? "*" : c.feature) << '\t' << to_string(c.measure) << '\t' << to_string(c.sign) << '\t'
        << (c.available ? "ok" : "n/a") << '\t' << format_double(c.p) << '\t' << format_double(s.p_min) << '\t'
        << format_double(s.p_max) << '\t' << s.n_plus << '\t' << s.n_minus << '\t' << s.n_draws << '\t'
        << format_double(c.mean_d_s) << '\t' << format_double(c.mean_d_d) << '\t' << c.n << '\n';
  }
}

void write_proportions(const fs::path& path, const std::vector<ProportionRow>& rows) {
  auto out = open_out(path);
  out << "dimension\tlevel\tcondition\tp_plus\tp_minus\tp_rest\tn_cells\n";
  for (const auto& r : rows)
    out << r.dimension << '\t' << r.level << '\t' << to_string(r.condition) << '\t' << io::format_double(r.p_plus)
        << '\t' << io::format_double(r.p_minus) << '\t' << io::format_double(1.0 - r.p_plus - r.p_minus) << '\t'
        << r.n_cells << '\n';
}

void write_group_tests(const fs::path& path, const std::vector<GroupTestRow>& rows, int n_perm) {
  auto out = open_out(path);
  out << "dimension\tlevel\tcondition\tset\tmeasure\tstatus\tn_level\tn_other\tmean_d_level\tmean_d_other\tdiff\t"
         "p\tstrata\tpermutations\n";
  using io::format_double;
  for (const auto& r : rows)
    out << r.dimension << '\t' << r.level << '\t' << to_string(r.condition) << '\t' << to_string(r.set) << '\t'
        << to_string(r.measure) << '\t' << (r.available ? "ok" : "n/a") << '\t' << r.result.n1 << '\t'
        << r.result.n0 << '\t' << format_double(r.available ? r.mean_level : std::nan("")) << '\t'
        << format_double(r.available ? r.mean_other : std::nan("")) << '\t'
        << format_double(r.available ? r.result.diff : std::nan("")) << '\t'
        << format_double(r.available ? r.result.p : std::nan("")) << '\t' << r.result.strata << '\t' << n_perm
        << '\n';
}

std::string sha256_file(const fs::path& path) {
  const auto data = io::read_text(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return ss.str();
}

RunSummary run_pipeline(const fs::path& corpus_dir, const PipelineConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  auto corpus = load_corpus(corpus_dir);
  RunSummary summary;
  FeatureTable table;
  if (corpus.features) {
    summary.feature_mode = true;
    table = *corpus.features;
  } else {
    const auto channels = analyze_corpus(corpus, cfg);
    summary.channels = channels.size();
    table = build_feature_table(corpus.segments, channels, cfg);
  }
  summary.segments = table.segments.size();

  const auto ent = run_entrainment(table, cfg);
  const auto records = filter_condition(ent.records, cfg.condition);
  summary.records = records.size();
  if (!ent.skipped.empty()) summary.skipped = ent.skipped.front();
  const auto stats = run_stats(records, table.segments, cfg);

  fs::create_directories(out_dir);
  io::write_feature_table(out_dir / "features.tsv", table);
  {
    auto out = open_out(out_dir / "entrain.jsonl");
    write_jsonl(out, records);
  }
  write_signs(out_dir / "signs.tsv", stats.signs);
  write_proportions(out_dir / "proportions.tsv", stats.proportions);
  write_group_tests(out_dir / "group_tests.tsv", stats.group_tests, cfg.n_perm);

  ordered_json m;
  m["manifest_version"] = 1;
  m["version"] = kVersion;
  m["corpus"] = fs::absolute(corpus_dir).lexically_normal().string();
  m["seed"] = cfg.seed;
  m["kernel_backend"] = kernels::backend_name(kernels::active_backend());
  m["mode"] = summary.feature_mode ? "features" : "contour";
  m["config"] = ordered_json::parse(cfg.to_json());
  auto inputs = corpus.inputs;
  std::sort(inputs.begin(), inputs.end());
  ordered_json in = ordered_json::object();
  for (const auto& p : inputs) in[fs::relative(p, corpus_dir).generic_string()] = sha256_file(p);
  m["inputs"] = in;
  ordered_json skips = ordered_json::array();
  for (const auto& s : ent.skipped) skips.push_back({{"no_within", s.no_within}, {"no_across", s.no_across}});
  m["skipped"] = skips;
  ordered_json outs = ordered_json::object();
  for (const char* f : {"features.tsv", "entrain.jsonl", "signs.tsv", "proportions.tsv", "group_tests.tsv"})
    outs[f] = sha256_file(out_dir / f);
  m["outputs"] = outs;
  io::write_text(out_dir / "run_manifest.json", m.dump(2) + "\n");
  return summary;
}

}  // namespace prosody
