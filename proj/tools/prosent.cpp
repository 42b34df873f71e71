// prosent: command-line driver for the prosodic entrainment pipeline.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prosody/error.hpp"
#include "prosody/io.hpp"
#include "prosody/pipeline.hpp"
#include "prosody/plot.hpp"
#include "prosody/synth.hpp"

namespace fs = std::filesystem;
using namespace prosody;

namespace {

struct Common {
  std::string corpus;
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> resamples;
  std::optional<double> alpha;
  std::string condition;
  bool frozen = false;
  bool per_feature = false;
};

void add_common(CLI::App* app, Common& c, bool corpus_required = true) {
  auto* opt = app->add_option("--corpus", c.corpus, "corpus directory");
  if (corpus_required) opt->required();
  app->add_option("--out", c.out, "output directory")->required();
  app->add_option("--config", c.config, "JSON config or run manifest (default: $PROSENT_CONFIG)");
  app->add_option("--seed", c.seed, "pairing / generation seed");
  app->add_option("--resamples", c.resamples, "number of pairing draws");
  app->add_option("--alpha", c.alpha, "significance level");
  app->add_option("--condition", c.condition, "coop, comp or both");
  app->add_flag("--frozen-groupings", c.frozen, "use the fixed frequency split of the label table");
  app->add_flag("--per-feature", c.per_feature, "test each feature instead of pooling feature sets");
}

PipelineConfig resolve_config(const Common& c) {
  std::string path = c.config;
  if (path.empty())
    if (const char* env = std::getenv("PROSENT_CONFIG")) path = env;
  PipelineConfig cfg = path.empty() ? PipelineConfig{} : load_config(path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.resamples) cfg.n_resamples = *c.resamples;
  if (c.alpha) cfg.alpha = *c.alpha;
  if (!c.condition.empty()) cfg.condition = parse_condition_filter(c.condition);
  if (c.frozen) cfg.frozen_groupings = true;
  if (c.per_feature) cfg.per_feature = true;
  cfg.validate();
  return cfg;
}

// corpus from the flag, or from the manifest given as --config
fs::path resolve_corpus(const Common& c) {
  if (!c.corpus.empty()) return c.corpus;
  if (!c.config.empty()) {
    try {
      const auto j = nlohmann::json::parse(io::read_text(c.config));
      if (j.contains("corpus")) return j.at("corpus").get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
  }
  throw ConfigError("field '--corpus': required (or pass a run manifest via --config)");
}

void write_track(const fs::path& path, const SampledTrack& t) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < t.size(); ++i)
    ss << io::format_double(std::round(t.time(i) * 1e6) / 1e6) << ' '
       << io::format_double(t.valid[i] ? t.values[i] : 0.0) << '\n';
  io::write_text(path, ss.str());
}

int cmd_extract(const Common& c) {
  const auto cfg = resolve_config(c);
  const fs::path audio_dir = fs::path(c.corpus) / "audio";
  if (!fs::is_directory(audio_dir)) throw InputError(audio_dir.string() + ": missing audio directory");
  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(audio_dir))
    if (e.path().extension() == ".wav") wavs.push_back(e.path());
  std::sort(wavs.begin(), wavs.end());
  for (const auto& w : wavs) {
    const auto audio = io::read_wav(w);
    const auto f0 = extract_f0_autocorr(audio, cfg.f0);
    io::write_f0_track(fs::path(c.out) / "f0" / (w.stem().string() + ".f0"), f0);
    write_track(fs::path(c.out) / "energy" / (w.stem().string() + ".en"), rms_energy(audio, cfg.energy));
  }
  std::cout << "extracted " << wavs.size() << " channels\n";
  return 0;
}

int cmd_detect(const Common& c) {
  const auto cfg = resolve_config(c);
  auto corpus = load_corpus(c.corpus);
  if (corpus.features) throw InputError(c.corpus + "/words.tsv: detection needs a word tier, corpus has features only");
  const auto channels = analyze_corpus(corpus, cfg);
  for (const auto& ch : channels) {
    nlohmann::ordered_json j;
    j["dialog"] = ch.dialog_id;
    j["speaker"] = ch.speaker_id;
    j["nuclei"] = ch.structure.nuclei;
    j["phrase_boundaries"] = ch.structure.phrase_boundaries;
    j["accents"] = ch.structure.accents;
    j["boundary_fallback"] = ch.boundary_fallback;
    j["accent_fallback"] = ch.accent_fallback;
    io::write_text(fs::path(c.out) / "structure" / (channel_stem(ch.dialog_id, ch.speaker_id) + ".json"),
                   j.dump(1) + "\n");
  }
  std::cout << "analysed " << channels.size() << " channels\n";
  return 0;
}

FeatureTable features_of(const Common& c, const PipelineConfig& cfg) {
  auto corpus = load_corpus(c.corpus);
  if (corpus.features) return *corpus.features;
  return build_feature_table(corpus.segments, analyze_corpus(corpus, cfg), cfg);
}

int cmd_features(const Common& c) {
  const auto cfg = resolve_config(c);
  const auto table = features_of(c, cfg);
  io::write_feature_table(fs::path(c.out) / "features.tsv", table);
  std::cout << "wrote features for " << table.segments.size() << " segments\n";
  return 0;
}

int cmd_entrain(const Common& c) {
  const auto cfg = resolve_config(c);
  const auto table = features_of(c, cfg);
  const auto ent = run_entrainment(table, cfg);
  const auto records = filter_condition(ent.records, cfg.condition);
  fs::create_directories(c.out);
  std::ofstream out(fs::path(c.out) / "entrain.jsonl", std::ios::binary);
  write_jsonl(out, records);
  std::cout << "wrote " << records.size() << " records";
  if (!ent.skipped.empty())
    std::cout << " (skipped: " << ent.skipped.front().no_within << " without within partner, "
              << ent.skipped.front().no_across << " without across partner)";
  std::cout << '\n';
  return 0;
}

int cmd_stats(const Common& c) {
  const auto cfg = resolve_config(c);
  const fs::path dir(c.corpus);
  const auto jsonl = dir / "entrain.jsonl";
  std::ifstream in(jsonl);
  if (!in) throw InputError(jsonl.string() + ": cannot open file");
  const auto records = filter_condition(read_jsonl(in, jsonl.string()), cfg.condition);
  std::vector<DialogActSegment> segments;
  if (fs::exists(dir / "features.tsv")) segments = io::read_feature_table(dir / "features.tsv").segments;
  else if (fs::exists(dir / "da.tsv")) segments = io::read_da_tier(dir / "da.tsv");
  else throw InputError((dir / "da.tsv").string() + ": missing dialog-act tier");
  const auto stats = run_stats(records, segments, cfg);
  write_signs(fs::path(c.out) / "signs.tsv", stats.signs);
  write_proportions(fs::path(c.out) / "proportions.tsv", stats.proportions);
  write_group_tests(fs::path(c.out) / "group_tests.tsv", stats.group_tests, cfg.n_perm);
  std::cout << "wrote " << stats.signs.size() << " sign cells\n";
  return 0;
}

int cmd_synth(const Common& c, const std::string& mode) {
  SynthScenario sc;
  if (!c.config.empty()) {
    std::string text;
    try {
      text = io::read_text(c.config);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
    try {
      sc = scenario_from_json(text);
    } catch (const ConfigError& e) {
      throw ConfigError(c.config + ": " + e.what());
    }
  }
  if (c.seed) sc.seed = *c.seed;
  if (mode == "contour") sc.mode = SynthMode::contour;
  else if (mode == "features") sc.mode = SynthMode::features;
  else if (!mode.empty()) throw ConfigError("field '--mode': expected features or contour");
  const auto corpus = generate_corpus(sc);
  write_corpus(c.out, corpus);
  std::cout << "generated " << corpus.segments.size() << " segments\n";
  return 0;
}

int cmd_plot(const Common& c, const std::string& da, const std::string& set, const std::string& measure) {
  const fs::path jsonl = fs::path(c.corpus) / "entrain.jsonl";
  std::ifstream in(jsonl);
  if (!in) throw InputError(jsonl.string() + ": cannot open file");
  const auto records = read_jsonl(in, jsonl.string());
  ProfilePlotSpec spec;
  try {
    spec.label = parse_label(da);
  } catch (const Error& e) {
    throw ConfigError(std::string("field '--da': ") + e.what());
  }
  try {
    spec.set = parse_feature_set(set);
  } catch (const Error& e) {
    throw ConfigError(std::string("field '--set': ") + e.what());
  }
  if (measure != "convergence" && measure != "synchrony")
    throw ConfigError("field '--measure': expected convergence or synchrony");
  spec.measure = measure == "convergence" ? Measure::convergence : Measure::synchrony;
  const auto cond = c.condition.empty() ? ConditionFilter::both : parse_condition_filter(c.condition);
  if (cond != ConditionFilter::both)
    spec.condition = cond == ConditionFilter::coop ? Condition::cooperative : Condition::competitive;
  std::string svg;
  try {
    svg = plot_profiles(records, spec);
  } catch (const Error& e) {
    throw InputError(jsonl.string() + ": " + e.what() + " for " + da + "/" + set + "/" + measure);
  }
  fs::path out(c.out);
  if (out.extension() != ".svg") out /= "profile_" + da + "_" + set + "_" + measure + ".svg";
  io::write_text(out, svg);
  std::cout << out.string() << '\n';
  return 0;
}

int cmd_run(const Common& c) {
  const auto cfg = resolve_config(c);
  const auto corpus = resolve_corpus(c);
  const auto s = run_pipeline(corpus, cfg, c.out);
  std::cout << "segments " << s.segments << ", records " << s.records << ", skipped " << s.skipped.no_within
            << " without within partner, " << s.skipped.no_across << " without across partner"
            << (s.feature_mode ? " (feature table input)" : "") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prosodic entrainment pipeline"};
  app.require_subcommand(1);
  std::map<std::string, Common> opts;
  auto* extract = app.add_subcommand("extract", "f0 and energy tracks from corpus audio");
  add_common(extract, opts["extract"]);
  auto* detect = app.add_subcommand("detect", "syllable nuclei, phrase boundaries and accents");
  add_common(detect, opts["detect"]);
  auto* features = app.add_subcommand("features", "feature table per dialog act");
  add_common(features, opts["features"]);
  auto* entrain = app.add_subcommand("entrain", "pair sampling and distance records");
  add_common(entrain, opts["entrain"]);
  auto* stats = app.add_subcommand("stats", "sign grid, proportions and group tests from entrain.jsonl");
  add_common(stats, opts["stats"]);
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus (--config takes a scenario)");
  add_common(synth, opts["synth"], false);
  std::string mode;
  synth->add_option("--mode", mode, "features or contour (overrides the scenario)");
  auto* plot = app.add_subcommand("plot", "SVG entrainment profile of one cell");
  add_common(plot, opts["plot"]);
  std::string da = "EX", set = "IP", measure = "convergence";
  plot->add_option("--da", da, "dialog act label");
  plot->add_option("--set", set, "feature set");
  plot->add_option("--measure", measure, "convergence or synchrony");
  auto* run = app.add_subcommand("run", "all stages");
  add_common(run, opts["run"], false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  try {
    if (*extract) return cmd_extract(opts["extract"]);
    if (*detect) return cmd_detect(opts["detect"]);
    if (*features) return cmd_features(opts["features"]);
    if (*entrain) return cmd_entrain(opts["entrain"]);
    if (*stats) return cmd_stats(opts["stats"]);
    if (*synth) return cmd_synth(opts["synth"], mode);
    if (*plot) return cmd_plot(opts["plot"], da, set, measure);
    if (*run) return cmd_run(opts["run"]);
  } catch (const ConfigError& e) {
    std::cerr << "prosent: config error: " << e.what() << '\n';
    return 3;
  } catch (const InputError& e) {
    std::cerr << "prosent: input error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "prosent: error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "prosent: input error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
