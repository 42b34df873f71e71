#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "prosody/error.hpp"
#include "prosody/io.hpp"
#include "prosody/pipeline.hpp"
#include "prosody/synth.hpp"

namespace fs = std::filesystem;
using namespace prosody;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "prosody_unit" / name;
  fs::remove_all(p);
  return p;
}

SynthScenario small_features() {
  SynthScenario sc;
  sc.n_dialogs = 4;
  sc.n_segments_per_dialog = 40;
  sc.da_distribution = {{DaLabel::EX, 0.5}, {DaLabel::IN, 0.5}};
  return sc;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults") {
  const PipelineConfig c;
  CHECK(c.stylize.reg.window == 0.05);
  CHECK(c.stylize.reg.step == 0.01);
  CHECK(c.stylize.accent_window == 0.3);
  CHECK(c.boundary.min_phrase == 1.0);
  CHECK(c.accent.long_word == 0.5);
  CHECK(c.accent.short_word == 0.1);
  CHECK(c.alpha == 0.05);
  CHECK(c.dct.cutoff == 10.0);
  CHECK(c.dct.half_band == 1.0);
  CHECK(c.energy.hop == 0.01);
}

TEST_CASE("config round trip") {
  PipelineConfig c;
  c.seed = 77;
  c.n_resamples = 4;
  c.alpha = 0.01;
  c.condition = ConditionFilter::comp;
  c.frozen_groupings = true;
  c.per_feature = true;
  c.accent.energy_window = 0.12;
  c.f0.f_max = 420.0;
  const auto text = c.to_json();
  const auto back = PipelineConfig::from_json(text);
  CHECK(back.to_json() == text);
  CHECK(back.seed == 77);
  CHECK(back.condition == ConditionFilter::comp);
  CHECK(back.accent.energy_window == 0.12);
}

TEST_CASE("config errors name the field") {
  CHECK_THROWS_WITH_AS(PipelineConfig::from_json("{\"stats\": {\"alpha\": 2}}"), doctest::Contains("stats.alpha"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(PipelineConfig::from_json("{\"bogus\": {}}"), doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_condition_filter("neither"), ConfigError);
}

TEST_CASE("feature corpus runs without detectors and replays") {
  const auto corpus = scratch("pipe_corpus");
  write_corpus(corpus, generate_corpus(small_features()));
  PipelineConfig cfg;
  cfg.n_resamples = 2;
  cfg.n_perm = 100;
  const auto out = scratch("pipe_out");
  const auto s = run_pipeline(corpus, cfg, out);
  CHECK(s.feature_mode);
  CHECK(s.channels == 0);
  CHECK(s.segments == 160);
  for (const char* f : {"features.tsv", "entrain.jsonl", "signs.tsv", "proportions.tsv", "group_tests.tsv",
                        "run_manifest.json"})
    CHECK(fs::exists(out / f));
  const auto m = nlohmann::json::parse(io::read_text(out / "run_manifest.json"));
  CHECK(m.at("seed") == 1);
  CHECK(m.at("version") == kVersion);
  CHECK(m.at("inputs").contains("da.tsv"));

  const auto replay = scratch("pipe_replay");
  run_pipeline(corpus, load_config(out / "run_manifest.json"), replay);
  for (const char* f : {"features.tsv", "entrain.jsonl", "signs.tsv", "proportions.tsv", "group_tests.tsv"})
    CHECK(io::read_text(out / f) == io::read_text(replay / f));
}

TEST_CASE("dialogs without across candidates are counted") {
  auto gen = generate_corpus(small_features());
  auto& table = *gen.features;
  // one extra dialog whose labels occur nowhere else
  for (int i = 0; i < 6; ++i) {
    DialogActSegment s;
    s.dialog_id = "zz";
    s.speaker_id = i % 2 ? "zzB" : "zzA";
    s.label = DaLabel::AL;
    s.start = 2.0 * i;
    s.end = s.start + 1.0;
    table.segments.push_back(s);
    table.values.push_back(table.values.front());
  }
  assign_dialog_indices(table.segments);
  const auto corpus = scratch("skip_corpus");
  io::write_da_tier(corpus / "da.tsv", table.segments);
  io::write_feature_table(corpus / "features.tsv", table);
  PipelineConfig cfg;
  cfg.n_resamples = 1;
  cfg.n_perm = 50;
  const auto s = run_pipeline(corpus, cfg, scratch("skip_out"));
  CHECK(s.skipped.no_across >= 6);
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(load_corpus(scratch("missing")), InputError);
  const auto dir = scratch("bad_da");
  fs::create_directories(dir);
  io::write_text(dir / "da.tsv", "d1 A 0 1 XX coop\n");
  io::write_text(dir / "words.tsv", "");
  CHECK_THROWS_WITH_AS(load_corpus(dir), doctest::Contains("da.tsv"), InputError);
}

TEST_CASE("file formats round trip") {
  const auto dir = scratch("io");
  SampledTrack f0 = SampledTrack::from_values({0, 120.5, 121, 0, 130});
  f0.valid = {false, true, true, false, true};
  io::write_f0_track(dir / "a.f0", f0);
  const auto back = io::read_f0_track(dir / "a.f0");
  CHECK(back.valid == f0.valid);
  CHECK(back.values[2] == 121.0);
  CHECK(back.sample_rate == doctest::Approx(100.0));

  AudioBuffer a;
  a.sample_rate = 8000.0;
  for (int i = 0; i < 800; ++i) a.samples.push_back(0.5 * std::sin(0.1 * i));
  io::write_wav(dir / "a.wav", a);
  const auto w = io::read_wav(dir / "a.wav");
  CHECK(w.sample_rate == 8000.0);
  REQUIRE(w.samples.size() == 800);
  CHECK(std::fabs(w.samples[37] - a.samples[37]) < 1e-4);

  CHECK(io::format_double(0.1) == "0.1");
  CHECK_THROWS_WITH_AS(io::parse_double("abc", "x.tsv:3", "start"), doctest::Contains("start"), InputError);
}

}  // TEST_SUITE
