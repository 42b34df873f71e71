#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "prosody/io.hpp"

namespace fs = std::filesystem;

namespace {

int prosent(const std::string& args) {
  const std::string cmd = std::string(PROSENT_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "prosody_unit" / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  const auto corpus = scratch("cli_corpus");
  const auto scen = scratch("cli_scen") / "s.json";
  prosody::io::write_text(scen, "{\"n_dialogs\": 3, \"n_segments_per_dialog\": 30}");
  CHECK(prosent("synth --config " + scen.string() + " --out " + corpus.string()) == 0);
  CHECK(fs::exists(corpus / "features.tsv"));

  const auto out = scratch("cli_out");
  CHECK(prosent("run --corpus " + corpus.string() + " --out " + out.string() + " --resamples 2 --seed 5") == 0);
  CHECK(fs::exists(out / "run_manifest.json"));
  CHECK(prosent("plot --corpus " + out.string() + " --out " + (out / "ex.svg").string() + " --da AL --set GEN") ==
        0);

  CHECK(prosent("run --corpus " + (corpus / "nope").string() + " --out " + out.string()) == 2);
  CHECK(prosent("run --corpus " + corpus.string() + " --out " + out.string() + " --alpha 3") == 3);
  CHECK(prosent("run --corpus " + corpus.string() + " --out " + out.string() + " --condition sideways") == 3);
  const auto bad = scratch("cli_bad") / "c.json";
  prosody::io::write_text(bad, "{\"stats\": {\"resamples\": 1}}");
  CHECK(prosent("run --corpus " + corpus.string() + " --out " + out.string() + " --config " + bad.string()) == 3);
  CHECK(prosent("frobnicate") == 3);
}

TEST_CASE("stages chain through files") {
  const auto corpus = scratch("cli_stage_corpus");
  const auto scen = scratch("cli_stage_scen") / "s.json";
  prosody::io::write_text(scen, "{\"n_dialogs\": 3, \"n_segments_per_dialog\": 30}");
  REQUIRE(prosent("synth --config " + scen.string() + " --out " + corpus.string()) == 0);
  CHECK(prosent("entrain --corpus " + corpus.string() + " --out " + corpus.string() + " --resamples 2") == 0);
  CHECK(fs::exists(corpus / "entrain.jsonl"));
  const auto out = scratch("cli_stage_out");
  CHECK(prosent("stats --corpus " + corpus.string() + " --out " + out.string() + " --per-feature") == 0);
  CHECK(fs::exists(out / "signs.tsv"));
}

}  // TEST_SUITE
