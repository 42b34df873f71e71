#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prosody/error.hpp"
#include "prosody/pipeline.hpp"
#include "prosody/structure.hpp"
#include "prosody/synth.hpp"

using namespace prosody;

namespace {

AudioBuffer bursts(std::initializer_list<double> centres, double width = 0.15, double secs = 1.5, double gain = 0.5) {
  AudioBuffer a;
  a.sample_rate = 16000.0;
  a.samples.assign(static_cast<std::size_t>(secs * a.sample_rate), 0.0);
  for (double c : centres)
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      const double t = static_cast<double>(i) / a.sample_rate;
      if (std::fabs(t - c) > 0.5 * width) continue;
      const double env = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (t - c) / width);
      a.samples[i] += gain * env * std::sin(2.0 * std::numbers::pi * 800.0 * t);
    }
  return a;
}

WordSegment word(double s, double e) {
  WordSegment w;
  w.start = s;
  w.end = e;
  return w;
}

double f1(const std::vector<double>& truth, const std::vector<double>& found, double tol) {
  std::vector<bool> used(truth.size(), false);
  std::size_t tp = 0;
  for (double f : found)
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (!used[i] && std::fabs(truth[i] - f) <= tol) {
        used[i] = true;
        ++tp;
        break;
      }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(truth.size() + found.size());
}

}  // namespace

TEST_SUITE("structure") {

TEST_CASE("nuclei in silence and bursts") {
  AudioBuffer quiet;
  quiet.samples.assign(16000, 0.0);
  CHECK(detect_syllable_nuclei(quiet).empty());

  const auto one = detect_syllable_nuclei(bursts({0.6}));
  REQUIRE(one.size() == 1);
  CHECK(std::fabs(one[0] - 0.6) <= 0.075);

  const auto two = detect_syllable_nuclei(bursts({0.4, 0.8}));
  REQUIRE(two.size() == 2);
  CHECK(std::fabs((two[1] - two[0]) - 0.4) <= 0.05);
}

TEST_CASE("nuclei ignore global gain") {
  const auto a = detect_syllable_nuclei(bursts({0.3, 0.7, 1.1}, 0.15, 1.5, 0.5));
  const auto b = detect_syllable_nuclei(bursts({0.3, 0.7, 1.1}, 0.15, 1.5, 0.05));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("pause marking") {
  std::vector<WordSegment> w{word(0.0, 0.4), word(0.45, 0.9), word(1.5, 2.0)};
  mark_pauses(w);
  CHECK_FALSE(w[0].pause_followed);
  CHECK(w[1].pause_followed);
  CHECK(w[2].pause_followed);
}

TEST_CASE("centroid bootstrap") {
  const std::vector<std::vector<double>> rows{{0, 1}, {0.2, 1.1}, {3, 1}, {3.2, 0.9}, {1.5, 1}};
  const auto m = bootstrap_centroids(rows, {0, 0, 1, 1, -1}, {"a", "b"});
  double sum = 0.0;
  for (double w : m.weights) {
    CHECK(w >= 0.0);
    sum += w;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.centroid_pos.size() == 2);
  CHECK(m.margin(rows[2]) > 0.0);
  CHECK(m.margin(rows[0]) < 0.0);
  CHECK_THROWS_WITH_AS(bootstrap_centroids(rows, {1, 1, 1, -1, -1}, {"a", "b"}), "cannot bootstrap", Error);
}

TEST_CASE("pause-preceding edges are boundaries") {
  std::vector<WordSegment> words;
  for (int i = 0; i < 5; ++i) words.push_back(word(0.4 * i, 0.4 * i + 0.4));
  for (int i = 0; i < 5; ++i) words.push_back(word(2.6 + 0.4 * i, 3.0 + 0.4 * i));
  mark_pauses(words);
  std::vector<double> v(480);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(i) / 100.0;
    v[i] = t < 2.3 ? 8.0 - t : 10.0 - (t - 2.6);
  }
  auto f0 = SampledTrack::from_values(v);
  std::vector<double> nuclei;
  for (const auto& w : words) nuclei.push_back(0.5 * (w.start + w.end));
  const auto r = detect_phrase_boundaries(words, f0, nuclei);
  CHECK(std::find(r.boundaries.begin(), r.boundaries.end(), 2.0) != r.boundaries.end());
  // the edge 400 ms before the pause starts out negative and stays out
  CHECK(std::find(r.boundaries.begin(), r.boundaries.end(), 1.6) == r.boundaries.end());
  for (std::size_t i = 1; i < r.boundaries.size(); ++i) CHECK(r.boundaries[i] - r.boundaries[i - 1] >= 1.0);
  CHECK(pause_boundaries(words) == std::vector<double>{2.0, 4.6});
}

TEST_CASE("planted boundaries and peaked accents are recovered") {
  SynthScenario sc;
  sc.mode = SynthMode::contour;
  sc.n_dialogs = 2;
  sc.n_segments_per_dialog = 40;
  sc.seed = 3;
  sc.accent_poly = {4.0, 0.0, -4.0, 0.0};
  sc.accent_poly_sd = 0.0;
  const auto corpus = generate_corpus(sc);
  const PipelineConfig cfg;
  double bf = 0.0, af = 0.0;
  for (const auto& ch : corpus.channels) {
    const auto a = analyze_channel(ch.audio, ch.f0_hz, ch.words, cfg);
    bf += f1(ch.boundaries, a.structure.phrase_boundaries, 0.01);
    af += f1(ch.accents, a.structure.accents, 0.04);
    CHECK(std::is_sorted(a.structure.accents.begin(), a.structure.accents.end()));
    for (double t : a.structure.accents)
      CHECK(std::find(a.structure.nuclei.begin(), a.structure.nuclei.end(), t) != a.structure.nuclei.end());
  }
  const auto n = static_cast<double>(corpus.channels.size());
  CHECK(bf / n >= 0.8);
  CHECK(af / n >= 0.8);
}

}  // TEST_SUITE
