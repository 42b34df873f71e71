#pragma once

// Synthetic dialog corpora with planted entrainment. Feature mode draws the
// feature table directly; contour mode renders per-speaker f0 tracks, audio
// and word tiers with known phrase boundaries and accents.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prosody/dialacts.hpp"
#include "prosody/entrain.hpp"
#include "prosody/signal.hpp"
#include "prosody/structure.hpp"
#include "prosody/stylize.hpp"

namespace prosody {

enum class SynthMode : std::uint8_t { features, contour };

struct SynthScenario {
  SynthMode mode = SynthMode::features;
  int n_dialogs = 10;
  int n_segments_per_dialog = 200;
  std::map<DaLabel, double> da_distribution;  // empty: uniform over all 12 labels
  /// rho > 0 ties same-label acts of a dialog to a shared latent value, rho < 0
  /// ties them with opposite signs for the two speakers, 0 leaves them independent.
  std::map<DaLabel, double> coupling;
  double noise_sd = 1.0;
  double speaker_sd = 0.2;
  std::uint64_t seed = 1;
  std::optional<Condition> condition;  // empty: dialogs alternate, cooperative first

  // contour mode
  double audio_rate = 8000.0;
  AccentPoly accent_poly{-0.5, 0.3, 1.5, -0.2};
  double accent_poly_sd = 0.08;
  int calibration_rounds = 30;

  /// Throws ConfigError on invalid values.
  void validate() const;
  double rho(DaLabel l) const;
};

std::string scenario_to_json(const SynthScenario& s);
/// Missing keys keep their defaults. Throws ConfigError naming the bad field.
SynthScenario scenario_from_json(const std::string& text);

struct SynthChannel {
  std::string dialog_id;
  std::string speaker_id;
  AudioBuffer audio;
  SampledTrack f0_hz;
  std::vector<WordSegment> words;
  std::vector<double> nuclei;
  std::vector<double> boundaries;
  std::vector<double> accents;
  std::vector<AccentPoly> accent_polys;  // planted shape per accent
};

struct SynthCorpus {
  SynthScenario scenario;
  std::vector<DialogActSegment> segments;
  std::optional<FeatureTable> features;  // feature mode
  std::vector<SynthChannel> channels;    // contour mode
};

SynthCorpus generate_corpus(const SynthScenario& scenario);

/// da.tsv plus features.tsv (feature mode) or words.tsv, f0/ and audio/
/// (contour mode), and truth.json.
void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

/// Channel file stem, "<dialog>_<speaker>".
std::string channel_stem(const std::string& dialog_id, const std::string& speaker_id);

}  // namespace prosody
