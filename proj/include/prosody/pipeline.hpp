#pragma once

// Corpus-level orchestration: loading tiers and tracks, per-channel prosodic
// analysis, the feature table, entrainment draws, statistics and the output
// bundle with its run manifest.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prosody/dialacts.hpp"
#include "prosody/entrain.hpp"
#include "prosody/features.hpp"
#include "prosody/signal.hpp"
#include "prosody/stats.hpp"
#include "prosody/structure.hpp"

namespace prosody {

inline constexpr const char* kVersion = "0.1.0";

enum class ConditionFilter : std::uint8_t { both, coop, comp };
ConditionFilter parse_condition_filter(std::string_view s);
std::string_view to_string(ConditionFilter c);

struct PipelineConfig {
  F0Config f0;
  double outlier_k = 2.0;
  EnergyConfig energy;
  NucleusConfig nuclei;
  double pause_threshold = 0.2;
  BoundaryConfig boundary;
  AccentConfig accent;
  StylizeConfig stylize;
  DctConfig dct;

  std::uint64_t seed = 1;
  int n_resamples = 10;
  double alpha = 0.05;
  ConditionFilter condition = ConditionFilter::both;
  bool condition_matched = true;
  bool frozen_groupings = false;
  bool per_feature = false;
  int n_perm = 10000;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::string to_json() const;
  /// Accepts a config object or a run manifest holding one under "config".
  static PipelineConfig from_json(const std::string& text);
};

PipelineConfig load_config(const std::filesystem::path& path);

struct CorpusFiles {
  std::filesystem::path root;
  std::vector<DialogActSegment> segments;
  std::optional<FeatureTable> features;  // precomputed table: detector stages are skipped
  std::vector<WordSegment> words;
  std::vector<std::filesystem::path> inputs;  // every file read, for digests
};

/// Reads da.tsv and either features.tsv or words.tsv (plus f0/ and audio/ on demand).
CorpusFiles load_corpus(const std::filesystem::path& dir);

struct ChannelAnalysis {
  std::string dialog_id;
  std::string speaker_id;
  ProsodicStructure structure;
  ChannelProsody prosody;
  bool boundary_fallback = false;
  bool accent_fallback = false;
  double semitone_base_hz = 0.0;
};

/// Either input may be missing; f0 is extracted from audio when no track is
/// given, and nuclei fall back to the words' stress marks without audio.
ChannelAnalysis analyze_channel(const std::optional<AudioBuffer>& audio, const std::optional<SampledTrack>& f0_hz,
                                std::vector<WordSegment> words, const PipelineConfig& cfg);

/// Analyses every (dialog, speaker) channel of a corpus with word and track data.
std::vector<ChannelAnalysis> analyze_corpus(CorpusFiles& corpus, const PipelineConfig& cfg);

FeatureTable build_feature_table(const std::vector<DialogActSegment>& segments,
                                 const std::vector<ChannelAnalysis>& channels, const PipelineConfig& cfg);

struct EntrainmentResult {
  std::vector<EntrainmentRecord> records;  // all draws
  std::vector<SkipCounts> skipped;         // per draw
};

EntrainmentResult run_entrainment(const FeatureTable& table, const PipelineConfig& cfg);

struct GroupTestRow {
  std::string dimension;
  std::string level;  // level coded 1; the other level is coded 0
  Condition condition = Condition::cooperative;
  FeatureSet set = FeatureSet::GEN;
  Measure measure = Measure::convergence;
  bool available = false;
  GroupTestResult result;
  double mean_level = 0.0;
  double mean_other = 0.0;
};

struct StatsResult {
  std::vector<SignSummary> signs;
  std::vector<ProportionRow> proportions;
  std::vector<GroupTestRow> group_tests;
};

/// Groupings come from `segments`; records refer to them by segment id.
StatsResult run_stats(const std::vector<EntrainmentRecord>& records,
                      const std::vector<DialogActSegment>& segments, const PipelineConfig& cfg);

void write_signs(const std::filesystem::path& path, const std::vector<SignSummary>& signs);
void write_proportions(const std::filesystem::path& path, const std::vector<ProportionRow>& rows);
void write_group_tests(const std::filesystem::path& path, const std::vector<GroupTestRow>& rows, int n_perm);

/// Records restricted to the configured condition.
std::vector<EntrainmentRecord> filter_condition(std::vector<EntrainmentRecord> records, ConditionFilter c);

struct RunSummary {
  std::size_t segments = 0;
  std::size_t records = 0;
  std::size_t channels = 0;
  SkipCounts skipped;  // first draw
  bool feature_mode = false;
};

/// Full pipeline; writes features.tsv, entrain.jsonl, signs.tsv,
/// proportions.tsv, group_tests.tsv and run_manifest.json into out_dir.
RunSummary run_pipeline(const std::filesystem::path& corpus_dir, const PipelineConfig& cfg,
                        const std::filesystem::path& out_dir);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace prosody
