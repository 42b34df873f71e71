#pragma once

// File formats: 16-bit PCM WAV, two-column f0 tracks, whitespace/tab
// separated dialog-act and word tiers, and the feature table. Parse errors
// are InputError with "file:line: field 'name': ..." messages.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prosody/dialacts.hpp"
#include "prosody/entrain.hpp"
#include "prosody/features.hpp"
#include "prosody/signal.hpp"
#include "prosody/structure.hpp"

namespace prosody::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal representation; "NA" for NaN.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& where, const std::string& field);

AudioBuffer read_wav(const fs::path& path);
void write_wav(const fs::path& path, const AudioBuffer& audio);

/// `time_sec f0_hz` per line; f0 <= 0 marks unvoiced frames. Times must be uniformly spaced.
SampledTrack read_f0_track(const fs::path& path);
void write_f0_track(const fs::path& path, const SampledTrack& f0_hz);

/// `dialog_id speaker start end da_label condition`; an optional header line
/// starting with "dialog_id" is skipped. Indices are assigned on load.
std::vector<DialogActSegment> read_da_tier(const fs::path& path);
void write_da_tier(const fs::path& path, const std::vector<DialogActSegment>& segs);

/// `dialog_id speaker start end word [stress_nucleus_time]`.
std::vector<WordSegment> read_word_tier(const fs::path& path);
void write_word_tier(const fs::path& path, const std::vector<WordSegment>& words);

/// Columns: dialog_id segment_id speaker da_label condition start end, then
/// one column per feature; NA marks missing values.
void write_feature_table(std::ostream& os, const FeatureTable& table);
void write_feature_table(const fs::path& path, const FeatureTable& table);
FeatureTable read_feature_table(const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace prosody::io
