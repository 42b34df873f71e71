#pragma once

// Dialog-act inventory, the fixed authority/support grouping, and the
// corpus-derived frequency and local-predictability splits.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prosody {

enum class DaLabel : std::uint8_t { AC, AL, CH, CL, EX, IN, QW, QY, RE, RN, RW, RY };

inline constexpr std::array<DaLabel, 12> kAllLabels{DaLabel::AC, DaLabel::AL, DaLabel::CH, DaLabel::CL,
                                                    DaLabel::EX, DaLabel::IN, DaLabel::QW, DaLabel::QY,
                                                    DaLabel::RE, DaLabel::RN, DaLabel::RW, DaLabel::RY};

std::string_view to_string(DaLabel l);
/// Throws InputError("label outside inventory") for unknown tags.
DaLabel parse_label(std::string_view s);

enum class Condition : std::uint8_t { cooperative, competitive };
std::string_view to_string(Condition c);
/// Accepts "coop"/"cooperative" and "comp"/"competitive".
Condition parse_condition(std::string_view s);

struct DialogActSegment {
  std::string dialog_id;
  std::string speaker_id;
  DaLabel label = DaLabel::AC;
  double start = 0.0;
  double end = 0.0;
  Condition condition = Condition::cooperative;
  int index_in_dialog = 0;

  std::string id() const { return dialog_id + "#" + std::to_string(index_in_dialog); }
};

/// Sorts by (dialog, start, speaker) and numbers segments 0.. within each dialog.
/// Throws InputError when a segment has start >= end.
void assign_dialog_indices(std::vector<DialogActSegment>& segments);

/// Fixed per-label properties. `table_frequency_high` is the frequency column
/// of the fixed label table, used with frozen groupings.
struct LabelTraits {
  bool high_authority;
  bool supportive;
  bool table_frequency_high;
};
LabelTraits label_traits(DaLabel l);

struct DaProbabilities {
  std::map<DaLabel, double> unigram;
  std::map<std::pair<DaLabel, DaLabel>, double> bigram;  // (previous, current) -> P(current | previous)
  /// Per segment (same order as the input): the preceding label in its dialog,
  /// empty for dialog-initial segments.
  std::vector<std::optional<DaLabel>> previous;
};

/// Maximum-likelihood unigram and bigram probabilities. Segments must carry
/// dialog indices (see assign_dialog_indices).
DaProbabilities compute_da_probs(const std::vector<DialogActSegment>& segments);

struct DaGrouping {
  bool high_authority = false;
  bool supportive = false;
  bool high_frequency = false;
  /// Empty for dialog-initial occurrences, which have no bigram context.
  std::optional<bool> high_predictability;
};

/// Labels whose unigram probability is strictly above the median of all 12
/// label probabilities (absent labels count as probability 0).
std::vector<DaLabel> high_frequency_labels(const std::map<DaLabel, double>& unigram);

std::vector<DaGrouping> assign_groupings(const std::vector<DialogActSegment>& segments,
                                         const DaProbabilities& probs, bool frozen_frequency = false);

}  // namespace prosody
