#include "prosody/dialacts.hpp"

#include <algorithm>
#include <tuple>

#include "prosody/error.hpp"
#include "prosody/signal.hpp"

namespace prosody {
namespace {

constexpr std::array<std::string_view, 12> kNames{"AC", "AL", "CH", "CL", "EX", "IN",
                                                  "QW", "QY", "RE", "RN", "RW", "RY"};

// authority, support, frequency on the reference corpus
constexpr std::array<LabelTraits, 12> kTraits{{
    {false, true, true},    // AC acknowledgment
    {false, true, false},   // AL alignment
    {false, false, true},   // CH check
    {true, true, false},    // CL clarify
    {true, true, true},     // EX explain
    {true, false, false},   // IN instruct
    {false, false, false},  // QW wh-question
    {false, false, true},   // QY yes-no question
    {false, false, true},   // RE ready
    {true, true, false},    // RN reply-no
    {true, true, false},    // RW reply-w
    {true, true, true},     // RY reply-yes
}};

}  // namespace

std::string_view to_string(DaLabel l) { return kNames[static_cast<std::size_t>(l)]; }

DaLabel parse_label(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == s) return kAllLabels[i];
  throw InputError("label outside inventory: '" + std::string(s) + "'");
}

std::string_view to_string(Condition c) { return c == Condition::cooperative ? "coop" : "comp"; }

Condition parse_condition(std::string_view s) {
  if (s == "coop" || s == "cooperative") return Condition::cooperative;
  if (s == "comp" || s == "competitive") return Condition::competitive;
  throw InputError("unknown dialog condition '" + std::string(s) + "'");
}

LabelTraits label_traits(DaLabel l) { return kTraits[static_cast<std::size_t>(l)]; }

void assign_dialog_indices(std::vector<DialogActSegment>& segments) {
  for (const auto& s : segments)
    if (!(s.start < s.end))
      throw InputError("dialog act in " + s.dialog_id + " has start >= end (" + std::to_string(s.start) + ")");
  std::stable_sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    return std::tie(a.dialog_id, a.start, a.speaker_id) < std::tie(b.dialog_id, b.start, b.speaker_id);
  });
  int idx = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i == 0 || segments[i].dialog_id != segments[i - 1].dialog_id) idx = 0;
    segments[i].index_in_dialog = idx++;
  }
}

DaProbabilities compute_da_probs(const std::vector<DialogActSegment>& segments) {
  DaProbabilities p;
  if (segments.empty()) return p;
  std::map<DaLabel, std::size_t> counts;
  std::map<DaLabel, std::size_t> context_counts;
  std::map<std::pair<DaLabel, DaLabel>, std::size_t> pair_counts;

  // Predecessor = the segment with index_in_dialog - 1 in the same dialog.
  std::map<std::pair<std::string, int>, DaLabel> by_position;
  for (const auto& s : segments) by_position[{s.dialog_id, s.index_in_dialog}] = s.label;

  p.previous.reserve(segments.size());
  for (const auto& s : segments) {
    ++counts[s.label];
    auto it = by_position.find({s.dialog_id, s.index_in_dialog - 1});
    if (s.index_in_dialog > 0 && it != by_position.end()) {
      p.previous.emplace_back(it->second);
      ++context_counts[it->second];
      ++pair_counts[{it->second, s.label}];
    } else {
      p.previous.emplace_back(std::nullopt);
    }
  }
  const auto total = static_cast<double>(segments.size());
  for (const auto& [label, c] : counts) p.unigram[label] = static_cast<double>(c) / total;
  for (const auto& [key, c] : pair_counts)
    p.bigram[key] = static_cast<double>(c) / static_cast<double>(context_counts[key.first]);
  return p;
}

std::vector<DaLabel> high_frequency_labels(const std::map<DaLabel, double>& unigram) {
  std::vector<double> probs;
  for (DaLabel l : kAllLabels) {
    auto it = unigram.find(l);
    probs.push_back(it == unigram.end() ? 0.0 : it->second);
  }
  const double med = median(probs);
  std::vector<DaLabel> out;
  for (std::size_t i = 0; i < kAllLabels.size(); ++i)
    if (probs[i] > med) out.push_back(kAllLabels[i]);
  return out;
}

std::vector<DaGrouping> assign_groupings(const std::vector<DialogActSegment>& segments,
                                         const DaProbabilities& probs, bool frozen_frequency) {
  if (probs.previous.size() != segments.size())
    throw Error("probabilities were computed on a different segment list");
  const auto high_freq = high_frequency_labels(probs.unigram);

  std::vector<double> occurrence_probs;
  std::vector<std::optional<double>> per_segment(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!probs.previous[i]) continue;
    const double bp = probs.bigram.at({*probs.previous[i], segments[i].label});
    per_segment[i] = bp;
    occurrence_probs.push_back(bp);
  }
  const double bigram_median = occurrence_probs.empty() ? 0.0 : median(occurrence_probs);

  std::vector<DaGrouping> out(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto traits = label_traits(segments[i].label);
    auto& g = out[i];
    g.high_authority = traits.high_authority;
    g.supportive = traits.supportive;
    g.high_frequency = frozen_frequency
                           ? traits.table_frequency_high
                           : std::find(high_freq.begin(), high_freq.end(), segments[i].label) != high_freq.end();
    if (per_segment[i]) g.high_predictability = *per_segment[i] > bigram_median;
  }
  return out;
}

}  // namespace prosody
