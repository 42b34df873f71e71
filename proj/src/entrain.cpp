#include "prosody/entrain.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "prosody/error.hpp"

namespace prosody {

std::optional<std::size_t> FeatureTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

bool FeatureTable::has(std::size_t seg, std::size_t col) const { return !std::isnan(values[seg][col]); }

std::string_view to_string(Measure m) { return m == Measure::convergence ? "convergence" : "synchrony"; }

std::optional<double> SpeakerMeans::get(const DialogActSegment& s, std::size_t col, int min_count) const {
  const auto key = std::make_pair(s.speaker_id, s.dialog_id);
  const auto it = count.find(key);
  if (it == count.end() || it->second[col] < min_count) return std::nullopt;
  return mean.at(key)[col];
}

SpeakerMeans speaker_means(const FeatureTable& table) {
  SpeakerMeans m;
  const std::size_t nc = table.columns.size();
  for (std::size_t i = 0; i < table.segments.size(); ++i) {
    const auto key = std::make_pair(table.segments[i].speaker_id, table.segments[i].dialog_id);
    auto& sum = m.mean.try_emplace(key, nc, 0.0).first->second;
    auto& cnt = m.count.try_emplace(key, nc, 0).first->second;
    for (std::size_t c = 0; c < nc; ++c) {
      if (!table.has(i, c)) continue;
      sum[c] += table.values[i][c];
      ++cnt[c];
    }
  }
  for (auto& [key, sum] : m.mean) {
    const auto& cnt = m.count[key];
    for (std::size_t c = 0; c < nc; ++c) sum[c] = cnt[c] > 0 ? sum[c] / cnt[c] : std::nan("");
  }
  return m;
}

double convergence_distance(double xa, double xb) { return std::fabs(xa - xb); }

double synchrony_distance(double xa, double xb, double mean_a, double mean_b) {
  return std::fabs((xa - mean_a) - (xb - mean_b));
}

double delta_d(double d_s, double d_d) { return d_s - d_d; }

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer
  std::uint64_t z = base ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<SegmentPair> PairSample::pairs() const {
  std::vector<SegmentPair> out;
  for (std::size_t i = 0; i < within.size(); ++i) {
    if (within[i]) out.push_back({i, *within[i], PairKind::within});
    if (across[i]) out.push_back({i, *across[i], PairKind::across});
  }
  return out;
}

PairSample sample_pairs(const std::vector<DialogActSegment>& segments, std::uint64_t seed,
                        const PairingOptions& opts) {
  std::map<std::string, std::size_t> speaker_index;
  for (const auto& s : segments) speaker_index.try_emplace(s.speaker_id, speaker_index.size());
  std::vector<std::set<std::string>> dialogs_of(speaker_index.size());
  std::vector<std::size_t> spk(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    spk[i] = speaker_index[segments[i].speaker_id];
    dialogs_of[spk[i]].insert(segments[i].dialog_id);
  }
  // speakers sharing any dialog, the speaker itself included
  const std::size_t ns = speaker_index.size();
  std::vector<char> related(ns * ns, 0);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < ns; ++b)
      related[a * ns + b] = a == b || std::any_of(dialogs_of[a].begin(), dialogs_of[a].end(),
                                                  [&](const std::string& d) { return dialogs_of[b].count(d) > 0; });

  std::map<DaLabel, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < segments.size(); ++i) by_label[segments[i].label].push_back(i);

  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::size_t>& cands) -> std::optional<std::size_t> {
    if (cands.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> u(0, cands.size() - 1);
    return cands[u(rng)];
  };

  PairSample out;
  out.within.resize(segments.size());
  out.across.resize(segments.size());
  std::vector<std::size_t> cands;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& t = segments[i];
    const auto& same = by_label[t.label];
    cands.clear();
    for (std::size_t j : same) {
      const auto& p = segments[j];
      if (p.dialog_id == t.dialog_id && p.speaker_id != t.speaker_id && p.index_in_dialog < t.index_in_dialog)
        cands.push_back(j);
    }
    out.within[i] = pick(cands);
    cands.clear();
    for (std::size_t j : same) {
      const auto& p = segments[j];
      if (p.dialog_id == t.dialog_id) continue;
      if (opts.condition_matched && p.condition != t.condition) continue;
      if (related[spk[i] * ns + spk[j]]) continue;
      cands.push_back(j);
    }
    out.across[i] = pick(cands);
    if (!out.within[i]) ++out.skipped.no_within;
    if (!out.across[i]) ++out.skipped.no_across;
  }
  return out;
}

std::vector<PairSample> sample_pairs(const std::vector<DialogActSegment>& segments, std::uint64_t seed,
                                     int n_resamples, const PairingOptions& opts) {
  std::vector<PairSample> out;
  for (int r = 0; r < n_resamples; ++r)
    out.push_back(sample_pairs(segments, derive_seed(seed, "pairs/" + std::to_string(r)), opts));
  return out;
}

std::vector<EntrainmentRecord> compute_records(const FeatureTable& table, const PairSample& sample,
                                               const SpeakerMeans& means, int resample) {
  std::vector<EntrainmentRecord> out;
  const auto& segs = table.segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!sample.within[i] || !sample.across[i]) continue;
    const std::size_t w = *sample.within[i];
    const std::size_t a = *sample.across[i];
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (!table.has(i, c) || !table.has(w, c) || !table.has(a, c)) continue;
      const double x = table.values[i][c];
      const double xw = table.values[w][c];
      const double xa = table.values[a][c];
      EntrainmentRecord r;
      r.segment = i;
      r.segment_id = segs[i].id();
      r.dialog_id = segs[i].dialog_id;
      r.speaker_id = segs[i].speaker_id;
      r.label = segs[i].label;
      r.condition = segs[i].condition;
      r.feature = table.columns[c];
      r.resample = resample;

      r.measure = Measure::convergence;
      r.d_s = convergence_distance(x, xw);
      r.d_d = convergence_distance(x, xa);
      r.d = delta_d(r.d_s, r.d_d);
      out.push_back(r);

      const auto m = means.get(segs[i], c);
      const auto mw = means.get(segs[w], c);
      const auto ma = means.get(segs[a], c);
      if (!m || !mw || !ma) continue;
      r.measure = Measure::synchrony;
      r.d_s = synchrony_distance(x, xw, *m, *mw);
      r.d_d = synchrony_distance(x, xa, *m, *ma);
      r.d = delta_d(r.d_s, r.d_d);
      out.push_back(r);
    }
  }
  return out;
}

void write_jsonl(std::ostream& os, const std::vector<EntrainmentRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["segment"] = r.segment_id;
    j["dialog"] = r.dialog_id;
    j["speaker"] = r.speaker_id;
    j["da"] = to_string(r.label);
    j["condition"] = to_string(r.condition);
    j["feature"] = r.feature;
    j["measure"] = to_string(r.measure);
    j["d_s"] = r.d_s;
    j["d_d"] = r.d_d;
    j["d"] = r.d;
    j["resample"] = r.resample;
    os << j.dump() << '\n';
  }
}

std::vector<EntrainmentRecord> read_jsonl(std::istream& is, const std::string& source) {
  std::vector<EntrainmentRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EntrainmentRecord r;
      r.segment_id = j.at("segment").get<std::string>();
      r.dialog_id = j.at("dialog").get<std::string>();
      r.speaker_id = j.at("speaker").get<std::string>();
      r.label = parse_label(j.at("da").get<std::string>());
      r.condition = parse_condition(j.at("condition").get<std::string>());
      r.feature = j.at("feature").get<std::string>();
      const auto m = j.at("measure").get<std::string>();
      if (m != "convergence" && m != "synchrony") throw InputError("field 'measure': unknown value '" + m + "'");
      r.measure = m == "convergence" ? Measure::convergence : Measure::synchrony;
      r.d_s = j.at("d_s").get<double>();
      r.d_d = j.at("d_d").get<double>();
      r.d = j.at("d").get<double>();
      r.resample = j.value("resample", 0);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw InputError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace prosody
