#include "prosody/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <tuple>
#include <sstream>

#include "prosody/error.hpp"

namespace prosody::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text, const std::string& where, const std::string& field) {
  if (text == "NA" || text == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InputError(where + ": field '" + field + "': not a number '" + text + "'");
  return v;
}

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw InputError(path.string() + ": cannot write file");
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t pos) {
  T v{};
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::string where(const fs::path& p, int line) { return p.string() + ":" + std::to_string(line); }

}  // namespace

AudioBuffer read_wav(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw InputError(name + ": field 'header': not a RIFF/WAVE file");
  std::size_t pos = 12;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = read_le<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > buf.size()) throw InputError(name + ": field '" + id + "': chunk truncated");
    if (id == "fmt ") {
      if (size < 16) throw InputError(name + ": field 'fmt': chunk too small");
      format = read_le<std::uint16_t>(buf, body);
      channels = read_le<std::uint16_t>(buf, body + 2);
      rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw InputError(name + ": field 'fmt': missing before data");
      if (format != 1 || bits != 16) throw InputError(name + ": field 'fmt': only 16-bit PCM is supported");
      if (channels != 1) throw InputError(name + ": field 'channels': audio must be mono");
      AudioBuffer a;
      a.sample_rate = rate;
      a.samples.resize(size / 2);
      for (std::size_t i = 0; i < a.samples.size(); ++i)
        a.samples[i] = read_le<std::int16_t>(buf, body + 2 * i) / 32768.0;
      return a;
    }
    pos = body + size + (size & 1);
  }
  throw InputError(name + ": field 'data': no data chunk");
}

void write_wav(const fs::path& path, const AudioBuffer& audio) {
  auto out = open_out(path, std::ios::binary);
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + 2 * n);
  out.write("WAVEfmt ", 8);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, 1);
  write_le<std::uint16_t>(out, 1);
  write_le<std::uint32_t>(out, rate);
  write_le<std::uint32_t>(out, rate * 2);
  write_le<std::uint16_t>(out, 2);
  write_le<std::uint16_t>(out, 16);
  out.write("data", 4);
  write_le<std::uint32_t>(out, 2 * n);
  for (double s : audio.samples) {
    const double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
    write_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(c * 32768.0)));
  }
}

SampledTrack read_f0_track(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> times, hz;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_fields(line);
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() != 2) throw InputError(where(path, lineno) + ": field 'line': expected 2 columns");
    times.push_back(parse_double(f[0], where(path, lineno), "time_sec"));
    hz.push_back(parse_double(f[1], where(path, lineno), "f0_hz"));
  }
  if (times.size() < 2) throw InputError(path.string() + ": field 'time_sec': track needs at least two frames");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw InputError(path.string() + ": field 'time_sec': times must increase");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::fabs(times[i] - times[i - 1] - dt) > 0.01 * dt)
      throw InputError(where(path, static_cast<int>(i) + 1) + ": field 'time_sec': frames are not uniformly spaced");
  SampledTrack t;
  t.sample_rate = std::round(1.0 / dt * 1e6) / 1e6;
  t.t0 = times.front();
  t.values.resize(hz.size());
  t.valid.resize(hz.size());
  for (std::size_t i = 0; i < hz.size(); ++i) {
    t.valid[i] = hz[i] > 0.0 && std::isfinite(hz[i]);
    t.values[i] = t.valid[i] ? hz[i] : 0.0;
  }
  return t;
}

void write_f0_track(const fs::path& path, const SampledTrack& f0_hz) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < f0_hz.size(); ++i)
    out << format_double(std::round(f0_hz.time(i) * 1e6) / 1e6) << ' '
        << format_double(f0_hz.valid[i] ? f0_hz.values[i] : 0.0) << '\n';
}

std::vector<DialogActSegment> read_da_tier(const fs::path& path) {
  auto in = open_in(path);
  std::vector<DialogActSegment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_fields(line);
    if (f.empty() || f[0][0] == '#' || (lineno == 1 && f[0] == "dialog_id")) continue;
    const auto w = where(path, lineno);
    if (f.size() != 6) throw InputError(w + ": field 'line': expected 6 columns, found " + std::to_string(f.size()));
    DialogActSegment s;
    s.dialog_id = f[0];
    s.speaker_id = f[1];
    s.start = parse_double(f[2], w, "start");
    s.end = parse_double(f[3], w, "end");
    if (!(s.start < s.end)) throw InputError(w + ": field 'end': must exceed start");
    try {
      s.label = parse_label(f[4]);
    } catch (const Error& e) {
      throw InputError(w + ": field 'da_label': " + e.what() + " '" + f[4] + "'");
    }
    try {
      s.condition = parse_condition(f[5]);
    } catch (const Error& e) {
      throw InputError(w + ": field 'condition': " + e.what() + " '" + f[5] + "'");
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InputError(path.string() + ": field 'rows': no dialog acts");
  assign_dialog_indices(out);
  return out;
}

void write_da_tier(const fs::path& path, const std::vector<DialogActSegment>& segs) {
  auto out = open_out(path);
  out << "dialog_id\tspeaker\tstart\tend\tda_label\tcondition\n";
  for (const auto& s : segs)
    out << s.dialog_id << '\t' << s.speaker_id << '\t' << format_double(s.start) << '\t' << format_double(s.end)
        << '\t' << to_string(s.label) << '\t' << to_string(s.condition) << '\n';
}

std::vector<WordSegment> read_word_tier(const fs::path& path) {
  auto in = open_in(path);
  std::vector<WordSegment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_fields(line);
    if (f.empty() || f[0][0] == '#' || (lineno == 1 && f[0] == "dialog_id")) continue;
    const auto w = where(path, lineno);
    if (f.size() != 5 && f.size() != 6)
      throw InputError(w + ": field 'line': expected 5 or 6 columns, found " + std::to_string(f.size()));
    WordSegment s;
    s.dialog_id = f[0];
    s.speaker_id = f[1];
    s.start = parse_double(f[2], w, "start");
    s.end = parse_double(f[3], w, "end");
    if (!(s.start < s.end)) throw InputError(w + ": field 'end': must exceed start");
    s.word = f[4];
    if (f.size() == 6 && f[5] != "NA") s.stress_nucleus = parse_double(f[5], w, "stress_nucleus_time");
    out.push_back(std::move(s));
  }
  return out;
}

void write_word_tier(const fs::path& path, const std::vector<WordSegment>& words) {
  auto out = open_out(path);
  out << "dialog_id\tspeaker\tstart\tend\tword\tstress_nucleus_time\n";
  for (const auto& w : words)
    out << w.dialog_id << '\t' << w.speaker_id << '\t' << format_double(w.start) << '\t' << format_double(w.end)
        << '\t' << w.word << '\t' << (w.stress_nucleus ? format_double(*w.stress_nucleus) : "NA") << '\n';
}

namespace {
constexpr std::array<const char*, 7> kFixedColumns{"dialog_id", "segment_id", "speaker", "da_label",
                                                   "condition", "start",      "end"};
}

void write_feature_table(std::ostream& os, const FeatureTable& table) {
  for (std::size_t i = 0; i < kFixedColumns.size(); ++i) os << (i ? "\t" : "") << kFixedColumns[i];
  for (const auto& c : table.columns) os << '\t' << c;
  os << '\n';
  for (std::size_t r = 0; r < table.segments.size(); ++r) {
    const auto& s = table.segments[r];
    os << s.dialog_id << '\t' << s.id() << '\t' << s.speaker_id << '\t' << to_string(s.label) << '\t'
       << to_string(s.condition) << '\t' << format_double(s.start) << '\t' << format_double(s.end);
    for (double v : table.values[r]) os << '\t' << format_double(v);
    os << '\n';
  }
}

void write_feature_table(const fs::path& path, const FeatureTable& table) {
  auto out = open_out(path);
  write_feature_table(out, table);
}

FeatureTable read_feature_table(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": field 'header': empty file");
  const auto header = split_fields(line);
  if (header.size() < kFixedColumns.size() || !std::equal(kFixedColumns.begin(), kFixedColumns.end(), header.begin()))
    throw InputError(path.string() + ":1: field 'header': expected dialog_id segment_id speaker da_label condition start end");
  FeatureTable t;
  t.columns.assign(header.begin() + kFixedColumns.size(), header.end());
  for (const auto& c : t.columns) {
    try {
      set_of_column(c);
    } catch (const Error&) {
      throw InputError(path.string() + ":1: field '" + c + "': unknown feature column");
    }
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    const auto w = where(path, lineno);
    if (f.size() != header.size())
      throw InputError(w + ": field 'line': expected " + std::to_string(header.size()) + " columns, found " +
                       std::to_string(f.size()));
    DialogActSegment s;
    s.dialog_id = f[0];
    s.speaker_id = f[2];
    try {
      s.label = parse_label(f[3]);
    } catch (const Error& e) {
      throw InputError(w + ": field 'da_label': " + e.what() + " '" + f[3] + "'");
    }
    try {
      s.condition = parse_condition(f[4]);
    } catch (const Error& e) {
      throw InputError(w + ": field 'condition': " + e.what() + " '" + f[4] + "'");
    }
    s.start = parse_double(f[5], w, "start");
    s.end = parse_double(f[6], w, "end");
    if (!(s.start < s.end)) throw InputError(w + ": field 'end': must exceed start");
    std::vector<double> row;
    for (std::size_t c = kFixedColumns.size(); c < f.size(); ++c) row.push_back(parse_double(f[c], w, header[c]));
    t.segments.push_back(std::move(s));
    t.values.push_back(std::move(row));
  }
  // segment order defines the dialog indices; keep rows aligned with it
  std::vector<std::size_t> order(t.segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = t.segments[a];
    const auto& y = t.segments[b];
    return std::tie(x.dialog_id, x.start, x.speaker_id) < std::tie(y.dialog_id, y.start, y.speaker_id);
  });
  FeatureTable sorted;
  sorted.columns = t.columns;
  for (std::size_t i : order) {
    sorted.segments.push_back(t.segments[i]);
    sorted.values.push_back(t.values[i]);
  }
  assign_dialog_indices(sorted.segments);
  return sorted;
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::binary);
  out << text;
}

}  // namespace prosody::io
