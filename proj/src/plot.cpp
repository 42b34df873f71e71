#include "prosody/plot.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "prosody/error.hpp"
#include "prosody/io.hpp"

namespace prosody {

std::string plot_profiles(std::span<const EntrainmentRecord> records, const ProfilePlotSpec& spec) {
  // per feature: sums of d_s, d_d and count, in table order
  std::map<std::string, std::array<double, 3>> acc;
  double sum_s = 0.0, sum_d = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.label != spec.label || r.measure != spec.measure) continue;
    if (spec.condition && r.condition != *spec.condition) continue;
    if (set_of_column(r.feature) != spec.set) continue;
    auto& a = acc[r.feature];
    a[0] += r.d_s;
    a[1] += r.d_d;
    a[2] += 1.0;
    sum_s += r.d_s;
    sum_d += r.d_d;
    ++n;
  }
  if (n == 0) throw Error("no data");

  std::vector<std::string> feats;
  for (const auto& name : feature_names(spec.set)) {
    const auto q = qualified_name(spec.set, name);
    if (acc.count(q)) feats.push_back(q);
  }
  const double mean_s = sum_s / static_cast<double>(n);
  const double mean_d = sum_d / static_cast<double>(n);
  double x_max = std::max(mean_s, mean_d);
  for (const auto& f : feats) {
    const auto& a = acc[f];
    x_max = std::max({x_max, a[0] / a[2], a[1] / a[2]});
  }
  if (!(x_max > 0.0)) x_max = 1.0;

  const double left = 110.0, right = 20.0, top = 40.0, bottom = 40.0;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto px = [&](double v) { return left + pw * v / (1.05 * x_max); };
  auto py = [&](std::size_t i) {
    return feats.size() == 1 ? top + 0.5 * ph : top + ph * static_cast<double>(i) / (feats.size() - 1);
  };
  using io::format_double;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(spec.width) << "\" height=\""
      << format_double(spec.height) << "\" viewBox=\"0 0 " << format_double(spec.width) << ' '
      << format_double(spec.height) << "\">\n";
  svg << "<title>" << to_string(spec.label) << ' ' << to_string(spec.set) << ' ' << to_string(spec.measure)
      << "</title>\n";
  svg << "<rect x=\"" << format_double(left) << "\" y=\"" << format_double(top) << "\" width=\"" << format_double(pw)
      << "\" height=\"" << format_double(ph) << "\" fill=\"none\" stroke=\"#999\"/>\n";
  auto polyline = [&](int which, const char* cls, const char* dash) {
    svg << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"black\"" << dash << " points=\"";
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const auto& a = acc[feats[i]];
      svg << (i ? " " : "") << format_double(px(a[which] / a[2])) << ',' << format_double(py(i));
    }
    svg << "\"/>\n";
  };
  polyline(0, "within", "");
  polyline(1, "across", " stroke-dasharray=\"6,4\"");
  auto rule = [&](double v, const char* cls, const char* dash) {
    svg << "<line class=\"" << cls << "\" x1=\"" << format_double(px(v)) << "\" y1=\"" << format_double(top)
        << "\" x2=\"" << format_double(px(v)) << "\" y2=\"" << format_double(top + ph)
        << "\" stroke=\"black\" stroke-width=\"2\"" << dash << "/>\n";
  };
  rule(mean_s, "mean-within", "");
  rule(mean_d, "mean-across", " stroke-dasharray=\"6,4\"");
  for (std::size_t i = 0; i < feats.size(); ++i)
    svg << "<text x=\"" << format_double(left - 6) << "\" y=\"" << format_double(py(i) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << feats[i] << "</text>\n";
  svg << "<text x=\"" << format_double(left + 0.5 * pw) << "\" y=\"" << format_double(spec.height - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">distance</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace prosody
