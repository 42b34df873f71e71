#include "prosody/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "prosody/error.hpp"

namespace prosody {

namespace {

std::pair<double, double> mean_var(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, ss / static_cast<double>(x.size() - 1)};
}

double mean_of(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  return x.empty() ? 0.0 : m / static_cast<double>(x.size());
}

}  // namespace

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("degenerate samples");
  const auto [ma, va] = mean_var(a);
  const auto [mb, vb] = mean_var(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  const double se2 = sa + sb;
  if (!(se2 > 0.0)) {
    if (ma == mb) return {0.0, na + nb - 2.0, 1.0};
    throw Error("degenerate samples");
  }
  WelchResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  if (r.t == 0.0) {
    r.p = 1.0;
    return r;
  }
  boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  return r;
}

std::string_view to_string(Sign s) {
  switch (s) {
    case Sign::plus: return "+";
    case Sign::minus: return "-";
    case Sign::zero: return "0";
  }
  return "0";
}

std::vector<SignCell> sign_table(std::span<const EntrainmentRecord> records, const SignOptions& opts) {
  using Key = std::tuple<Condition, DaLabel, FeatureSet, std::string, Measure>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : records) {
    const auto set = set_of_column(r.feature);
    Key k{r.condition, r.label, set, opts.per_feature ? r.feature : std::string(), r.measure};
    auto& g = groups[k];
    g.first.push_back(r.d_s);
    g.second.push_back(r.d_d);
  }
  std::vector<SignCell> out;
  out.reserve(groups.size());
  for (auto& [k, g] : groups) {
    SignCell c;
    std::tie(c.condition, c.label, c.set, c.feature, c.measure) = k;
    // sorting makes the sums independent of record order
    std::sort(g.first.begin(), g.first.end());
    std::sort(g.second.begin(), g.second.end());
    c.n = g.first.size();
    c.mean_d_s = mean_of(g.first);
    c.mean_d_d = mean_of(g.second);
    try {
      const auto w = welch_ttest(g.first, g.second);
      c.available = true;
      c.p = w.p;
      c.t = w.t;
      if (w.p < opts.alpha) c.sign = c.mean_d_s < c.mean_d_d ? Sign::plus : Sign::minus;
    } catch (const Error&) {
      c.available = false;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SignSummary> summarize_draws(const std::vector<std::vector<SignCell>>& draws) {
  using Key = std::tuple<Condition, DaLabel, FeatureSet, std::string, Measure>;
  std::map<Key, std::vector<const SignCell*>> by_key;
  for (const auto& d : draws)
    for (const auto& c : d) by_key[{c.condition, c.label, c.set, c.feature, c.measure}].push_back(&c);
  std::vector<SignSummary> out;
  for (const auto& [k, cells] : by_key) {
    SignSummary s;
    s.cell = *cells.front();
    s.n_draws = static_cast<int>(cells.size());
    std::vector<double> ps, ms, md;
    bool any_available = false;
    for (const auto* c : cells) {
      s.n_plus += c->sign == Sign::plus;
      s.n_minus += c->sign == Sign::minus;
      ps.push_back(c->p);
      ms.push_back(c->mean_d_s);
      md.push_back(c->mean_d_d);
      any_available = any_available || c->available;
    }
    s.cell.available = any_available;
    s.cell.p = median(ps);
    s.cell.mean_d_s = median(ms);
    s.cell.mean_d_d = median(md);
    s.p_min = *std::min_element(ps.begin(), ps.end());
    s.p_max = *std::max_element(ps.begin(), ps.end());
    s.cell.sign = 2 * s.n_plus > s.n_draws ? Sign::plus : (2 * s.n_minus > s.n_draws ? Sign::minus : Sign::zero);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ProportionRow> proportion_table(std::span<const SignCell> cells, const std::string& dimension,
                                            const LevelOf& level_of) {
  std::map<std::pair<Condition, std::string>, std::array<std::size_t, 3>> counts;  // n, plus, minus
  for (const auto& c : cells) {
    const auto level = level_of(c);
    if (!level) continue;
    auto& n = counts[{c.condition, *level}];
    ++n[0];
    n[1] += c.sign == Sign::plus;
    n[2] += c.sign == Sign::minus;
  }
  std::vector<ProportionRow> out;
  for (const auto& [k, n] : counts) {
    ProportionRow r;
    r.dimension = dimension;
    r.condition = k.first;
    r.level = k.second;
    r.n_cells = n[0];
    r.p_plus = static_cast<double>(n[1]) / static_cast<double>(n[0]);
    r.p_minus = static_cast<double>(n[2]) / static_cast<double>(n[0]);
    out.push_back(std::move(r));
  }
  return out;
}

GroupTestResult permutation_group_test(std::span<const double> values, std::span<const int> levels,
                                       std::span<const int> strata, int n_perm, std::uint64_t seed) {
  if (n_perm <= 0) throw Error("no permutations");
  if (values.size() != levels.size() || values.size() != strata.size())
    throw Error("group test inputs differ in length");

  std::map<int, std::vector<std::size_t>> by_stratum;
  for (std::size_t i = 0; i < values.size(); ++i) by_stratum[strata[i]].push_back(i);
  std::vector<std::vector<std::size_t>> kept;
  for (auto& [s, idx] : by_stratum) {
    const bool has0 = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return levels[i] == 0; });
    const bool has1 = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return levels[i] == 1; });
    if (has0 && has1) kept.push_back(idx);
  }
  GroupTestResult r;
  r.strata = kept.size();
  std::vector<double> v;
  std::vector<int> lv;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& idx : kept) {
    spans.emplace_back(v.size(), v.size() + idx.size());
    for (std::size_t i : idx) {
      v.push_back(values[i]);
      lv.push_back(levels[i] == 1 ? 1 : 0);
    }
  }
  for (int l : lv) (l ? r.n1 : r.n0)++;
  if (r.n0 < 2 || r.n1 < 2) throw Error("group test needs two records per level");

  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  auto diff_of = [&](const std::vector<int>& lab) {
    double s1 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (lab[i]) s1 += v[i];
    const double m1 = s1 / static_cast<double>(r.n1);
    const double m0 = (total - s1) / static_cast<double>(r.n0);
    return m1 - m0;
  };
  r.diff = diff_of(lv);
  const double obs = std::fabs(r.diff) * (1.0 - 1e-12);
  std::mt19937_64 rng(seed);
  std::vector<int> perm = lv;
  long exceed = 0;
  for (int k = 0; k < n_perm; ++k) {
    for (const auto& [a, b] : spans)
      std::shuffle(perm.begin() + static_cast<std::ptrdiff_t>(a), perm.begin() + static_cast<std::ptrdiff_t>(b),
                   rng);
    if (std::fabs(diff_of(perm)) >= obs) ++exceed;
  }
  r.p = static_cast<double>(1 + exceed) / static_cast<double>(1 + n_perm);
  return r;
}

double ks_uniform_pvalue(std::vector<double> sample) {
  if (sample.empty()) throw Error("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
  }
  // asymptotic Kolmogorov distribution with Stephens' small-sample correction
  const double sq = std::sqrt(n);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace prosody
