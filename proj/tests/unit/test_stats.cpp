#include <doctest.h>

#include <cmath>
#include <random>

#include "prosody/error.hpp"
#include "prosody/stats.hpp"

using namespace prosody;

namespace {

SignCell cell(DaLabel l, Sign s, Condition c = Condition::cooperative) {
  SignCell x;
  x.label = l;
  x.sign = s;
  x.condition = c;
  x.available = true;
  return x;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("Welch examples") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  const auto r = welch_ttest(a, b);
  CHECK(r.t == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.3465935).epsilon(1e-6));

  const auto same = welch_ttest(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(n(rng));
    y.push_back(10.0 + n(rng));
  }
  CHECK(welch_ttest(x, y).p < 1e-10);

  const std::vector<double> c3{3, 3, 3}, c4{4, 4, 4};
  CHECK(welch_ttest(c3, c3).p == 1.0);
  CHECK_THROWS_WITH_AS(welch_ttest(c3, c4), "degenerate samples", Error);
  CHECK_THROWS_AS(welch_ttest(std::vector<double>{1.0}, b), Error);
}

TEST_CASE("copied partners give plus cells, disentrainment minus") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<EntrainmentRecord> recs;
  for (auto l : {DaLabel::EX, DaLabel::IN})
    for (const char* f : {"IP.lev.c0.F", "GEN.max"})
      for (int i = 0; i < 30; ++i) {
        EntrainmentRecord r;
        r.label = l;
        r.feature = f;
        const double d = u(rng);
        r.d_s = l == DaLabel::EX ? 0.0 : d + 1.0;
        r.d_d = d;
        r.d = r.d_s - r.d_d;
        recs.push_back(r);
      }
  const auto cells = sign_table(recs);
  REQUIRE(cells.size() == 4);
  for (const auto& c : cells) {
    CHECK(c.available);
    CHECK(c.n == 30);
    CHECK(c.sign == (c.label == DaLabel::EX ? Sign::plus : Sign::minus));
  }
  SignOptions per;
  per.per_feature = true;
  CHECK(sign_table(recs, per).size() == 4);
  auto reversed = recs;
  std::reverse(reversed.begin(), reversed.end());
  const auto again = sign_table(reversed);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(again[i].p == cells[i].p);
    CHECK(again[i].label == cells[i].label);
  }
}

TEST_CASE("majority vote over draws") {
  std::vector<std::vector<SignCell>> draws(3, std::vector<SignCell>{cell(DaLabel::EX, Sign::plus)});
  draws[2][0].sign = Sign::zero;
  draws[0][0].p = 0.01;
  draws[1][0].p = 0.02;
  draws[2][0].p = 0.3;
  auto s = summarize_draws(draws);
  REQUIRE(s.size() == 1);
  CHECK(s[0].cell.sign == Sign::plus);
  CHECK(s[0].n_plus == 2);
  CHECK(s[0].cell.p == doctest::Approx(0.02));
  CHECK(s[0].p_min == doctest::Approx(0.01));
  CHECK(s[0].p_max == doctest::Approx(0.3));
  draws[1][0].sign = Sign::minus;
  CHECK(summarize_draws(draws)[0].cell.sign == Sign::zero);
}

TEST_CASE("proportion tables") {
  std::vector<SignCell> cells;
  for (int i = 0; i < 10; ++i)
    cells.push_back(cell(DaLabel::EX, i < 5 ? Sign::plus : (i == 5 ? Sign::minus : Sign::zero)));
  for (int i = 0; i < 10; ++i) cells.push_back(cell(DaLabel::AC, i < 7 ? Sign::plus : Sign::zero, Condition::competitive));
  const auto rows = proportion_table(cells, "authority", [](const SignCell& c) -> std::optional<std::string> {
    return label_traits(c.label).high_authority ? "high" : "low";
  });
  bool high = false, low = false;
  for (const auto& r : rows) {
    CHECK(r.p_plus + r.p_minus <= 1.0);
    if (r.level == "high" && r.condition == Condition::cooperative) {
      CHECK(r.p_plus == doctest::Approx(0.5));
      CHECK(r.p_minus == doctest::Approx(0.1));
      CHECK(r.n_cells == 10);
      high = true;
    }
    if (r.level == "low" && r.condition == Condition::competitive) {
      CHECK(r.p_plus == doctest::Approx(0.7));
      CHECK(r.p_minus == 0.0);
      low = true;
    }
  }
  CHECK(high);
  CHECK(low);

  std::vector<SignCell> all_plus(4, cell(DaLabel::IN, Sign::plus));
  const auto one = proportion_table(all_plus, "x", [](const SignCell&) -> std::optional<std::string> { return "a"; });
  REQUIRE(one.size() == 1);
  CHECK(one[0].p_plus == 1.0);
  CHECK(one[0].p_minus == 0.0);
  CHECK(proportion_table(all_plus, "x", [](const SignCell&) -> std::optional<std::string> { return {}; }).empty());
}

TEST_CASE("permutation group test") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v;
  std::vector<int> lev, strata;
  for (int s = 0; s < 6; ++s)
    for (int i = 0; i < 10; ++i) {
      const int l = i % 2;
      v.push_back(n(rng) + (l ? -3.0 : 0.0) + s);
      lev.push_back(l);
      strata.push_back(s);
    }
  const auto r = permutation_group_test(v, lev, strata, 5000, 1);
  CHECK(r.p < 0.001);
  CHECK(r.diff < -2.0);
  CHECK(r.strata == 6);
  CHECK(r.n0 == 30);
  const auto again = permutation_group_test(v, lev, strata, 5000, 1);
  CHECK(again.p == r.p);
  CHECK_THROWS_WITH_AS(permutation_group_test(v, lev, strata, 0, 1), "no permutations", Error);

  // a stratum holding one level only is dropped
  v.push_back(100.0);
  lev.push_back(1);
  strata.push_back(99);
  CHECK(permutation_group_test(v, lev, strata, 200, 1).strata == 6);
}

TEST_CASE("Kolmogorov-Smirnov against uniform") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> flat, skew;
  for (int i = 0; i < 400; ++i) {
    flat.push_back(u(rng));
    skew.push_back(std::pow(u(rng), 3.0));
  }
  CHECK(ks_uniform_pvalue(flat) > 0.01);
  CHECK(ks_uniform_pvalue(skew) < 1e-6);
}

}  // TEST_SUITE
