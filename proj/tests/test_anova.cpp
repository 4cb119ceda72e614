#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ls_oracle.hpp"
#include "pearsonbf/anova.hpp"
#include "pearsonbf/bayes_factor.hpp"

using namespace pearsonbf;

namespace {

DataMatrix random_matrix(int n, int k, std::mt19937& gen, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  DataMatrix m;
  m.n_subjects = n;
  m.k_conditions = k;
  m.values.resize(static_cast<size_t>(n) * k);
  for (auto& v : m.values) v = normal(gen);
  return m;
}

double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-30});
}

}  // namespace

TEST_CASE("hand-worked 3x2 decomposition", "[anova]") {
  // grand mean 2.5; column means 2 and 3; row means 1.5, 3, 3
  const DataMatrix m{3, 2, {1, 2, 3, 3, 2, 4}};
  const AnovaTable t = rm_anova(m);
  CHECK(std::fabs(t.ssa - 1.5) < 1e-12);
  CHECK(std::fabs(t.ssb - 3.0) < 1e-12);
  CHECK(std::fabs(t.ssr - 1.0) < 1e-12);
  CHECK(std::fabs(t.sst - 5.5) < 1e-12);
  CHECK(t.df_treatment == 1);
  CHECK(t.df_residual == 2);
  CHECK(std::fabs(t.f_stat - 3.0) < 1e-12);
  CHECK(std::fabs(t.p_value.value() -
                  f_upper_tail(3.0, 1, 2).value()) < 1e-15);
}

TEST_CASE("perfectly additive data has no residual", "[anova]") {
  // y_ij = row_i + col_j exactly, so SSR = 0 and F is undefined
  const DataMatrix additive{3, 2, {1, 2, 2, 3, 3, 4}};
  CHECK_THROWS_AS(rm_anova(additive), DegenerateDataError);
  const DataMatrix constant{3, 2, {2, 2, 2, 2, 2, 2}};
  CHECK_THROWS_AS(rm_anova(constant), DegenerateDataError);
}

TEST_CASE("equal column means give F = 0", "[anova]") {
  const DataMatrix m{3, 2, {1, 2, 2, 1, 3, 3}};
  const AnovaTable t = rm_anova(m);
  CHECK(std::fabs(t.ssa) < 1e-12);
  CHECK(t.f_stat == 0.0);
  CHECK(t.p_value.value() == 1.0);
}

TEST_CASE("agrees with the effect-coded least-squares oracle", "[anova]") {
  std::mt19937 gen(2025);
  std::uniform_int_distribution<int> n_dist(3, 100), k_dist(2, 6);
  for (int rep = 0; rep < 100; ++rep) {
    const DataMatrix m = random_matrix(n_dist(gen), k_dist(gen), gen);
    const AnovaTable t = rm_anova(m);
    const auto ls = ls_oracle::decompose(m);
    INFO("n=" << m.n_subjects << " k=" << m.k_conditions);
    CHECK(rel_diff(t.ssa, ls.ssa) < 1e-9);
    CHECK(rel_diff(t.ssb, ls.ssb) < 1e-9);
    CHECK(rel_diff(t.ssr, ls.ssr) < 1e-9);
    CHECK(rel_diff(t.sst, ls.sst) < 1e-9);
  }
}

TEST_CASE("translation invariance", "[anova]") {
  std::mt19937 gen(99);
  const DataMatrix m = random_matrix(20, 3, gen);
  DataMatrix shifted = m;
  for (auto& v : shifted.values) v += 1234.5;
  const AnovaTable a = rm_anova(m), b = rm_anova(shifted);
  CHECK(rel_diff(a.ssa, b.ssa) < 1e-9);
  CHECK(rel_diff(a.ssb, b.ssb) < 1e-9);
  CHECK(rel_diff(a.ssr, b.ssr) < 1e-9);
  CHECK(rel_diff(a.f_stat, b.f_stat) < 1e-9);
}

TEST_CASE("per-subject shifts move only the subject term", "[anova]") {
  std::mt19937 gen(100);
  const DataMatrix m = random_matrix(15, 4, gen);
  DataMatrix shifted = m;
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int i = 0; i < shifted.n_subjects; ++i) {
    const double c = unif(gen);
    for (int j = 0; j < shifted.k_conditions; ++j) shifted.at(i, j) += c;
  }
  const AnovaTable a = rm_anova(m), b = rm_anova(shifted);
  CHECK(rel_diff(a.ssa, b.ssa) < 1e-9);
  CHECK(rel_diff(a.ssr, b.ssr) < 1e-9);
  CHECK(rel_diff(a.f_stat, b.f_stat) < 1e-9);
  CHECK(std::fabs(a.ssb - b.ssb) > 1e-6);  // the shifts were not all equal
}

TEST_CASE("row permutation leaves the table unchanged", "[anova]") {
  std::mt19937 gen(101);
  const DataMatrix m = random_matrix(12, 3, gen);
  DataMatrix perm = m;
  std::vector<int> order(m.n_subjects);
  for (int i = 0; i < m.n_subjects; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), gen);
  for (int i = 0; i < m.n_subjects; ++i) {
    for (int j = 0; j < m.k_conditions; ++j) {
      perm.at(i, j) = m.at(order[i], j);
    }
  }
  const AnovaTable a = rm_anova(m), b = rm_anova(perm);
  CHECK(rel_diff(a.ssa, b.ssa) < 1e-12);
  CHECK(rel_diff(a.ssb, b.ssb) < 1e-12);
  CHECK(rel_diff(a.ssr, b.ssr) < 1e-12);
  CHECK(rel_diff(a.sst, b.sst) < 1e-12);
  CHECK(rel_diff(a.f_stat, b.f_stat) < 1e-12);
}

TEST_CASE("scaling multiplies sums of squares by s^2, F unchanged", "[anova]") {
  std::mt19937 gen(102);
  const DataMatrix m = random_matrix(25, 3, gen);
  const double s = 7.25;
  DataMatrix scaled = m;
  for (auto& v : scaled.values) v *= s;
  const AnovaTable a = rm_anova(m), b = rm_anova(scaled);
  CHECK(rel_diff(b.ssa, s * s * a.ssa) < 1e-9);
  CHECK(rel_diff(b.ssb, s * s * a.ssb) < 1e-9);
  CHECK(rel_diff(b.ssr, s * s * a.ssr) < 1e-9);
  CHECK(rel_diff(b.f_stat, a.f_stat) < 1e-9);
}

TEST_CASE("decomposition closes on large random matrices", "[anova]") {
  std::mt19937 gen(103);
  for (auto [n, k] : {std::pair{500, 10}, {50, 4}, {5, 3}}) {
    const DataMatrix m = random_matrix(n, k, gen, 3.0);
    const AnovaTable t = rm_anova(m);
    CHECK(std::fabs(t.sst - (t.ssa + t.ssb + t.ssr)) <= 1e-10 * t.sst);
    CHECK(rel_diff(t.f_stat, (t.ssa / t.ssr) *
                                 (static_cast<double>(t.df_residual) /
                                  t.df_treatment)) < 1e-12);
  }
}

TEST_CASE("csv reader handles the documented schema", "[anova]") {
  std::istringstream good(
      "subject,c1,c2\n"
      "s1,1,2\n"
      "s2,3,3\n"
      "s3,2,4\n");
  const DataMatrix m = read_data_matrix(good);
  CHECK(m.n_subjects == 3);
  CHECK(m.k_conditions == 2);
  CHECK(m.at(2, 1) == 4.0);

  std::istringstream ragged(
      "subject,c1,c2\n"
      "s1,1,2\n"
      "s2,3\n");
  CHECK_THROWS_AS(read_data_matrix(ragged), CsvError);

  std::istringstream junk(
      "subject,c1,c2\n"
      "s1,1,oops\n"
      "s2,3,3\n");
  CHECK_THROWS_MATCHES(read_data_matrix(junk), CsvError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("row 2")));

  std::istringstream empty("");
  CHECK_THROWS_AS(read_data_matrix(empty), CsvError);

  std::istringstream one_row(
      "subject,c1,c2\n"
      "s1,1,2\n");
  CHECK_THROWS_AS(read_data_matrix(one_row), DimensionError);
}

TEST_CASE("summary packaging and the bf pipeline", "[anova]") {
  const DataMatrix m{3, 2, {1, 2, 3, 3, 2, 4}};
  const AnovaTable t = rm_anova(m);
  const SummaryStats s = summary_from_anova(t, 3, 2);
  CHECK(s.f_stat == t.f_stat);
  CHECK(s.x == 1);
  CHECK(s.y == 2);
  CHECK(*s.n_subjects == 3);

  // n=2, k=2 leaves y=1, which the summary invariants reject
  const DataMatrix tiny{2, 2, {1.0, 2.5, 2.0, 1.5}};
  const AnovaTable tt = rm_anova(tiny);
  CHECK_THROWS_AS(summary_from_anova(tt, 2, 2), DomainError);

  // pipeline smoke: random data -> anova -> summary -> Bayes factor
  std::mt19937 gen(104);
  for (int rep = 0; rep < 20; ++rep) {
    const DataMatrix r = random_matrix(10, 3, gen);
    const AnovaTable rt = rm_anova(r);
    const SummaryStats rs = summary_from_anova(rt, 10, 3);
    CHECK(std::isfinite(pearson_bf_rm(rs, -0.5).log_bf10));
  }
}
