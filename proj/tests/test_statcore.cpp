#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tensormax/populations.hpp"
#include "tensormax/statcore.hpp"

using namespace tmax;

namespace {

DataMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
  static const PopulationSpec families[] = {PopulationSpec::standard_normal(), PopulationSpec::rademacher(),
                                            PopulationSpec::uniform_scaled(),
                                            PopulationSpec::centered_exponential()};
  return sample_matrix(families[seed % 4], n, std::max<std::size_t>(p, 3), {seed, 0});
}

DataMatrix transform(const DataMatrix& x, double factor) {
  DataMatrix y(x.n(), x.p());
  for (std::size_t k = 0; k < x.n(); ++k)
    for (std::size_t i = 0; i < x.p(); ++i) y(k, i) = factor * x(k, i);
  return y;
}

}  // namespace

TEST_CASE("single tuple") {
  const auto x = DataMatrix::from_rows({{1, 2}});
  const auto r = max_entry(x, 2);
  CHECK(r.w_abs == 2.0);
  CHECK(r.w_signed == 2.0);
  CHECK(r.argmax_abs == TupleIndex{1, 2});
  CHECK(r.tuple_count == 1);
  CHECK(max_entry_bruteforce(x, 2).w_abs == 2.0);
}

TEST_CASE("three pairs by hand") {
  const auto x = DataMatrix::from_rows({{1, -2, 3}});
  const auto r = max_entry(x, 2);
  CHECK(r.w_abs == 6.0);
  CHECK(r.argmax_abs == TupleIndex{2, 3});
  CHECK(r.w_signed == 3.0);
  CHECK(r.argmax_signed == TupleIndex{1, 3});
  CHECK(max_entry_bruteforce(x, 2).w_abs == 6.0);
}

TEST_CASE("division by sqrt(n)") {
  const auto x = DataMatrix::from_rows({{1, 1, 0}, {1, 1, 0}, {1, 1, 0}, {1, 1, 0}});
  CHECK(max_entry(x, 2).w_abs == 2.0);
}

TEST_CASE("ties go to the lexicographically smallest tuple") {
  const auto x = DataMatrix::from_rows({{1, 1, 1, 1}});
  const auto r = max_entry(x, 3);
  CHECK(r.argmax_abs == TupleIndex{1, 2, 3});
  CHECK(r.argmax_signed == TupleIndex{1, 2, 3});
  const auto z = DataMatrix(4, 5);
  const auto rz = max_entry(z, 2);
  CHECK(rz.w_abs == 0.0);
  CHECK(rz.argmax_abs == TupleIndex{1, 2});
}

TEST_CASE("random instance at n=15, p=10, m=3 matches the oracle exactly") {
  const auto x = sample_matrix(PopulationSpec::standard_normal(), 15, 10, {2024, 0});
  CHECK(max_entry(x, 3) == max_entry_bruteforce(x, 3));
}

TEST_CASE("oracle equivalence over random instances and worker counts") {
  std::mt19937_64 pick(31337);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 1 + pick() % 20;
    const std::size_t p = 3 + pick() % 10;
    const std::size_t m = 2 + pick() % std::min<std::size_t>(3, p - 1);
    const auto x = random_matrix(n, p, pick());
    CAPTURE(n);
    CAPTURE(p);
    CAPTURE(m);
    const auto oracle = max_entry_bruteforce(x, m);
    for (unsigned workers : {1U, 2U, 3U, 8U}) CHECK(max_entry(x, m, {workers, kDefaultCostCeiling}) == oracle);
  }
}

TEST_CASE("multi-population oracle equivalence") {
  std::mt19937_64 pick(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + pick() % 12;
    const std::size_t p = 3 + pick() % 8;
    const std::size_t m = 2 + pick() % 3;
    if (m > p) continue;
    std::vector<DataMatrix> xs;
    for (std::size_t s = 0; s < m; ++s) xs.push_back(random_matrix(n, p, pick()));
    CHECK(max_entry_multi(xs, {3, kDefaultCostCeiling}) == max_entry_multi_bruteforce(xs));
  }
}

TEST_CASE("multi-population examples") {
  SUBCASE("one tuple across two populations") {
    std::vector<DataMatrix> xs{DataMatrix::from_rows({{1, 2}}), DataMatrix::from_rows({{3, 4}})};
    const auto r = max_entry_multi(xs);
    CHECK(r.w_abs == 4.0);
    CHECK(r.argmax_abs == TupleIndex{1, 2});
  }
  SUBCASE("identical matrices reduce to the single-population maximum") {
    const auto x = sample_matrix(PopulationSpec::standard_normal(), 9, 7, {3, 3});
    std::vector<DataMatrix> xs(3, x);
    CHECK(max_entry_multi(xs) == max_entry(x, 3));
  }
  SUBCASE("zero first factor") {
    std::vector<DataMatrix> xs{DataMatrix::from_rows({{0, 0}}), DataMatrix::from_rows({{5, -7}})};
    CHECK(max_entry_multi(xs).w_abs == 0.0);
  }
  SUBCASE("mismatched shapes") {
    std::vector<DataMatrix> xs{DataMatrix(3, 4), DataMatrix(3, 5)};
    CHECK_THROWS_AS(max_entry_multi(xs), DimensionError);
    std::vector<DataMatrix> ys{DataMatrix(3, 4), DataMatrix(2, 4)};
    CHECK_THROWS_AS(max_entry_multi(ys), DimensionError);
    std::vector<DataMatrix> one{DataMatrix(3, 4)};
    CHECK_THROWS_AS(max_entry_multi(one), DimensionError);
  }
}

TEST_CASE("order must satisfy 2 <= m <= p") {
  const DataMatrix x(4, 3);
  CHECK_THROWS_AS(max_entry(x, 4), DimensionError);
  CHECK_THROWS_AS(max_entry(x, 1), DimensionError);
  CHECK_THROWS_AS(max_entry_bruteforce(x, 4), DimensionError);
  CHECK(max_entry(x, 3).tuple_count == 1);
}

TEST_CASE("cost ceiling") {
  const DataMatrix x(100, 60);
  try {
    max_entry(x, 3, {1, 1e5});
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    const auto cost = enumeration_cost(60, 3, 100);
    CHECK(e.estimated_cost() == static_cast<double>(cost.multiply_adds));
    CHECK(std::string(e.what()).find(std::to_string(cost.multiply_adds)) != std::string::npos);
  }
  CHECK_THROWS_AS(max_entry_bruteforce(DataMatrix(1000, 200), 3), BudgetError);
}

TEST_CASE("enumeration cost") {
  const auto c = enumeration_cost(100, 2, 500);
  CHECK(c.tuples == 4950);
  CHECK(c.multiply_adds == 2525000);
  CHECK_FALSE(c.saturated);
  CHECK(enumeration_cost(7, 7, 3).tuples == 1);
  CHECK(enumeration_cost(30, 3, 1).tuples == 4060);
  const auto huge = enumeration_cost(1000000, 10, 1000);
  CHECK(huge.saturated);
  CHECK(huge.tuples == UINT64_MAX);
  bool overflow = false;
  CHECK(binomial(40, 3, &overflow) == 9880);
  CHECK_FALSE(overflow);
  CHECK(binomial(3, 5) == 0);
  binomial(200, 100, &overflow);
  CHECK(overflow);
}

TEST_CASE("scale equivariance with exact factors") {
  const auto x = sample_matrix(PopulationSpec::standard_normal(), 12, 8, {5, 0});
  for (std::size_t m : {2, 3, 4}) {
    const auto r = max_entry(x, m);
    for (double c : {2.0, 0.5, 8.0}) {
      const auto s = max_entry(transform(x, c), m);
      CHECK(s.w_abs == r.w_abs * std::pow(c, static_cast<double>(m)));
      CHECK(s.w_signed == r.w_signed * std::pow(c, static_cast<double>(m)));
      CHECK(s.argmax_abs == r.argmax_abs);
      CHECK(s.argmax_signed == r.argmax_signed);
    }
  }
}

TEST_CASE("general positive scaling") {
  const auto x = sample_matrix(PopulationSpec::uniform_scaled(), 12, 8, {6, 0});
  const auto r = max_entry(x, 3);
  const auto s = max_entry(transform(x, 1.7), 3);
  CHECK(s.w_abs == doctest::Approx(r.w_abs * std::pow(1.7, 3)).epsilon(1e-12));
  CHECK(s.argmax_abs == r.argmax_abs);
}

TEST_CASE("column permutation equivariance") {
  const auto x = sample_matrix(PopulationSpec::standard_normal(), 10, 9, {8, 0});
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  DataMatrix y(10, 9);
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t i = 0; i < 9; ++i) y(k, perm[i]) = x(k, i);
  for (std::size_t m : {2, 3}) {
    const auto r = max_entry(x, m);
    const auto s = max_entry(y, m);
    CHECK(s.w_abs == doctest::Approx(r.w_abs).epsilon(1e-13));
    TupleIndex mapped;
    for (auto i : r.argmax_abs) mapped.push_back(perm[i - 1] + 1);
    std::sort(mapped.begin(), mapped.end());
    CHECK(s.argmax_abs == mapped);
  }
}

TEST_CASE("negation") {
  const auto x = sample_matrix(PopulationSpec::standard_normal(), 10, 7, {10, 0});
  const auto neg = transform(x, -1.0);
  for (std::size_t m : {2, 3, 4}) {
    const auto r = max_entry(x, m);
    const auto s = max_entry(neg, m);
    CHECK(s.w_abs == r.w_abs);
    CHECK(s.argmax_abs == r.argmax_abs);
    if (m % 2 == 0) {
      CHECK(s.w_signed == r.w_signed);
      CHECK(s.argmax_signed == r.argmax_signed);
    }
  }
  // Odd order: the signed maximum of -X is the magnitude of the most negative sum.
  const DataMatrix one = DataMatrix::from_rows({{1, -2, 3}});
  const auto s = max_entry(transform(one, -1.0), 3);
  CHECK(s.w_signed == 6.0);
}

TEST_CASE("signed maximum never exceeds the absolute maximum") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto x = random_matrix(6, 6, seed);
    const auto r = max_entry(x, 2 + seed % 3);
    CHECK(r.w_signed <= r.w_abs);
  }
  const auto pos = DataMatrix::from_rows({{0.5, 2, 3, 1}});
  const auto r = max_entry(pos, 2);
  CHECK(r.w_signed == r.w_abs);
}

TEST_CASE("all workers give identical results on a larger instance") {
  const auto x = sample_matrix(PopulationSpec::standard_normal(), 200, 40, {12, 0});
  const auto one = max_entry(x, 3, {1, kDefaultCostCeiling});
  CHECK(max_entry(x, 3, {8, kDefaultCostCeiling}) == one);
  CHECK(max_entry(x, 3, {0, kDefaultCostCeiling}) == one);
}

TEST_CASE("stat result json") {
  const auto r = max_entry(DataMatrix::from_rows({{1, -2, 3}}), 2);
  nlohmann::json j = r;
  CHECK(j.at("argmax_abs") == nlohmann::json::array({2, 3}));
  CHECK(j.at("tuple_count") == 3);
  CHECK(j.get<StatResult>() == r);
}
