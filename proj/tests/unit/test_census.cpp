#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "diagform/census.hpp"
#include "diagform/errors.hpp"
#include "diagform/rng.hpp"
#include "oracles.hpp"

using namespace diagform;

namespace {

std::vector<std::size_t> iota(std::size_t n, std::size_t from = 0) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), from);
  return v;
}

TupleMatrix random_tuple(CounterRng& rng, int d, std::size_t rows, std::size_t cols, std::int64_t M) {
  std::vector<std::int64_t> e(rows * cols);
  for (auto& v : e) v = rng.integer(M, 2 * M);
  return TupleMatrix(d, rows, cols, e);
}

mpz_class abs_minor(const IntMatrix& m, std::vector<std::size_t> rows, std::vector<std::size_t> cols) {
  return abs(minor_det_unbounded(m, rows, cols));
}

}  // namespace

TEST_CASE("matrices of a hand tuple") {
  const auto x = TupleMatrix::from_rows(2, {{1, 2}, {2, 1}});
  const auto m = build_matrices(x);
  CHECK(m.differences == int_matrix({{1, 4}, {3, -3}}));
  CHECK(m.powers == int_matrix({{1, 4}, {4, 1}}));
  CHECK(exact_rank(m.differences) == 2);
  const auto same = build_matrices(TupleMatrix::from_rows(2, {{3, 5}, {3, 5}}));
  CHECK(exact_rank(same.differences) == 1);
  CHECK_THROWS_AS(TupleMatrix::from_rows(2, {{0, 1}}), PreconditionError);
  CHECK_THROWS_AS(TupleMatrix::from_rows(2, {{1, 1}, {1}}), PreconditionError);
}

TEST_CASE("doubled matrix takes differences within each half") {
  const auto x = TupleMatrix::from_rows(2, {{1, 2}, {2, 2}, {3, 1}, {1, 1}});
  const auto m = build_matrices(x, true);
  CHECK(m.differences == int_matrix({{1, 4}, {3, 0}, {9, 1}, {-8, 0}}));
  CHECK_THROWS_AS(build_matrices(TupleMatrix::from_rows(2, {{1}, {2}, {3}}), true), PreconditionError);
}

TEST_CASE("rank of T equals rank of T' on random tuples") {
  CounterRng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto rows = static_cast<std::size_t>(rng.integer(2, 4));
    const auto cols = static_cast<std::size_t>(rng.integer(2, 4));
    const auto x = random_tuple(rng, static_cast<int>(rng.integer(2, 4)), rows, cols, rng.integer(1, 3));
    const auto m = build_matrices(x);
    CHECK(exact_rank(m.differences) == exact_rank(m.powers));
  }
}

TEST_CASE("optimal arrangement") {
  const auto a = optimally_arrange(int_matrix({{1, 9}, {4, 1}}));
  CHECK(a.permutation == std::vector<std::size_t>{1, 0});
  CHECK(a.arranged == int_matrix({{9, 1}, {1, 4}}));
  const auto id = optimally_arrange(int_matrix({{9, 1}, {1, 4}}));
  CHECK(id.permutation == std::vector<std::size_t>{0, 1});
  // Ties go to the smallest original column.
  const auto tie = optimally_arrange(int_matrix({{2, 5, 5}, {1, 1, 3}}));
  CHECK(tie.permutation[0] == 1);
  CHECK_THROWS_AS(optimally_arrange(int_matrix({{1, 2}, {2, 4}})), ArrangementError);
}

TEST_CASE("arrangement inequalities, rank and minors survive arranging") {
  CounterRng rng(2);
  int checked = 0;
  while (checked < 300) {
    const auto rows = static_cast<std::size_t>(rng.integer(2, 4));
    const auto cols = static_cast<std::size_t>(rng.integer(rows, 5));
    const auto x = random_tuple(rng, 2, rows, cols, rng.integer(1, 6));
    const auto p = build_matrices(x).powers;
    if (exact_rank(p) < rows) continue;
    ++checked;
    const auto arr = optimally_arrange(p);
    CHECK(exact_rank(arr.arranged) == rows);
    for (std::size_t n = 1; n <= rows; ++n) {
      auto lead_cols = iota(n);
      const mpz_class lead = abs_minor(arr.arranged, iota(n), lead_cols);
      CHECK(lead > 0);
      for (std::size_t m = n; m < cols; ++m) {
        auto c = iota(n - 1);
        c.push_back(m);
        CHECK(abs_minor(arr.arranged, iota(n), c) <= lead);
      }
    }
    // The multiset of full minors is a permutation invariant.
    std::vector<mpz_class> before, after;
    std::vector<std::size_t> sel(rows);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
      if (pos == rows) {
        before.push_back(abs(minor_det_unbounded(p, iota(rows), sel)));
        after.push_back(abs(minor_det_unbounded(arr.arranged, iota(rows), sel)));
        return;
      }
      for (std::size_t c = start; c < cols; ++c) {
        sel[pos] = c;
        rec(pos + 1, c + 1);
      }
    };
    rec(0, 0);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
}

TEST_CASE("delta profile") {
  const auto d = delta_profile(int_matrix({{9, 1}, {1, 4}}));
  CHECK(d == std::vector<mpz_class>{9, 35});
  // Odd n < ell takes the larger of two minors; odd ell ends on the leading minor.
  const auto m = int_matrix({{5, 1, 0}, {1, 3, 1}, {7, 2, 4}});
  const auto p = delta_profile(m);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 5);
  CHECK(p[1] == 14);
  CHECK(p[2] == abs(oracle::cofactor_det({{5, 1, 0}, {1, 3, 1}, {7, 2, 4}})));
  const auto q = delta_profile(int_matrix({{2, 1}, {7, 4}}));
  CHECK(q[0] == 7);
  CHECK_THROWS_AS(delta_profile(int_matrix({{0, 1}, {1, 0}})), PreconditionError);
}

TEST_CASE("dependency coefficients") {
  const auto dup = build_matrices(TupleMatrix::from_rows(2, {{2, 3, 4}, {5, 1, 2}, {2, 3, 4}})).powers;
  const auto dep = dependency_coefficients(dup, 2);
  REQUIRE(dep.coeffs.size() == 1);
  CHECK(dep.coeffs[0][0] == 1);
  CHECK(dep.coeffs[0][1] == 0);
  // Squares (1,1,1), (4,1,1), (1,4,1) span (4,4,1) with rho = (-1, 1, 1).
  const auto three = build_matrices(TupleMatrix::from_rows(2, {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {2, 2, 1}})).powers;
  const auto d3 = dependency_coefficients(three, 3);
  CHECK(d3.coeffs[0] == std::vector<mpq_class>{-1, 1, 1});
  // A relation with rho = (1, 1) from Pythagorean columns: 3^2+4^2 = 5^2, 5^2+12^2 = 13^2, 8^2+15^2 = 17^2.
  const auto pyth = build_matrices(TupleMatrix::from_rows(2, {{3, 5, 8}, {4, 12, 15}, {5, 13, 17}})).powers;
  const auto dp = dependency_coefficients(pyth, 2);
  CHECK(dp.coeffs[0] == std::vector<mpq_class>{1, 1});
  CHECK_THROWS_AS(dependency_coefficients(int_matrix({{1, 2}, {2, 4}, {1, 1}}), 2), ArrangementError);
  CHECK_THROWS_AS(dependency_coefficients(int_matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 2), Error);
}

TEST_CASE("column classification and ratios") {
  const auto x = TupleMatrix::from_rows(2, {{1, 5, 1, 4}, {2, 5, 1, 7}, {3, 5, 2, 4}});
  CHECK(classify_column(x, 0) == ColumnKind::typical);
  CHECK(classify_column(x, 1) == ColumnKind::constant);
  CHECK(classify_column(x, 2) == ColumnKind::degenerate);
  CHECK(column_ratio(x, 0) == mpq_class(8, 3));
  CHECK(column_ratio(x, 0).get_den() == 3);
  CHECK(column_ratio(x, 3) == 0);
  CHECK_THROWS_AS(column_ratio(x, 1), DegenerateError);
  const auto y = TupleMatrix::from_rows(3, {{2}, {5}, {5}});
  CHECK(column_ratio(y, 0) == 1);
  const auto neg = TupleMatrix::from_rows(2, {{3}, {1}, {2}});
  const auto r = column_ratio(neg, 0);
  CHECK(r == mpq_class(5, 8));
  CHECK(r.get_den() > 0);
}

TEST_CASE("difference magnitudes are ordered") {
  CounterRng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_tuple(rng, 2, 3, 3, 10);
    const auto m = difference_magnitudes(x);
    CHECK(m.X >= m.Y);
    CHECK(m.Y >= m.Z);
    const auto c = m.column;
    CHECK(m.X == std::llabs(x(m.row_order[0], c) - x(m.row_order[1], c)));
    CHECK(m.Z == std::llabs(x(m.row_order[1], c) - x(m.row_order[2], c)));
  }
}

TEST_CASE("rank-2 three-row tuples: typical column ratios follow from rho") {
  // With row3 = rho1 row1 + rho2 row2 (as d-th powers), every column with
  // x_2 != x_1 satisfies q_i = (x3^d - x1^d)/(x2^d - x1^d) = rho2 + (rho1 + rho2 - 1) x1^d/(x2^d - x1^d).
  const auto x = TupleMatrix::from_rows(2, {{3, 5, 8}, {4, 12, 15}, {5, 13, 17}});
  const auto rec = analyse_tuple(x);
  REQUIRE(rec.dependency);
  const auto& rho = rec.dependency->coeffs[0];
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(rec.ratios[i]);
    const mpq_class p1 = x(0, i) * x(0, i), p2 = x(1, i) * x(1, i);
    const mpq_class expect = rho[1] + (rho[0] + rho[1] - 1) * p1 / (p2 - p1);
    CHECK(*rec.ratios[i] == expect);
  }
}

TEST_CASE("analyse_tuple full rank") {
  const auto rec = analyse_tuple(TupleMatrix::from_rows(2, {{1, 3}, {2, 1}}));
  CHECK(rec.rank == 2);
  CHECK(rec.arrangement == std::vector<std::size_t>{1, 0});
  CHECK(rec.delta == std::vector<mpz_class>{9, 35});
  CHECK(rec.leading_minor == 35);
  CHECK(rec.max_minor == 35);
  CHECK_FALSE(rec.dependency);
}

TEST_CASE("census against the committed golden histogram") {
  CensusConfig cfg;
  cfg.rows = 2;
  cfg.cols = 2;
  cfg.degree = 2;
  cfg.M = 1;
  const auto h = census(cfg);
  std::ostringstream out;
  write_census_csv(out, cfg, h);
  std::ifstream golden(std::string(DIAGFORM_GOLDEN_DIR) + "/census_l2_k2_d2_M1.csv");
  REQUIRE(golden);
  std::stringstream want;
  want << golden.rdbuf();
  CHECK(out.str() == want.str());
  CHECK(h.tuples == 12);
  CHECK(h.count(1) == 2);
  CHECK(h.arrangement_failures == 0);
}

TEST_CASE("census bookkeeping") {
  CensusConfig cfg;
  cfg.rows = 3;
  cfg.cols = 3;
  cfg.degree = 2;
  cfg.M = 2;
  cfg.threshold = mpz_class(100);
  const auto h = census(cfg);
  // Every 3x3 tuple over {2,3,4} with distinct rows.
  CHECK(h.tuples == 27 * 26 * 25);
  CHECK(h.count(3) + h.rank_deficient == h.tuples);
  CHECK(h.arrangement_failures == 0);
  CHECK(h.single_coefficient_unexplained == 0);
  CHECK(h.wide_dependencies == 0);  // two basis rows cannot give three coefficients
  std::uint64_t below = 0;
  oracle::for_each_point(9, 2, 4, [&](const std::vector<std::int64_t>& e) {
    const TupleMatrix x(2, 3, 3, e);
    if (!x.rows_distinct()) return;
    const auto rec = analyse_tuple(x);
    if (rec.rank == 3 && rec.max_minor <= 100) ++below;
  });
  CHECK(h.full_rank_below == below);
  std::ostringstream out;
  write_census_csv(out, cfg, h);
  CHECK(out.str().find("3,le_D," + std::to_string(below) + ",3,3,2,2,100,exhaustive,NA") != std::string::npos);
}

TEST_CASE("census: single-coefficient rows are always proportional, wide relations exist") {
  CensusConfig cfg;
  cfg.rows = 4;
  cfg.cols = 3;
  cfg.degree = 2;
  cfg.M = 1;
  const auto h = census(cfg);
  CHECK(h.single_coefficient_unexplained == 0);
  // The tuple (1,1,1),(2,1,1),(1,2,1),(2,2,1) has no proportional rows yet needs three coefficients.
  CHECK(h.wide_dependencies > 0);
}

TEST_CASE("sampled census is reproducible and the halves rule is looser") {
  CensusConfig cfg;
  cfg.rows = 3;
  cfg.cols = 3;
  cfg.degree = 3;
  cfg.M = 20;
  cfg.mode = CensusMode::sampled;
  cfg.samples = 3000;
  cfg.seed = 42;
  const auto a = census(cfg);
  const auto b = census(cfg);
  CHECK(a.bins == b.bins);
  CHECK(a.tuples == 3000);
  cfg.seed = 43;
  CHECK(census(cfg).bins != a.bins);
  cfg.seed.reset();
  CHECK_THROWS_AS(census(cfg), PreconditionError);

  CensusConfig halves;
  halves.rows = 4;
  halves.cols = 2;
  halves.M = 1;
  halves.distinct = DistinctRule::halves;
  CensusConfig strict = halves;
  strict.distinct = DistinctRule::all_rows;
  CHECK(census(halves).tuples == 12 * 12);
  CHECK(census(strict).tuples == 4 * 3 * 2 * 1);
  halves.rows = 3;
  CHECK_THROWS_AS(census(halves), PreconditionError);
  CensusConfig huge;
  huge.rows = 4;
  huge.cols = 4;
  huge.M = 10;
  CHECK_THROWS_AS(census(huge), ResourceError);
}

TEST_CASE("census growth exponent") {
  const std::vector<std::int64_t> grid = {2, 3, 4, 6};
  std::vector<CensusHistogram> hists;
  for (auto M : grid) {
    CensusConfig c;
    c.rows = 2;
    c.cols = 2;
    c.M = M;
    hists.push_back(census(c));
  }
  const auto full = census_exponent_fit(grid, hists, [](const CensusHistogram& h) { return h.count(2); });
  const auto low = census_exponent_fit(grid, hists, [](const CensusHistogram& h) { return h.count(1); });
  CHECK(full.slope > 3.0);
  CHECK(low.slope < full.slope);
}
