#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diagform/dioph.hpp"
#include "diagform/exact.hpp"

namespace diagform {

// ell rows of k positive integers x_{j,i} and a degree d.
class TupleMatrix {
 public:
  TupleMatrix(int degree, std::size_t rows, std::size_t cols, std::vector<std::int64_t> entries);
  static TupleMatrix from_rows(int degree, const std::vector<std::vector<std::int64_t>>& rows);

  int degree() const { return degree_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t operator()(std::size_t j, std::size_t i) const { return entries_[j * cols_ + i]; }
  std::span<const std::int64_t> row(std::size_t j) const { return {entries_.data() + j * cols_, cols_}; }

  bool rows_distinct() const;
  // Rows j and j' are positive multiples of one another.
  bool rows_proportional(std::size_t a, std::size_t b) const;
  bool has_proportional_rows() const;

 private:
  int degree_;
  std::size_t rows_, cols_;
  std::vector<std::int64_t> entries_;
};

struct TupleMatrices {
  IntMatrix differences;  // T: row 1 = x_1^d, row j = x_j^d - x_1^d
  IntMatrix powers;       // T': row j = x_j^d
};

// With doubled set, the rows split into an x-half and a y-half and T takes
// differences against the first row of each half (the 2 ell-row matrix).
TupleMatrices build_matrices(const TupleMatrix& x, bool doubled = false);

struct Arrangement {
  std::vector<std::size_t> permutation;  // permutation[p] = original column placed at p
  IntMatrix arranged;
};

// Greedy column arrangement: for n = 1..ell, bring to position n the column m >= n
// maximizing |det(rows 1..n, columns 1..n-1, m)|, ties to the smallest original
// index. Afterwards |T^{1..n}_{1..n}| >= |T^{1..n-1,m}_{1..n}| for all m > n.
// Requires rank = number of rows (ArrangementError otherwise).
Arrangement optimally_arrange(const IntMatrix& powers);

// Delta_n = |leading n-minor| for even n; for odd n < ell the max of that and the
// minor on rows {1..n-1, n+1}; Delta_ell for odd ell is the leading minor.
std::vector<mpz_class> delta_profile(const IntMatrix& arranged);

struct Dependency {
  std::size_t rank = 0;
  std::vector<std::size_t> basis_columns;      // r columns on which the top block is invertible
  std::vector<std::vector<mpq_class>> coeffs;  // coeffs[j - r][nu]: row j = sum_nu coeffs * row nu
};

// Expresses rows r..ell-1 of `powers` through rows 0..r-1 with exact rationals and
// verifies the relation on every column. ArrangementError when the first r rows
// are not independent; Error when a row is not in their span.
Dependency dependency_coefficients(const IntMatrix& powers, std::size_t r);

// Row order putting a maximal independent set of rows first (greedy, stable).
std::vector<std::size_t> independent_rows_first(const IntMatrix& m);

enum class ColumnKind { typical, constant, degenerate };
std::string to_string(ColumnKind kind);

// Three-row tuples only.
ColumnKind classify_column(const TupleMatrix& x, std::size_t column);
// (x_3^d - x_1^d) / (x_2^d - x_1^d) in lowest terms; DegenerateError if x_2 = x_1.
mpq_class column_ratio(const TupleMatrix& x, std::size_t column);

struct DifferenceMagnitudes {
  std::size_t column = 0;                // column holding the largest pairwise difference
  std::vector<std::size_t> row_order;   // relabelled rows (1, 2, 3)
  std::int64_t X = 0;  // |x_{1,1} - x_{2,1}|
  std::int64_t Y = 0;  // |x_{1,1} - x_{3,1}|
  std::int64_t Z = 0;  // |x_{2,1} - x_{3,1}|, with Z <= Y <= X
};
DifferenceMagnitudes difference_magnitudes(const TupleMatrix& x);

// Everything the census knows about one tuple.
struct CensusRecord {
  std::size_t rank = 0;
  std::vector<mpz_class> delta;              // full rank only
  std::vector<std::size_t> arrangement;      // full rank only
  mpz_class leading_minor;                   // |det T_1| of the arranged matrix, full rank only
  mpz_class max_minor;                       // largest |ell x ell minor|, full rank only
  std::optional<DifferenceMagnitudes> magnitudes;     // three-row tuples
  std::vector<ColumnKind> columns;                    // three-row tuples
  std::vector<std::optional<mpq_class>> ratios;       // three-row tuples; empty where x_2 = x_1
  std::optional<Dependency> dependency;               // rank-deficient tuples
};

CensusRecord analyse_tuple(const TupleMatrix& x);

enum class CensusMode { exhaustive, sampled };
enum class DistinctRule { all_rows, halves };  // halves: first and second half separately

struct CensusConfig {
  std::size_t rows = 2;  // ell (2 ell for the doubled matrix)
  std::size_t cols = 2;  // k
  int degree = 2;
  std::int64_t M = 1;
  CensusMode mode = CensusMode::exhaustive;
  std::uint64_t samples = 0;
  std::optional<std::uint64_t> seed;
  std::optional<mpz_class> threshold;  // D
  DistinctRule distinct = DistinctRule::all_rows;
  double exhaustive_cap = 1e8;
};

// Histogram key: rank and dyadic class floor(log2 Delta_ell); class -1 for rank < ell.
using CensusKey = std::pair<std::size_t, int>;

struct CensusHistogram {
  std::map<CensusKey, std::uint64_t> bins;
  std::uint64_t tuples = 0;               // tuples passing the distinctness rule
  std::uint64_t full_rank_below = 0;      // full rank with max minor <= D
  std::uint64_t rank_deficient = 0;
  // Dependent rows with fewer than two nonzero coefficients. Such a row is
  // necessarily proportional to a basis row; unexplained counts that are not.
  std::uint64_t single_coefficient_rows = 0;
  std::uint64_t single_coefficient_unexplained = 0;
  // Dependent rows with more than two nonzero coefficients among tuples with
  // no proportional rows.
  std::uint64_t wide_dependencies = 0;
  std::uint64_t arrangement_failures = 0;  // arrangement inequality violations after arranging

  std::uint64_t count(std::size_t rank) const;
};

CensusHistogram census(const CensusConfig& config);

void write_census_csv(std::ostream& out, const CensusConfig& config, const CensusHistogram& hist);

// Growth exponent of a histogram selection over an M grid.
SlopeFit census_exponent_fit(std::span<const std::int64_t> grid, std::span<const CensusHistogram> hists,
                             const std::function<std::uint64_t(const CensusHistogram&)>& selector);

}  // namespace diagform
