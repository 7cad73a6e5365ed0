#include "diagform/census.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "diagform/errors.hpp"
#include "diagform/forms.hpp"
#include "diagform/parallel.hpp"
#include "diagform/rng.hpp"

namespace diagform {
namespace {

template <class S>
S power_entry(std::int64_t x, int d) {
  const auto p = checked_power(static_cast<std::uint64_t>(x), d);
  if constexpr (std::is_same_v<S, mpz_class>) {
    return mpz_class(static_cast<unsigned long>(p));
  } else {
    return static_cast<S>(p);
  }
}

template <class S>
Matrix<S> powers_matrix(const TupleMatrix& x) {
  Matrix<S> m(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.rows(); ++j)
    for (std::size_t i = 0; i < x.cols(); ++i) m(j, i) = power_entry<S>(x(j, i), x.degree());
  return m;
}

template <class S>
Matrix<S> differences_matrix(const Matrix<S>& powers, bool doubled) {
  Matrix<S> t = powers;
  const std::size_t half = doubled ? powers.rows() / 2 : powers.rows();
  for (std::size_t j = 0; j < powers.rows(); ++j) {
    const std::size_t base = j < half ? 0 : half;
    if (j == base) continue;
    for (std::size_t i = 0; i < powers.cols(); ++i) t(j, i) = powers(j, i) - powers(base, i);
  }
  return t;
}

std::vector<std::size_t> iota_vec(std::size_t n, std::size_t from = 0) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), from);
  return v;
}

// |det| of rows 0..n-1 against columns 0..n-2 plus column m.
template <class S>
S leading_minor_with(const Matrix<S>& a, std::size_t n, std::size_t m) {
  auto rows = iota_vec(n);
  auto cols = iota_vec(n - 1);
  cols.push_back(m);
  return magnitude(determinant_of(a.select(rows, cols)));
}

template <class S>
std::vector<std::size_t> arrange_in_place(Matrix<S>& a) {
  const std::size_t ell = a.rows();
  const std::size_t k = a.cols();
  std::vector<std::size_t> perm = iota_vec(k);
  for (std::size_t n = 1; n <= ell; ++n) {
    std::size_t best = n - 1;
    S best_value = leading_minor_with(a, n, n - 1);
    for (std::size_t m = n; m < k; ++m) {
      const S v = leading_minor_with(a, n, m);
      if (v > best_value || (v == best_value && perm[m] < perm[best])) {
        best = m;
        best_value = v;
      }
    }
    if (is_zero(best_value)) throw ArrangementError("optimally_arrange: matrix is not of full row rank");
    a.swap_cols(n - 1, best);
    std::swap(perm[n - 1], perm[best]);
  }
  return perm;
}

template <class S>
std::vector<S> deltas_of(const Matrix<S>& a) {
  const std::size_t ell = a.rows();
  std::vector<S> out;
  for (std::size_t n = 1; n <= ell; ++n) {
    auto rows = iota_vec(n);
    const auto cols = iota_vec(n);
    S v = magnitude(determinant_of(a.select(rows, cols)));
    if (n % 2 == 1 && n < ell) {
      rows.back() = n;  // rows {1..n-1, n+1}
      v = std::max(v, magnitude(determinant_of(a.select(rows, cols))));
    }
    out.push_back(v);
  }
  return out;
}

// Number of (n, m) pairs breaking the arrangement inequalities.
template <class S>
std::uint64_t arrangement_violations(const Matrix<S>& a) {
  std::uint64_t bad = 0;
  for (std::size_t n = 1; n <= a.rows(); ++n) {
    const S lead = leading_minor_with(a, n, n - 1);
    for (std::size_t m = n; m < a.cols(); ++m)
      if (leading_minor_with(a, n, m) > lead) ++bad;
  }
  return bad;
}

template <class S>
S max_full_minor(const Matrix<S>& a) {
  const std::size_t ell = a.rows();
  const std::size_t k = a.cols();
  const auto rows = iota_vec(ell);
  std::vector<std::size_t> cols = iota_vec(ell);
  S best(0);
  for (;;) {
    best = std::max(best, magnitude(determinant_of(a.select(rows, cols))));
    std::size_t i = ell;
    while (i > 0 && cols[i - 1] == k - ell + i - 1) --i;
    if (i == 0) break;
    ++cols[i - 1];
    for (std::size_t j = i; j < ell; ++j) cols[j] = cols[j - 1] + 1;
  }
  return best;
}

int dyadic_class(const mpz_class& v) { return static_cast<int>(mpz_sizeinbase(v.get_mpz_t(), 2)) - 1; }
int dyadic_class(Int128 v) {
  auto u = static_cast<unsigned __int128>(magnitude(v));
  int bits = 0;
  while (u) {
    u >>= 1;
    ++bits;
  }
  return bits - 1;
}

// Exact rational solve of a square system by Gauss-Jordan.
std::vector<mpq_class> solve_rational(Matrix<mpq_class> a, std::vector<mpq_class> b) {
  const std::size_t n = a.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(a(p, c)) == 0) ++p;
    if (p == n) throw ArrangementError("dependency_coefficients: singular leading block");
    a.swap_rows(p, c);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || sgn(a(r, c)) == 0) continue;
      const mpq_class f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    b[i] /= a(i, i);
    b[i].canonicalize();
  }
  return b;
}

}  // namespace

TupleMatrix::TupleMatrix(int degree, std::size_t rows, std::size_t cols, std::vector<std::int64_t> entries)
    : degree_(degree), rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (degree_ < 2) throw PreconditionError("TupleMatrix: degree must be >= 2");
  if (rows_ < 1 || cols_ < 1 || entries_.size() != rows_ * cols_)
    throw PreconditionError("TupleMatrix: entry count does not match the shape");
  for (auto v : entries_)
    if (v < 1) throw PreconditionError("TupleMatrix: entries must be positive");
}

TupleMatrix TupleMatrix::from_rows(int degree, const std::vector<std::vector<std::int64_t>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<std::int64_t> e;
  for (const auto& r : rows) {
    if (r.size() != cols) throw PreconditionError("TupleMatrix: ragged rows");
    e.insert(e.end(), r.begin(), r.end());
  }
  return TupleMatrix(degree, rows.size(), cols, std::move(e));
}

bool TupleMatrix::rows_distinct() const {
  for (std::size_t a = 0; a < rows_; ++a)
    for (std::size_t b = a + 1; b < rows_; ++b)
      if (std::equal(row(a).begin(), row(a).end(), row(b).begin())) return false;
  return true;
}

bool TupleMatrix::rows_proportional(std::size_t a, std::size_t b) const {
  const auto ra = row(a);
  const auto rb = row(b);
  for (std::size_t i = 0; i < cols_; ++i)
    if (static_cast<__int128>(ra[i]) * rb[0] != static_cast<__int128>(rb[i]) * ra[0]) return false;
  return true;
}

bool TupleMatrix::has_proportional_rows() const {
  for (std::size_t a = 0; a < rows_; ++a)
    for (std::size_t b = a + 1; b < rows_; ++b)
      if (rows_proportional(a, b)) return true;
  return false;
}

TupleMatrices build_matrices(const TupleMatrix& x, bool doubled) {
  if (doubled && x.rows() % 2 != 0) throw PreconditionError("build_matrices: doubled tuple needs an even row count");
  IntMatrix powers = powers_matrix<mpz_class>(x);
  IntMatrix diffs = differences_matrix(powers, doubled);
  return {std::move(diffs), std::move(powers)};
}

Arrangement optimally_arrange(const IntMatrix& powers) {
  if (powers.rows() > powers.cols()) throw ArrangementError("optimally_arrange: more rows than columns");
  Arrangement out{{}, powers};
  out.permutation = arrange_in_place(out.arranged);
  return out;
}

std::vector<mpz_class> delta_profile(const IntMatrix& arranged) {
  if (arranged.rows() > arranged.cols()) throw PreconditionError("delta_profile: more rows than columns");
  if (arrangement_violations(arranged) > 0) throw PreconditionError("delta_profile: input is not arranged");
  auto d = deltas_of(arranged);
  for (const auto& v : d)
    if (sgn(v) == 0) throw PreconditionError("delta_profile: input is not an arranged full-rank matrix");
  return d;
}

std::vector<std::size_t> independent_rows_first(const IntMatrix& m) {
  std::vector<std::size_t> chosen, rest;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto trial = chosen;
    trial.push_back(r);
    const auto cols = iota_vec(m.cols());
    if (rank_of(m.select(trial, cols)) == trial.size())
      chosen.push_back(r);
    else
      rest.push_back(r);
  }
  chosen.insert(chosen.end(), rest.begin(), rest.end());
  return chosen;
}

Dependency dependency_coefficients(const IntMatrix& powers, std::size_t r) {
  if (r == 0 || r > powers.rows()) throw PreconditionError("dependency_coefficients: bad rank");
  const auto top_rows = iota_vec(r);
  const auto all_cols = iota_vec(powers.cols());
  IntMatrix top = powers.select(top_rows, all_cols);
  const auto pivots = bareiss_echelon(top);
  if (pivots.size() < r) throw ArrangementError("dependency_coefficients: leading rows are not independent");
  Dependency dep;
  dep.rank = r;
  dep.basis_columns = pivots;
  // Transposed system: sum_nu rho_nu powers(nu, c) = powers(j, c) for basis columns c.
  Matrix<mpq_class> a(r, r);
  for (std::size_t c = 0; c < r; ++c)
    for (std::size_t nu = 0; nu < r; ++nu) a(c, nu) = mpq_class(powers(nu, pivots[c]));
  for (std::size_t j = r; j < powers.rows(); ++j) {
    std::vector<mpq_class> b(r);
    for (std::size_t c = 0; c < r; ++c) b[c] = mpq_class(powers(j, pivots[c]));
    auto rho = solve_rational(a, b);
    for (std::size_t i = 0; i < powers.cols(); ++i) {
      mpq_class s = 0;
      for (std::size_t nu = 0; nu < r; ++nu) s += rho[nu] * powers(nu, i);
      if (s != mpq_class(powers(j, i)))
        throw Error("dependency_coefficients: row " + std::to_string(j + 1) + " is not in the span of the leading rows");
    }
    dep.coeffs.push_back(std::move(rho));
  }
  return dep;
}

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::typical: return "typical";
    case ColumnKind::constant: return "constant";
    case ColumnKind::degenerate: return "degenerate";
  }
  return "?";
}

ColumnKind classify_column(const TupleMatrix& x, std::size_t column) {
  if (x.rows() != 3) throw PreconditionError("classify_column: three-row tuples only");
  const auto a = x(0, column), b = x(1, column), c = x(2, column);
  if (a != b && b != c && a != c) return ColumnKind::typical;
  if (a == b && b == c) return ColumnKind::constant;
  return ColumnKind::degenerate;
}

mpq_class column_ratio(const TupleMatrix& x, std::size_t column) {
  if (x.rows() != 3) throw PreconditionError("column_ratio: three-row tuples only");
  const int d = x.degree();
  const auto p1 = power_entry<mpz_class>(x(0, column), d);
  const auto p2 = power_entry<mpz_class>(x(1, column), d);
  const auto p3 = power_entry<mpz_class>(x(2, column), d);
  if (p2 == p1) throw DegenerateError("column_ratio: x_2 = x_1 in column " + std::to_string(column + 1));
  mpq_class q(p3 - p1, p2 - p1);
  q.canonicalize();
  return q;
}

DifferenceMagnitudes difference_magnitudes(const TupleMatrix& x) {
  if (x.rows() != 3) throw PreconditionError("difference_magnitudes: three-row tuples only");
  DifferenceMagnitudes out;
  std::int64_t widest = -1;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    const auto a = x(0, i), b = x(1, i), c = x(2, i);
    const auto w = std::max({std::llabs(a - b), std::llabs(a - c), std::llabs(b - c)});
    if (w > widest) {
      widest = w;
      out.column = i;
    }
  }
  // Relabel rows so |x1-x2| >= |x1-x3| >= |x2-x3| in that column.
  std::vector<std::size_t> best;
  std::size_t order[3] = {0, 1, 2};
  do {
    const auto v = [&](std::size_t r) { return x(order[r], out.column); };
    const auto X = std::llabs(v(0) - v(1)), Y = std::llabs(v(0) - v(2)), Z = std::llabs(v(1) - v(2));
    if (X >= Y && Y >= Z) {
      out.row_order.assign(order, order + 3);
      out.X = X;
      out.Y = Y;
      out.Z = Z;
      break;
    }
  } while (std::next_permutation(order, order + 3));
  return out;
}

CensusRecord analyse_tuple(const TupleMatrix& x) {
  CensusRecord rec;
  const auto m = build_matrices(x);
  rec.rank = exact_rank(m.powers);
  const std::size_t rank_t = exact_rank(m.differences);
  if (rank_t != rec.rank) throw Error("rank(T) != rank(T') on a tuple; exact arithmetic is broken");
  const std::size_t ell = x.rows();
  if (rec.rank == ell) {
    auto arr = optimally_arrange(m.powers);
    rec.delta = delta_profile(arr.arranged);
    rec.arrangement = arr.permutation;
    rec.leading_minor = rec.delta.back();
    rec.max_minor = max_full_minor(m.powers);
  } else {
    const auto order = independent_rows_first(m.powers);
    rec.dependency = dependency_coefficients(m.powers.select(order, iota_vec(x.cols())), rec.rank);
  }
  if (ell == 3) {
    rec.magnitudes = difference_magnitudes(x);
    for (std::size_t i = 0; i < x.cols(); ++i) {
      rec.columns.push_back(classify_column(x, i));
      if (x(1, i) != x(0, i))
        rec.ratios.emplace_back(column_ratio(x, i));
      else
        rec.ratios.emplace_back(std::nullopt);
    }
  }
  return rec;
}

std::uint64_t CensusHistogram::count(std::size_t rank) const {
  std::uint64_t n = 0;
  for (const auto& [key, c] : bins)
    if (key.first == rank) n += c;
  return n;
}

namespace {

struct TupleOutcome {
  std::size_t rank;
  int delta_class;
  bool below_threshold;
  std::uint64_t arrangement_violations;
};

template <class S>
TupleOutcome analyse_full_rank(const Matrix<S>& powers, const std::optional<mpz_class>& threshold) {
  TupleOutcome out{powers.rows(), -1, false, 0};
  Matrix<S> arranged = powers;
  arrange_in_place(arranged);
  out.arrangement_violations = arrangement_violations(arranged);
  out.delta_class = dyadic_class(deltas_of(arranged).back());
  if (threshold) {
    const S big = max_full_minor(powers);
    if constexpr (std::is_same_v<S, mpz_class>)
      out.below_threshold = big <= *threshold;
    else
      out.below_threshold = to_mpz(big) <= *threshold;
  }
  return out;
}

void tally_tuple(const TupleMatrix& x, const CensusConfig& cfg, CensusHistogram& h) {
  const bool doubled = cfg.distinct == DistinctRule::halves;
  ++h.tuples;
  const auto mp = powers_matrix<mpz_class>(x);
  // A difference row is at most twice as long as a power row.
  const bool fast = fits_fixed_width(hadamard_log2(mp) + static_cast<double>(x.rows()));
  std::size_t rank_p, rank_t;
  TupleOutcome outcome{};
  if (fast) {
    const auto p = powers_matrix<Int128>(x);
    rank_p = rank_of(p);
    rank_t = rank_of(differences_matrix(p, doubled));
    if (rank_p == x.rows() && rank_p == rank_t) outcome = analyse_full_rank(p, cfg.threshold);
  } else {
    rank_p = rank_of(mp);
    rank_t = rank_of(differences_matrix(mp, doubled));
    if (rank_p == x.rows() && rank_p == rank_t) outcome = analyse_full_rank(mp, cfg.threshold);
  }
  if (rank_p != rank_t) throw Error("census: rank(T) != rank(T') on a tuple");
  if (rank_p == x.rows()) {
    ++h.bins[{rank_p, outcome.delta_class}];
    if (outcome.below_threshold) ++h.full_rank_below;
    h.arrangement_failures += outcome.arrangement_violations;
    return;
  }
  ++h.bins[{rank_p, -1}];
  ++h.rank_deficient;
  if (rank_p == 0) return;
  const auto order = independent_rows_first(mp);
  const auto dep = dependency_coefficients(mp.select(order, iota_vec(x.cols())), rank_p);
  const bool proportional = x.has_proportional_rows();
  for (std::size_t j = 0; j < dep.coeffs.size(); ++j) {
    std::size_t nonzero = 0;
    std::size_t partner = 0;
    for (std::size_t nu = 0; nu < rank_p; ++nu)
      if (sgn(dep.coeffs[j][nu]) != 0) {
        ++nonzero;
        partner = nu;
      }
    if (nonzero < 2) {
      ++h.single_coefficient_rows;
      if (nonzero == 0 || !x.rows_proportional(order[rank_p + j], order[partner])) ++h.single_coefficient_unexplained;
    }
    if (nonzero > 2 && !proportional) ++h.wide_dependencies;
  }
}

bool passes_distinctness(const TupleMatrix& x, DistinctRule rule) {
  if (rule == DistinctRule::all_rows) return x.rows_distinct();
  const std::size_t half = x.rows() / 2;
  for (std::size_t a = 0; a < x.rows(); ++a)
    for (std::size_t b = a + 1; b < x.rows(); ++b) {
      if ((a < half) != (b < half)) continue;
      if (std::equal(x.row(a).begin(), x.row(a).end(), x.row(b).begin())) return false;
    }
  return true;
}

void merge_into(CensusHistogram& into, const CensusHistogram& from) {
  for (const auto& [k, v] : from.bins) into.bins[k] += v;
  into.tuples += from.tuples;
  into.full_rank_below += from.full_rank_below;
  into.rank_deficient += from.rank_deficient;
  into.single_coefficient_rows += from.single_coefficient_rows;
  into.single_coefficient_unexplained += from.single_coefficient_unexplained;
  into.wide_dependencies += from.wide_dependencies;
  into.arrangement_failures += from.arrangement_failures;
}

}  // namespace

CensusHistogram census(const CensusConfig& cfg) {
  if (cfg.rows < 1 || cfg.cols < 1) throw PreconditionError("census: empty shape");
  if (cfg.M < 1) throw PreconditionError("census: M must be >= 1");
  if (cfg.distinct == DistinctRule::halves && cfg.rows % 2 != 0)
    throw PreconditionError("census: the halves rule needs an even row count");
  checked_power(static_cast<std::uint64_t>(2 * cfg.M), cfg.degree);
  const std::size_t cells = cfg.rows * cfg.cols;
  const auto side = static_cast<std::uint64_t>(cfg.M + 1);
  constexpr std::size_t kChunks = 256;

  std::vector<CensusHistogram> partial(kChunks);
  if (cfg.mode == CensusMode::exhaustive) {
    const double total = std::pow(static_cast<double>(side), static_cast<double>(cells));
    if (total > cfg.exhaustive_cap)
      throw ResourceError("census: exhaustive mode would visit " + std::to_string(total) + " tuples");
    const auto n = static_cast<std::size_t>(std::llround(total));
    parallel_chunks(n, kChunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
      std::vector<std::int64_t> digits(cells);
      std::size_t idx = begin;
      for (std::size_t p = cells; p-- > 0;) {
        digits[p] = static_cast<std::int64_t>(idx % side);
        idx /= side;
      }
      for (std::size_t t = begin; t < end; ++t) {
        std::vector<std::int64_t> e(cells);
        for (std::size_t p = 0; p < cells; ++p) e[p] = cfg.M + digits[p];
        TupleMatrix x(cfg.degree, cfg.rows, cfg.cols, std::move(e));
        if (passes_distinctness(x, cfg.distinct)) tally_tuple(x, cfg, partial[c]);
        for (std::size_t p = cells; p-- > 0;) {
          if (++digits[p] < static_cast<std::int64_t>(side)) break;
          digits[p] = 0;
        }
      }
    });
  } else {
    if (!cfg.seed) throw PreconditionError("census: sampled mode requires a seed");
    if (cfg.samples == 0) throw PreconditionError("census: sampled mode requires a positive sample count");
    parallel_chunks(cfg.samples, kChunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
      for (std::size_t s = begin; s < end; ++s) {
        CounterRng rng(*cfg.seed, s);
        for (int attempt = 0;; ++attempt) {
          if (attempt == 10000) throw ResourceError("census: cannot draw a tuple satisfying the distinctness rule");
          std::vector<std::int64_t> e(cells);
          for (auto& v : e) v = rng.integer(cfg.M, 2 * cfg.M);
          TupleMatrix x(cfg.degree, cfg.rows, cfg.cols, std::move(e));
          if (!passes_distinctness(x, cfg.distinct)) continue;
          tally_tuple(x, cfg, partial[c]);
          break;
        }
      }
    });
  }
  CensusHistogram out;
  for (const auto& p : partial) merge_into(out, p);
  return out;
}

void write_census_csv(std::ostream& out, const CensusConfig& cfg, const CensusHistogram& hist) {
  const std::string threshold = cfg.threshold ? cfg.threshold->get_str() : "NA";
  const std::string mode = cfg.mode == CensusMode::exhaustive ? "exhaustive" : "sampled";
  const std::string seed = cfg.seed ? std::to_string(*cfg.seed) : "NA";
  const std::string tail = "," + std::to_string(cfg.rows) + "," + std::to_string(cfg.cols) + "," +
                           std::to_string(cfg.degree) + "," + std::to_string(cfg.M) + "," + threshold + "," + mode +
                           "," + seed + "\n";
  out << "r,delta_class,count,ell,k,d,M,D_threshold,mode,seed\n";
  for (const auto& [key, count] : hist.bins)
    out << key.first << "," << (key.second < 0 ? std::string("NA") : std::to_string(key.second)) << "," << count
        << tail;
  if (cfg.threshold) out << cfg.rows << ",le_D," << hist.full_rank_below << tail;
}

SlopeFit census_exponent_fit(std::span<const std::int64_t> grid, std::span<const CensusHistogram> hists,
                             const std::function<std::uint64_t(const CensusHistogram&)>& selector) {
  if (grid.size() != hists.size()) throw PreconditionError("census_exponent_fit: grid and histograms differ in length");
  if (grid.size() < 4) throw PreconditionError("census_exponent_fit: need at least 4 grid points");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x.push_back(static_cast<double>(grid[i]));
    y.push_back(static_cast<double>(selector(hists[i])));
  }
  return loglog_fit(x, y);
}

}  // namespace diagform
