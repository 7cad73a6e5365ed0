#include "diagform/exact.hpp"

#include <algorithm>
#include <cmath>

#include "diagform/errors.hpp"

namespace diagform {

mpz_class to_mpz(Int128 v) {
  const bool negative = v < 0;
  auto u = static_cast<unsigned __int128>(negative ? -(v + 1) : v) + (negative ? 1 : 0);
  mpz_class hi = static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64));
  mpz_class lo = static_cast<unsigned long>(static_cast<std::uint64_t>(u));
  mpz_class r = (hi << 64) + lo;
  return negative ? mpz_class(-r) : r;
}

Int128 to_int128(const mpz_class& v) {
  mpz_class a = abs(v);
  mpz_class hi = a >> 64;
  mpz_class lo = a - (hi << 64);
  const auto u = (static_cast<unsigned __int128>(hi.get_ui()) << 64) | lo.get_ui();
  const auto r = static_cast<Int128>(u);
  return sgn(v) < 0 ? -r : r;
}

std::string to_string(Int128 v) { return to_mpz(v).get_str(); }

double hadamard_log2(const IntMatrix& m) {
  double bits = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    // Sum of squares in the log domain via mpz to avoid overflow.
    mpz_class ss = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) ss += m(r, c) * m(r, c);
    if (ss > 1) {
      long exp = 0;
      const double mant = mpz_get_d_2exp(&exp, ss.get_mpz_t());
      bits += 0.5 * (std::log2(mant) + static_cast<double>(exp));
    }
  }
  return bits;
}

double hadamard_log2(const Matrix<Int128>& m) {
  double bits = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    long double ss = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const long double v = static_cast<long double>(m(r, c));
      ss += v * v;
    }
    if (ss > 1) bits += 0.5 * std::log2(static_cast<double>(ss));
  }
  return bits;
}

std::size_t exact_rank(const IntMatrix& m) {
  if (fits_fixed_width(hadamard_log2(m))) {
    Matrix<Int128> f(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) f(r, c) = to_int128(m(r, c));
    return rank_of(std::move(f));
  }
  return rank_of(m);
}

mpz_class minor_det_unbounded(const IntMatrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  if (rows.size() != cols.size()) throw PreconditionError("minor_det: row and column sets differ in size");
  if (rows.empty()) return 1;
  return determinant_of(m.select(rows, cols));
}

mpz_class minor_det(const IntMatrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                    bool* used_fast_path) {
  if (rows.size() != cols.size()) throw PreconditionError("minor_det: row and column sets differ in size");
  for (auto r : rows)
    if (r >= m.rows()) throw PreconditionError("minor_det: row index out of range");
  for (auto c : cols)
    if (c >= m.cols()) throw PreconditionError("minor_det: column index out of range");
  if (rows.empty()) return 1;
  const IntMatrix sub = m.select(rows, cols);
  const bool fast = fits_fixed_width(hadamard_log2(sub));
  if (used_fast_path) *used_fast_path = fast;
  if (!fast) return determinant_of(sub);
  Matrix<Int128> f(sub.rows(), sub.cols());
  for (std::size_t r = 0; r < sub.rows(); ++r)
    for (std::size_t c = 0; c < sub.cols(); ++c) f(r, c) = to_int128(sub(r, c));
  return to_mpz(determinant_of(std::move(f)));
}

IntMatrix int_matrix(const std::vector<std::vector<long long>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  IntMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw PreconditionError("int_matrix: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = static_cast<long>(rows[r][c]);
  }
  return m;
}

}  // namespace diagform
