#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace diagform {

// Dense row-major matrix over a ring scalar (mpz_class, __int128, mpq_class).
template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, S(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  S& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const S& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, a), (*this)(r, b));
  }

  // Submatrix on the given rows and columns, in the given order.
  Matrix select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = (*this)(rows[i], cols[j]);
    return out;
  }

  bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> data_;
};

using IntMatrix = Matrix<mpz_class>;
using Int128 = __int128;

inline Int128 magnitude(Int128 v) { return v < 0 ? -v : v; }
inline mpz_class magnitude(const mpz_class& v) { return abs(v); }
inline bool is_zero(Int128 v) { return v == 0; }
inline bool is_zero(const mpz_class& v) { return sgn(v) == 0; }

mpz_class to_mpz(Int128 v);
Int128 to_int128(const mpz_class& v);  // caller guarantees |v| < 2^127
std::string to_string(Int128 v);

// Fraction-free (Bareiss) row echelon form in place. Every intermediate entry
// is a minor of the input, so divisions are exact. Returns the pivot columns;
// the rank is their count. With a square input and full rank the last pivot
// equals the determinant up to the sign of the row swaps, returned in *sign.
template <class S>
std::vector<std::size_t> bareiss_echelon(Matrix<S>& a, int* sign = nullptr) {
  std::vector<std::size_t> pivots;
  S prev(1);
  int s = 1;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    std::size_t p = row;
    while (p < a.rows() && is_zero(a(p, col))) ++p;
    if (p == a.rows()) continue;
    if (p != row) {
      a.swap_rows(p, row);
      s = -s;
    }
    const S pivot = a(row, col);
    for (std::size_t i = row + 1; i < a.rows(); ++i) {
      for (std::size_t j = col + 1; j < a.cols(); ++j) {
        S t = a(i, j) * pivot - a(i, col) * a(row, j);
        a(i, j) = t / prev;
      }
      a(i, col) = S(0);
    }
    prev = pivot;
    pivots.push_back(col);
    ++row;
  }
  if (sign) *sign = s;
  return pivots;
}

template <class S>
std::size_t rank_of(Matrix<S> a) {
  return bareiss_echelon(a).size();
}

template <class S>
S determinant_of(Matrix<S> a) {
  int sign = 1;
  const auto pivots = bareiss_echelon(a, &sign);
  if (pivots.size() < a.rows()) return S(0);
  const S d = a(a.rows() - 1, a.cols() - 1);
  return sign < 0 ? S(-d) : d;
}

// log2 of prod_rows max(1, ||row||_2): bounds every minor of the matrix.
double hadamard_log2(const IntMatrix& m);
double hadamard_log2(const Matrix<Int128>& m);

// True when every Bareiss intermediate product fits in a signed 128-bit
// integer: products are at most 2 B^2 with B the Hadamard bound.
inline bool fits_fixed_width(double hadamard_bits) { return hadamard_bits <= 62.0; }

std::size_t exact_rank(const IntMatrix& m);

// Determinant of the rows x cols submatrix by fraction-free elimination. Uses
// the 128-bit path only when the Hadamard bound certifies it; *used_fast_path
// reports which path ran.
mpz_class minor_det(const IntMatrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                    bool* used_fast_path = nullptr);
mpz_class minor_det_unbounded(const IntMatrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols);

// Parses a matrix given row-wise, e.g. {{"1", "4"}, {"3", "-3"}}.
IntMatrix int_matrix(const std::vector<std::vector<long long>>& rows);

}  // namespace diagform
