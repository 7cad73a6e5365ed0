#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace diagform {

// Axis-aligned product of half-open intervals [lo_i, hi_i).
class Box {
 public:
  Box(std::vector<double> lo, std::vector<double> hi);

  // Single interval [lo, hi).
  static Box interval(double lo, double hi) { return Box({lo}, {hi}); }

  std::size_t dimension() const { return lo_.size(); }
  double lo(std::size_t i) const { return lo_[i]; }
  double hi(std::size_t i) const { return hi_[i]; }
  const std::vector<double>& lows() const { return lo_; }
  const std::vector<double>& highs() const { return hi_; }

  double volume() const;
  bool contains(std::span<const double> point) const;
  bool contains_axis(std::size_t axis, double v) const { return lo_[axis] <= v && v < hi_[axis]; }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

// q(x) = sum_i alpha_i x_i^d over positive integer x.
class DiagonalForm {
 public:
  DiagonalForm(int degree, std::vector<double> coefficients);

  int degree() const { return degree_; }
  std::size_t dimension() const { return alpha_.size(); }
  const std::vector<double>& coefficients() const { return alpha_; }
  double coefficient(std::size_t i) const { return alpha_[i]; }

  // Same form with every coefficient multiplied by t > 0.
  DiagonalForm scaled(double t) const;

 private:
  int degree_;
  std::vector<double> alpha_;
};

// Exact x^d for x >= 0; throws RangeError if the result exceeds 2^63 - 1.
std::uint64_t checked_power(std::uint64_t x, int d);

// Sum of alpha_i x_i^d. Powers are exact; the weighted terms are added from
// largest to smallest. Throws PreconditionError for x_i < 1 or a length
// mismatch, RangeError when a power overflows.
double eval_form(const DiagonalForm& form, std::span<const std::int64_t> x);

// Gamma(1+1/d)^k / (Gamma(1+k/d) prod alpha_i^{1/d}): the volume of
// {x > 0 : q(x) <= 1}, which makes c * q^{k/d} have unit mean spacing.
double normalization_constant(const DiagonalForm& form);

// c * q(x)^{k/d}.
double normalized_value(const DiagonalForm& form, std::span<const std::int64_t> x);

// Same as normalized_value with c supplied by the caller (hot loops).
inline double normalized_from_q(double q, double c, double exponent);

}  // namespace diagform

#include <cmath>

inline double diagform::normalized_from_q(double q, double c, double exponent) {
  return exponent == 1.0 ? c * q : c * std::pow(q, exponent);
}
