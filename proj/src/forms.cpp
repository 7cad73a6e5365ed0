#include "diagform/forms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "diagform/errors.hpp"

namespace diagform {

Box::Box(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size())
    throw PreconditionError("Box: bounds must be nonempty and of equal length");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || !(lo_[i] < hi_[i]))
      throw PreconditionError("Box: require finite lo < hi on axis " + std::to_string(i));
  }
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) v *= hi_[i] - lo_[i];
  return v;
}

bool Box::contains(std::span<const double> point) const {
  if (point.size() != lo_.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i)
    if (!contains_axis(i, point[i])) return false;
  return true;
}

DiagonalForm::DiagonalForm(int degree, std::vector<double> coefficients)
    : degree_(degree), alpha_(std::move(coefficients)) {
  if (degree_ < 2) throw PreconditionError("DiagonalForm: degree must be >= 2");
  if (alpha_.size() < 2) throw PreconditionError("DiagonalForm: dimension must be >= 2");
  for (double a : alpha_) {
    if (!std::isfinite(a) || !(a > 0.0))
      throw PreconditionError("DiagonalForm: coefficients must be finite and positive");
  }
}

DiagonalForm DiagonalForm::scaled(double t) const {
  std::vector<double> a = alpha_;
  for (double& v : a) v *= t;
  return DiagonalForm(degree_, std::move(a));
}

std::uint64_t checked_power(std::uint64_t x, int d) {
  constexpr std::uint64_t limit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  std::uint64_t r = 1;
  for (int i = 0; i < d; ++i) {
    if (__builtin_mul_overflow(r, x, &r) || r > limit)
      throw RangeError("power " + std::to_string(x) + "^" + std::to_string(d) + " exceeds 2^63");
  }
  return r;
}

double eval_form(const DiagonalForm& form, std::span<const std::int64_t> x) {
  const std::size_t k = form.dimension();
  if (x.size() != k) throw PreconditionError("eval_form: argument length does not match dimension");
  constexpr std::size_t kInline = 16;
  double inline_terms[kInline];
  std::vector<double> heap_terms;
  double* terms = inline_terms;
  if (k > kInline) {
    heap_terms.resize(k);
    terms = heap_terms.data();
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] < 1) throw PreconditionError("eval_form: arguments must be positive integers");
    terms[i] = form.coefficient(i) * static_cast<double>(checked_power(static_cast<std::uint64_t>(x[i]), form.degree()));
  }
  std::sort(terms, terms + k, std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += terms[i];
  return s;
}

double normalization_constant(const DiagonalForm& form) {
  const double d = form.degree();
  const double k = static_cast<double>(form.dimension());
  // Log domain keeps large k away from overflow in Gamma.
  double log_c = k * std::lgamma(1.0 + 1.0 / d) - std::lgamma(1.0 + k / d);
  for (double a : form.coefficients()) log_c -= std::log(a) / d;
  return std::exp(log_c);
}

double normalized_value(const DiagonalForm& form, std::span<const std::int64_t> x) {
  const double exponent = static_cast<double>(form.dimension()) / form.degree();
  return normalized_from_q(eval_form(form, x), normalization_constant(form), exponent);
}

}  // namespace diagform
