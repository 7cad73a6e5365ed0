#include "diagform/dioph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "diagform/errors.hpp"
#include "diagform/forms.hpp"
#include "diagform/parallel.hpp"

namespace diagform {
namespace {

std::int64_t add_checked(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw RangeError("partial sum exceeds 64 bits");
  return r;
}

std::int64_t mul_checked(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw RangeError("term a_j x_j^d exceeds 64 bits");
  return r;
}

std::int64_t signed_power(std::int64_t x, int d) {
  const auto p = static_cast<std::int64_t>(checked_power(static_cast<std::uint64_t>(x < 0 ? -x : x), d));
  return (x < 0 && d % 2 == 1) ? -p : p;
}

// All partial sums sum_j a_j x_j^d over x_j in values (per coordinate).
std::vector<std::int64_t> half_sums(std::span<const std::int64_t> a, int d, std::span<const std::int64_t> values) {
  std::vector<std::int64_t> sums{0};
  for (std::int64_t coef : a) {
    std::vector<std::int64_t> terms;
    terms.reserve(values.size());
    for (std::int64_t v : values) terms.push_back(mul_checked(coef, signed_power(v, d)));
    std::vector<std::int64_t> next;
    next.reserve(sums.size() * terms.size());
    for (std::int64_t s : sums)
      for (std::int64_t t : terms) next.push_back(add_checked(s, t));
    sums.swap(next);
  }
  return sums;
}

void check_table(double left, double right, std::uint64_t cap) {
  if (left > static_cast<double>(cap) || right > static_cast<double>(cap))
    throw ResourceError("meet-in-the-middle table of " + std::to_string(std::max(left, right)) +
                        " entries exceeds the cap of " + std::to_string(cap));
}

// Plain equation count over coordinates in values, no gcd condition.
std::uint64_t equation_count_plain(std::span<const std::int64_t> a, int d, std::span<const std::int64_t> values,
                                   std::uint64_t cap) {
  const std::size_t k = a.size();
  const std::size_t left_k = (k + 1) / 2;
  const double n = static_cast<double>(values.size());
  check_table(std::pow(n, static_cast<double>(left_k)), std::pow(n, static_cast<double>(k - left_k)), cap);
  const auto left = half_sums(a.first(left_k), d, values);
  const auto right = half_sums(a.subspan(left_k), d, values);
  std::unordered_map<std::int64_t, std::uint64_t> table;
  table.reserve(left.size());
  for (std::int64_t s : left) ++table[s];
  const std::size_t chunks = std::min<std::size_t>(right.size(), 64);
  std::vector<std::uint64_t> partial(chunks, 0);
  parallel_chunks(right.size(), chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::uint64_t hits = 0;
    for (std::size_t i = b; i < e; ++i) {
      if (right[i] == std::numeric_limits<std::int64_t>::min()) continue;
      if (auto it = table.find(-right[i]); it != table.end()) hits += it->second;
    }
    partial[c] = hits;
  });
  return std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
}

std::vector<std::int64_t> symmetric_range(std::int64_t M, bool nonzero) {
  std::vector<std::int64_t> v;
  for (std::int64_t x = -M; x <= M; ++x)
    if (!nonzero || x != 0) v.push_back(x);
  return v;
}

// Moebius function for 1..n by a linear sieve.
std::vector<int> moebius_table(std::int64_t n) {
  std::vector<int> mu(static_cast<std::size_t>(n + 1), 1);
  std::vector<bool> composite(static_cast<std::size_t>(n + 1), false);
  std::vector<std::int64_t> primes;
  if (n >= 0) mu[0] = 0;
  for (std::int64_t i = 2; i <= n; ++i) {
    if (!composite[static_cast<std::size_t>(i)]) {
      primes.push_back(i);
      mu[static_cast<std::size_t>(i)] = -1;
    }
    for (std::int64_t p : primes) {
      if (i * p > n) break;
      composite[static_cast<std::size_t>(i * p)] = true;
      if (i % p == 0) {
        mu[static_cast<std::size_t>(i * p)] = 0;
        break;
      }
      mu[static_cast<std::size_t>(i * p)] = -mu[static_cast<std::size_t>(i)];
    }
  }
  return mu;
}

void check_coefficients(std::span<const std::int64_t> a, int d, bool require_nonzero) {
  if (a.size() < 2) throw PreconditionError("need k >= 2 coefficients");
  if (d < 2) throw PreconditionError("degree must be >= 2");
  if (require_nonzero && std::any_of(a.begin(), a.end(), [](std::int64_t v) { return v == 0; }))
    throw PreconditionError("coefficients must be nonzero");
}

}  // namespace

std::uint64_t count_equation(std::span<const std::int64_t> a, int d, std::int64_t M, EquationOptions opts) {
  check_coefficients(a, d, false);
  if (M < 0) throw PreconditionError("count_equation: M must be >= 0");
  if (!opts.primitive) return equation_count_plain(a, d, symmetric_range(M, opts.nonzero_only), opts.table_cap);
  // Homogeneity: solutions whose coordinates share the factor g are the
  // solutions in the box of radius floor(M/g). Moebius inversion over g then
  // isolates gcd 1; the zero vector (gcd 0) is removed from every term.
  const auto mu = moebius_table(M);
  __int128 total = 0;
  for (std::int64_t g = 1; g <= M; ++g) {
    const int m = mu[static_cast<std::size_t>(g)];
    if (m == 0) continue;
    const auto box = symmetric_range(M / g, opts.nonzero_only);
    std::uint64_t n = equation_count_plain(a, d, box, opts.table_cap);
    if (!opts.nonzero_only) n -= 1;
    total += static_cast<__int128>(m) * static_cast<__int128>(n);
  }
  return static_cast<std::uint64_t>(total);
}

std::uint64_t count_inequality(std::span<const std::int64_t> a, int d, std::int64_t M, double H, std::uint64_t table_cap) {
  check_coefficients(a, d, true);
  if (M < 1) throw PreconditionError("count_inequality: M must be >= 1");
  if (!(H >= 0.0)) throw PreconditionError("count_inequality: H must be >= 0");
  const std::size_t k = a.size();
  const std::size_t left_k = (k + 1) / 2;
  std::vector<std::int64_t> values;
  for (std::int64_t x = M; x <= 2 * M; ++x) values.push_back(x);
  const double n = static_cast<double>(values.size());
  check_table(std::pow(n, static_cast<double>(left_k)), std::pow(n, static_cast<double>(k - left_k)), table_cap);
  auto left = half_sums(a.first(left_k), d, values);
  auto right = half_sums(a.subspan(left_k), d, values);
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  // Integer sums: |l + r| <= H  <=>  -h <= l + r <= h with h = floor(H).
  constexpr double kHuge = 4.0e18;
  const __int128 h = H >= kHuge ? static_cast<__int128>(kHuge) : static_cast<__int128>(std::floor(H));

  const std::size_t chunks = std::min<std::size_t>(right.size(), 64);
  std::vector<std::uint64_t> partial(chunks, 0);
  parallel_chunks(right.size(), chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    // For ascending r the admissible l-range [-h - r, h - r] slides downward;
    // walk r from the top of the chunk so both ends move forward.
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::uint64_t hits = 0;
    for (std::size_t i = e; i-- > b;) {
      const __int128 r = right[i];
      while (lo < left.size() && static_cast<__int128>(left[lo]) < -h - r) ++lo;
      while (hi < left.size() && static_cast<__int128>(left[hi]) <= h - r) ++hi;
      if (hi > lo) hits += hi - lo;
    }
    partial[c] = hits;
  });
  return std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
}

FejerCheck fejer_chain_check(std::int64_t a1, std::int64_t a2, int d, std::int64_t M, double H) {
  if (a1 == 0 || std::llabs(a1) > std::llabs(a2)) throw PreconditionError("fejer_chain_check: need 0 < |a1| <= |a2|");
  FejerCheck out;
  const std::int64_t mixed[] = {a1, -a1, a2, -a2};
  const std::int64_t unit[] = {1, -1, 1, -1};
  out.mixed = count_inequality(mixed, d, M, H);
  out.first = count_inequality(unit, d, M, 2.0 * H / static_cast<double>(std::llabs(a1)));
  out.second = count_inequality(unit, d, M, 2.0 * H / static_cast<double>(std::llabs(a2)));
  // N <= sqrt(2 N1) sqrt(2 N2)  <=>  N^2 <= 4 N1 N2, compared exactly.
  const auto lhs = static_cast<unsigned __int128>(out.mixed) * out.mixed;
  const auto rhs = static_cast<unsigned __int128>(4) * out.first * out.second;
  out.holds = lhs <= rhs;
  return out;
}

SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw PreconditionError("loglog_fit: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < std::max<std::size_t>(min_points, 2))
    throw FitError("loglog_fit: only " + std::to_string(lx.size()) + " usable points");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw FitError("loglog_fit: degenerate abscissae");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.stderr_slope = lx.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : std::nan("");
  fit.points = lx.size();
  return fit;
}

SlopeFit exponent_fit(const std::function<std::uint64_t(std::int64_t)>& count, std::span<const std::int64_t> grid) {
  if (grid.size() < 4) throw PreconditionError("exponent_fit: need at least 4 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw PreconditionError("exponent_fit: grid must be strictly increasing");
  std::vector<double> x, y;
  for (std::int64_t M : grid) {
    x.push_back(static_cast<double>(M));
    y.push_back(static_cast<double>(count(M)));
  }
  return loglog_fit(x, y);
}

}  // namespace diagform
