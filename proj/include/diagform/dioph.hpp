#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace diagform {

inline constexpr std::uint64_t kDefaultTableCap = std::uint64_t{1} << 28;

struct EquationOptions {
  bool primitive = false;     // gcd(x_1..x_k) = 1
  bool nonzero_only = false;  // every x_j != 0
  std::uint64_t table_cap = kDefaultTableCap;
};

// #{x in Z^k : |x_j| <= M, sum a_j x_j^d = 0}, by meet-in-the-middle: the
// larger half of the coordinates is tabulated, the other half scanned.
std::uint64_t count_equation(std::span<const std::int64_t> a, int d, std::int64_t M, EquationOptions opts = {});

// #{x : M <= x_j <= 2M, |sum a_j x_j^d| <= H}, via sorted halves and a
// two-pointer sweep. Requires every a_j != 0.
std::uint64_t count_inequality(std::span<const std::int64_t> a, int d, std::int64_t M, double H,
                               std::uint64_t table_cap = kDefaultTableCap);

struct FejerCheck {
  std::uint64_t mixed = 0;   // N_{(a1,-a1,a2,-a2)}(M, H)
  std::uint64_t first = 0;   // N_{(1,-1,1,-1)}(M, 2H/|a1|)
  std::uint64_t second = 0;  // N_{(1,-1,1,-1)}(M, 2H/|a2|)
  bool holds = false;        // mixed <= sqrt(2 first) sqrt(2 second)
};

// Cauchy-Schwarz bound of a mixed four-variable inequality count by unit
// coefficient counts. Requires 0 < |a1| <= |a2|.
FejerCheck fejer_chain_check(std::int64_t a1, std::int64_t a2, int d, std::int64_t M, double H);

struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

// Least-squares line through (log x, log y); pairs with y <= 0 are dropped.
// Throws FitError when fewer than min_points survive. With exactly two points
// the slope is exact and its standard error is NaN.
SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y, std::size_t min_points = 3);

// Growth exponent of count(M) over a strictly increasing grid of >= 4 points.
SlopeFit exponent_fit(const std::function<std::uint64_t(std::int64_t)>& count, std::span<const std::int64_t> grid);

}  // namespace diagform
