#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "diagform/enumerate.hpp"
#include "diagform/forms.hpp"

namespace diagform {

inline constexpr double kDefaultBruteForceCap = 1e9;

struct CorrelationRequest {
  int order;           // ell >= 2
  Box window;          // I_2 x ... x I_ell, dimension ell - 1
  std::size_t count;   // M, number of leading values used

  void validate(std::size_t available) const;
};

struct CorrelationResult {
  double statistic = 0.0;       // raw_count / M
  std::uint64_t raw_count = 0;
  double poisson_target = 0.0;  // vol(I)
  std::size_t count = 0;        // M
};

// Number of pairwise-distinct index tuples (i_1..i_ell), i_j < M, with
// values[i_j] - values[i_1] in [lo_j, hi_j) for j >= 2, divided by M.
// Values must be sorted ascending. Windows are located per i_1 on the sorted
// array; index coincidences are removed by inclusion-exclusion over set
// partitions (ell <= 4). Orders >= 5 use the brute-force path and raise
// UnsupportedError when M^ell exceeds brute_force_cap.
CorrelationResult ell_correlation(std::span<const double> values, const CorrelationRequest& req,
                                  double brute_force_cap = kDefaultBruteForceCap);
inline CorrelationResult ell_correlation(const ValueSequence& seq, const CorrelationRequest& req) {
  return ell_correlation(seq.values, req);
}

// Same contract by explicit nested loops; ResourceError when M^ell > cap.
CorrelationResult ell_correlation_bruteforce(std::span<const double> values, const CorrelationRequest& req,
                                             double cap = kDefaultBruteForceCap);

// delta_i = values[i+1] - values[i].
std::vector<double> gap_sequence(std::span<const double> values);

// Kolmogorov-Smirnov distance between the gaps rescaled to unit mean and the
// Exponential(1) law, sup_s |F_n(s) - (1 - e^{-s})|.
double ks_against_exponential(std::span<const double> gaps);

struct LongGaps {
  std::size_t count = 0;
  std::vector<std::size_t> positions;  // 0-based gap indices: gap i joins values i and i+1
};

LongGaps long_gaps(std::span<const double> values, double threshold = 2.006);

// Bump kernels for the smoothed statistic. W_j(u) = exp(1/((u/w_j)^2 - 1)) on
// |u| < w_j; Psi(x) = prod_i exp(1/((2x_i - 3)^2 - 1)) on (1,2)^k, or the
// indicator of [1,2)^k when uniform_psi is set.
class SmoothingKernels {
 public:
  // half_widths[j-2] is w_j for j = 2..ell.
  explicit SmoothingKernels(std::vector<double> half_widths, bool uniform_psi = false);

  static SmoothingKernels canonical(int order, double half_width = 1.0) {
    return SmoothingKernels(std::vector<double>(static_cast<std::size_t>(order - 1), half_width));
  }

  int order() const { return static_cast<int>(half_widths_.size()) + 1; }
  double half_width(int j) const { return half_widths_[static_cast<std::size_t>(j - 2)]; }
  bool uniform_psi() const { return uniform_psi_; }

  double window(int j, double u) const;
  double variable(std::span<const double> x) const;
  // Integral of W_j over R.
  double window_integral(int j) const { return window_integrals_[static_cast<std::size_t>(j - 2)]; }

 private:
  std::vector<double> half_widths_;
  std::vector<double> window_integrals_;
  bool uniform_psi_;
};

// Integral of exp(1/(u^2-1)) over (-1, 1) by adaptive Gauss-Kronrod.
double canonical_bump_integral();

// Smoothed ell-correlation: sum over pairwise-distinct x_1..x_ell in Z_{>0}^k
// of prod_{j>=2} W_j((q(x_j) - q(x_1)) M^{k-d}) prod_j Psi(x_j / M).
double smoothed_correlation(const DiagonalForm& form, std::int64_t M, const SmoothingKernels& kernels,
                            double point_cap = 5e7);

struct ShellEstimate {
  double expectation = 0.0;  // M^k prod W_hat_j(0) c(alpha)
  double standard_error = 0.0;  // of the expectation
  double surface = 0.0;      // extrapolated c(alpha)
  double surface_stderr = 0.0;
  std::size_t hits_large = 0;
  std::size_t hits_small = 0;
  double eps_large = 0.0;
  double eps_small = 0.0;
};

// Hardy-Littlewood expectation for the smoothed statistic. c(alpha) is the
// surface integral of prod Psi(x_j) over {q(x_j) = q(x_1)}, estimated from
// thin shells |q(x_j) - q(x_1)| <= eps at two widths and extrapolated to
// eps = 0 assuming an error linear in eps^2.
ShellEstimate hl_expectation(const DiagonalForm& form, std::int64_t M, const SmoothingKernels& kernels,
                             std::pair<double, double> epsilons, std::size_t samples, std::uint64_t seed);

// Shell widths (2 eps, eps) with eps set so that about min_hits of `samples`
// draws land in the thinner shell; uses an independent pilot stream.
std::pair<double, double> shell_epsilons(const DiagonalForm& form, const SmoothingKernels& kernels,
                                         std::size_t samples, std::uint64_t seed, std::size_t min_hits = 1000);

}  // namespace diagform
