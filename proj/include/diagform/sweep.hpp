#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "diagform/dioph.hpp"
#include "diagform/forms.hpp"
#include "diagform/rng.hpp"

namespace diagform {

struct SweepConfig {
  Box domain;                        // coefficient box D, strictly positive
  std::size_t samples = 10;          // n
  std::uint64_t seed = 0;
  std::vector<std::size_t> schedule; // increasing M values
  int order = 2;                     // ell
  Box window;                        // I, dimension ell - 1
  int degree = 2;
  std::size_t bootstrap_resamples = 1000;

  std::size_t dimension() const { return domain.dimension(); }
  void validate() const;
};

// Produces the sorted leading values for coefficients alpha. Only the first M
// entries are read for each schedule point, so sources may return longer arrays.
using SequenceSource =
    std::function<std::vector<double>(std::span<const double> alpha, std::size_t M, std::size_t sample)>;

// Leading values of the diagonal form with coefficients alpha (the default).
SequenceSource form_source(int degree);
// Cumulative sums of i.i.d. Exponential(1) gaps; a Poisson process oracle.
SequenceSource poisson_source(std::uint64_t seed);

// Uniform draw from the box, advancing the counter-based stream.
std::vector<double> sample_alpha(const Box& domain, CounterRng& rng);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ScheduleEstimate {
  std::size_t M = 0;
  double weak = 0.0;  // vol(D) mean(T - vol I)
  Interval weak_ci;
  double l2 = 0.0;    // vol(D) mean((T - vol I)^2)
  Interval l2_ci;
  double median_abs_deviation = 0.0;  // median over samples of |T - vol I|
};

struct SweepResult {
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> alphas;        // per sample
  std::vector<std::vector<double>> statistics;    // [sample][schedule index] T_ell
  double poisson_target = 0.0;
  double domain_volume = 0.0;
  std::vector<ScheduleEstimate> estimates;        // per schedule point

  double deviation(std::size_t sample, std::size_t m) const { return statistics[sample][m] - poisson_target; }
};

// Full sweep: draws the alphas, evaluates T_ell at every schedule point (each
// sample is generated once at the largest M and read by prefix), and reduces
// in sample order with seeded percentile-bootstrap intervals.
SweepResult run_sweep(const SweepConfig& config, const SequenceSource& source);
inline SweepResult run_sweep(const SweepConfig& config) { return run_sweep(config, form_source(config.degree)); }

// Integral over D of (T_ell - vol I), per schedule point.
std::vector<ScheduleEstimate> weak_estimate(const SweepConfig& config);
// Integral over D of |T_ell - vol I|^2, per schedule point.
std::vector<ScheduleEstimate> l2_estimate(const SweepConfig& config);

struct ConvergenceReport {
  std::vector<ScheduleEstimate> rows;
  SlopeFit l2_decay;  // log-log slope of the L2 estimate against M
  bool l2_decay_defined = false;
};

ConvergenceReport convergence_report(std::span<const ScheduleEstimate> estimates);

// Per-sample rows: alpha_1..alpha_k, M, T_ell, vol_I, deviation.
void write_sweep_csv(std::ostream& out, const SweepResult& result, std::span<const std::size_t> schedule);
// M, weak_est, weak_ci_lo, weak_ci_hi, l2_est, l2_ci_lo, l2_ci_hi.
void write_sweep_summary_csv(std::ostream& out, const SweepResult& result);

}  // namespace diagform
