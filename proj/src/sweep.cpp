#include "diagform/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "diagform/correlate.hpp"
#include "diagform/enumerate.hpp"
#include "diagform/errors.hpp"
#include "diagform/format.hpp"
#include "diagform/parallel.hpp"

namespace diagform {
namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

double median_of(std::vector<double> v) { return percentile(std::move(v), 0.5); }

std::string alpha_text(std::span<const double> alpha) {
  std::string s;
  for (std::size_t i = 0; i < alpha.size(); ++i) s += (i ? "," : "") + format_double(alpha[i]);
  return s;
}

}  // namespace

void SweepConfig::validate() const {
  for (std::size_t i = 0; i < domain.dimension(); ++i)
    if (!(domain.lo(i) > 0.0)) throw PreconditionError("sweep: coefficient domain must be strictly positive");
  if (domain.dimension() < 2) throw PreconditionError("sweep: need k >= 2");
  if (samples < 2) throw PreconditionError("sweep: need at least two alpha samples");
  if (schedule.empty()) throw PreconditionError("sweep: empty M schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw PreconditionError("sweep: M schedule must be increasing");
  if (order < 2 || window.dimension() != static_cast<std::size_t>(order - 1))
    throw PreconditionError("sweep: window dimension must be order - 1");
  if (bootstrap_resamples < 1) throw PreconditionError("sweep: need at least one bootstrap resample");
}

SequenceSource form_source(int degree) {
  return [degree](std::span<const double> alpha, std::size_t M, std::size_t) {
    DiagonalForm form(degree, std::vector<double>(alpha.begin(), alpha.end()));
    try {
      return generate_sequence(form, M).values;
    } catch (const GenerationError& e) {
      throw GenerationError(std::string(e.what()) + " (alpha = " + alpha_text(alpha) + ")");
    } catch (const ResourceError& e) {
      throw ResourceError(std::string(e.what()) + " (alpha = " + alpha_text(alpha) + ")");
    }
  };
}

SequenceSource poisson_source(std::uint64_t seed) {
  return [seed](std::span<const double>, std::size_t M, std::size_t sample) {
    CounterRng rng(seed, 0x5EED0000ULL + sample);
    std::vector<double> v(M);
    double t = 0.0;
    for (auto& x : v) {
      t += rng.exponential();
      x = t;
    }
    return v;
  };
}

std::vector<double> sample_alpha(const Box& domain, CounterRng& rng) {
  std::vector<double> a(domain.dimension());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(domain.lo(i), domain.hi(i));
  return a;
}

SweepResult run_sweep(const SweepConfig& cfg, const SequenceSource& source) {
  cfg.validate();
  SweepResult res;
  res.seed = cfg.seed;
  res.poisson_target = cfg.window.volume();
  res.domain_volume = cfg.domain.volume();

  CounterRng alpha_rng(cfg.seed, /*stream=*/0);
  for (std::size_t s = 0; s < cfg.samples; ++s) res.alphas.push_back(sample_alpha(cfg.domain, alpha_rng));

  const std::size_t max_M = cfg.schedule.back();
  res.statistics.assign(cfg.samples, std::vector<double>(cfg.schedule.size(), 0.0));
  parallel_chunks(cfg.samples, cfg.samples, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto values = source(res.alphas[s], max_M, s);
      if (values.size() < max_M) throw GenerationError("sweep: sequence source returned too few values");
      for (std::size_t m = 0; m < cfg.schedule.size(); ++m) {
        const CorrelationRequest req{cfg.order, cfg.window, cfg.schedule[m]};
        res.statistics[s][m] = ell_correlation(values, req).statistic;
      }
    }
  });

  const double V = res.domain_volume;
  for (std::size_t m = 0; m < cfg.schedule.size(); ++m) {
    std::vector<double> dev(cfg.samples), sq(cfg.samples), absdev(cfg.samples);
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      dev[s] = res.deviation(s, m);
      sq[s] = dev[s] * dev[s];
      absdev[s] = std::abs(dev[s]);
    }
    ScheduleEstimate est;
    est.M = cfg.schedule[m];
    est.weak = V * mean_of(dev);
    est.l2 = V * mean_of(sq);
    est.median_abs_deviation = median_of(absdev);
    // Every schedule point resamples with the same index stream so the
    // intervals are reproducible from (config, seed) alone.
    CounterRng boot(cfg.seed, /*stream=*/1);
    std::vector<double> weak_b(cfg.bootstrap_resamples), l2_b(cfg.bootstrap_resamples);
    for (std::size_t b = 0; b < cfg.bootstrap_resamples; ++b) {
      double sw = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < cfg.samples; ++i) {
        const auto pick = static_cast<std::size_t>(boot.integer(0, static_cast<std::int64_t>(cfg.samples) - 1));
        sw += dev[pick];
        s2 += sq[pick];
      }
      weak_b[b] = V * sw / static_cast<double>(cfg.samples);
      l2_b[b] = V * s2 / static_cast<double>(cfg.samples);
    }
    est.weak_ci = {percentile(weak_b, 0.025), percentile(weak_b, 0.975)};
    est.l2_ci = {percentile(l2_b, 0.025), percentile(l2_b, 0.975)};
    res.estimates.push_back(est);
  }
  return res;
}

std::vector<ScheduleEstimate> weak_estimate(const SweepConfig& config) { return run_sweep(config).estimates; }
std::vector<ScheduleEstimate> l2_estimate(const SweepConfig& config) { return run_sweep(config).estimates; }

ConvergenceReport convergence_report(std::span<const ScheduleEstimate> estimates) {
  if (estimates.size() < 2) throw PreconditionError("convergence_report: need at least two schedule points");
  ConvergenceReport rep;
  rep.rows.assign(estimates.begin(), estimates.end());
  std::vector<double> x, y;
  for (const auto& e : estimates) {
    x.push_back(static_cast<double>(e.M));
    y.push_back(e.l2);
  }
  try {
    rep.l2_decay = loglog_fit(x, y, 2);
    rep.l2_decay_defined = true;
  } catch (const FitError&) {
    rep.l2_decay_defined = false;
  }
  return rep;
}

void write_sweep_csv(std::ostream& out, const SweepResult& res, std::span<const std::size_t> schedule) {
  const std::size_t k = res.alphas.empty() ? 0 : res.alphas.front().size();
  for (std::size_t i = 0; i < k; ++i) out << "alpha_" << (i + 1) << ",";
  out << "M,T_ell,vol_I,deviation\n";
  for (std::size_t s = 0; s < res.alphas.size(); ++s) {
    for (std::size_t m = 0; m < schedule.size(); ++m) {
      for (double a : res.alphas[s]) out << format_double(a) << ",";
      out << schedule[m] << "," << format_double(res.statistics[s][m]) << "," << format_double(res.poisson_target)
          << "," << format_double(res.deviation(s, m)) << "\n";
    }
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& res) {
  out << "M,weak_est,weak_ci_lo,weak_ci_hi,l2_est,l2_ci_lo,l2_ci_hi\n";
  for (const auto& e : res.estimates)
    out << e.M << "," << format_double(e.weak) << "," << format_double(e.weak_ci.lo) << ","
        << format_double(e.weak_ci.hi) << "," << format_double(e.l2) << "," << format_double(e.l2_ci.lo) << ","
        << format_double(e.l2_ci.hi) << "\n";
}

}  // namespace diagform
