#include "diagform/correlate.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "diagform/errors.hpp"
#include "diagform/parallel.hpp"
#include "diagform/rng.hpp"

namespace diagform {
namespace {

// A set partition of {0..n-1} as a list of blocks (bitmasks) with its Moebius
// weight prod_B (-1)^{|B|-1} (|B|-1)!.
struct Partition {
  std::vector<unsigned> blocks;
  std::int64_t weight;
};

void grow_partitions(int n, int next, std::vector<unsigned>& blocks, std::vector<Partition>& out) {
  if (next == n) {
    std::int64_t w = 1;
    for (unsigned b : blocks) {
      const int size = std::popcount(b);
      for (int f = 2; f < size; ++f) w *= f;
      if (size % 2 == 0) w = -w;
    }
    out.push_back({blocks, w});
    return;
  }
  // Index loop: the recursion appends to blocks.
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i] |= 1u << next;
    grow_partitions(n, next + 1, blocks, out);
    blocks[i] &= ~(1u << next);
  }
  blocks.push_back(1u << next);
  grow_partitions(n, next + 1, blocks, out);
  blocks.pop_back();
}

std::vector<Partition> partitions_of(int n) {
  std::vector<Partition> out;
  std::vector<unsigned> blocks;
  grow_partitions(n, 0, blocks, out);
  return out;
}

double tuple_space(std::size_t M, int order) { return std::pow(static_cast<double>(M), order); }

std::uint64_t checked_count(unsigned __int128 v) {
  if (v > std::numeric_limits<std::uint64_t>::max()) throw RangeError("tuple count exceeds 64 bits");
  return static_cast<std::uint64_t>(v);
}

CorrelationResult make_result(unsigned __int128 raw, const CorrelationRequest& req) {
  CorrelationResult r;
  r.raw_count = checked_count(raw);
  r.count = req.count;
  r.statistic = static_cast<double>(r.raw_count) / static_cast<double>(req.count);
  r.poisson_target = req.window.volume();
  return r;
}

double bump(double u) { return std::abs(u) < 1.0 ? std::exp(1.0 / (u * u - 1.0)) : 0.0; }

}  // namespace

void CorrelationRequest::validate(std::size_t available) const {
  if (order < 2) throw PreconditionError("correlation order must be >= 2");
  if (window.dimension() != static_cast<std::size_t>(order - 1))
    throw PreconditionError("window dimension must equal order - 1");
  if (count < static_cast<std::size_t>(order)) throw PreconditionError("need M >= order");
  if (count > available) throw PreconditionError("requested M exceeds the sequence length");
}

CorrelationResult ell_correlation_bruteforce(std::span<const double> values, const CorrelationRequest& req, double cap) {
  req.validate(values.size());
  const std::size_t M = req.count;
  const int ell = req.order;
  if (tuple_space(M, ell) > cap)
    throw ResourceError("brute-force correlation: M^ell = " + std::to_string(tuple_space(M, ell)) + " above cap");
  std::vector<std::size_t> idx(static_cast<std::size_t>(ell));
  unsigned __int128 total = 0;
  // Level j picks i_j among all indices, rejecting repeats and out-of-window values.
  auto level = [&](auto&& self, int j) -> void {
    if (j == ell) {
      ++total;
      return;
    }
    const double base = values[idx[0]];
    for (std::size_t i = 0; i < M; ++i) {
      bool repeat = false;
      for (int p = 0; p < j; ++p) repeat = repeat || idx[static_cast<std::size_t>(p)] == i;
      if (repeat || !req.window.contains_axis(static_cast<std::size_t>(j - 1), values[i] - base)) continue;
      idx[static_cast<std::size_t>(j)] = i;
      self(self, j + 1);
    }
  };
  for (std::size_t i1 = 0; i1 < M; ++i1) {
    idx[0] = i1;
    level(level, 1);
  }
  return make_result(total, req);
}

CorrelationResult ell_correlation(std::span<const double> values, const CorrelationRequest& req, double brute_force_cap) {
  req.validate(values.size());
  const int ell = req.order;
  if (ell >= 5) {
    if (tuple_space(req.count, ell) > brute_force_cap)
      throw UnsupportedError("correlation order " + std::to_string(ell) + " is only supported up to the brute-force cap");
    return ell_correlation_bruteforce(values, req, brute_force_cap);
  }
  const std::size_t M = req.count;
  const auto data = values.first(M);
  const auto windows = static_cast<std::size_t>(ell - 1);
  const std::vector<Partition> parts = partitions_of(ell);

  const std::size_t chunks = std::min<std::size_t>(M, 64);
  std::vector<unsigned __int128> partial(chunks, 0);
  parallel_chunks(M, chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
    // lower[j]: first index with value - base >= lo_j; upper[j]: first with >= hi_j.
    // Both predicates are monotone in the index and in base, so the pointers slide.
    std::vector<std::size_t> lower(windows), upper(windows);
    auto first_not_below = [&](double base, double bound) {
      return static_cast<std::size_t>(
          std::partition_point(data.begin(), data.end(), [&](double v) { return v - base < bound; }) - data.begin());
    };
    const double base0 = data[begin];
    for (std::size_t j = 0; j < windows; ++j) {
      lower[j] = first_not_below(base0, req.window.lo(j));
      upper[j] = first_not_below(base0, req.window.hi(j));
    }
    std::vector<std::int64_t> lo_idx(static_cast<std::size_t>(ell)), hi_idx(static_cast<std::size_t>(ell));
    unsigned __int128 sum = 0;
    for (std::size_t i1 = begin; i1 < end; ++i1) {
      const double base = data[i1];
      for (std::size_t j = 0; j < windows; ++j) {
        while (lower[j] < M && data[lower[j]] - base < req.window.lo(j)) ++lower[j];
        while (upper[j] < M && data[upper[j]] - base < req.window.hi(j)) ++upper[j];
      }
      // Element 0 is the singleton {i1}; element j is the index range of window j.
      lo_idx[0] = static_cast<std::int64_t>(i1);
      hi_idx[0] = static_cast<std::int64_t>(i1) + 1;
      for (std::size_t j = 0; j < windows; ++j) {
        lo_idx[j + 1] = static_cast<std::int64_t>(lower[j]);
        hi_idx[j + 1] = static_cast<std::int64_t>(std::max(lower[j], upper[j]));
      }
      __int128 tuples = 0;
      for (const auto& p : parts) {
        __int128 term = p.weight;
        for (unsigned block : p.blocks) {
          std::int64_t lo = std::numeric_limits<std::int64_t>::min();
          std::int64_t hi = std::numeric_limits<std::int64_t>::max();
          for (int e = 0; e < ell; ++e) {
            if (block & (1u << e)) {
              lo = std::max(lo, lo_idx[static_cast<std::size_t>(e)]);
              hi = std::min(hi, hi_idx[static_cast<std::size_t>(e)]);
            }
          }
          if (hi <= lo) {
            term = 0;
            break;
          }
          term *= hi - lo;
        }
        tuples += term;
      }
      sum += static_cast<unsigned __int128>(tuples);
    }
    partial[c] = sum;
  });
  unsigned __int128 total = 0;
  for (auto v : partial) total += v;
  return make_result(total, req);
}

std::vector<double> gap_sequence(std::span<const double> values) {
  if (values.size() < 2) throw PreconditionError("gap_sequence: need at least two values");
  std::vector<double> gaps(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) gaps[i] = values[i + 1] - values[i];
  return gaps;
}

double ks_against_exponential(std::span<const double> gaps) {
  if (gaps.empty()) throw PreconditionError("ks_against_exponential: no gaps");
  std::vector<double> s(gaps.begin(), gaps.end());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  if (!(mean > 0.0)) return 1.0;  // every gap zero: all mass at 0
  for (double& v : s) v /= mean;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = -std::expm1(-s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

LongGaps long_gaps(std::span<const double> values, double threshold) {
  if (values.size() < 2) throw PreconditionError("long_gaps: need at least two values");
  LongGaps out;
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (values[i + 1] - values[i] >= threshold) out.positions.push_back(i);
  out.count = out.positions.size();
  return out;
}

double canonical_bump_integral() {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(bump, -1.0, 1.0, 15, 1e-14);
}

SmoothingKernels::SmoothingKernels(std::vector<double> half_widths, bool uniform_psi)
    : half_widths_(std::move(half_widths)), uniform_psi_(uniform_psi) {
  if (half_widths_.empty()) throw PreconditionError("SmoothingKernels: need order >= 2");
  using boost::math::quadrature::gauss_kronrod;
  for (double w : half_widths_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw PreconditionError("SmoothingKernels: half widths must be positive");
    window_integrals_.push_back(
        gauss_kronrod<double, 61>::integrate([w](double u) { return bump(u / w); }, -w, w, 15, 1e-14));
  }
}

double SmoothingKernels::window(int j, double u) const { return bump(u / half_width(j)); }

double SmoothingKernels::variable(std::span<const double> x) const {
  double v = 1.0;
  for (double xi : x) {
    if (uniform_psi_) {
      if (!(xi >= 1.0 && xi < 2.0)) return 0.0;
    } else {
      v *= bump(2.0 * xi - 3.0);
      if (v == 0.0) return 0.0;
    }
  }
  return v;
}

double smoothed_correlation(const DiagonalForm& form, std::int64_t M, const SmoothingKernels& kernels,
                            double point_cap) {
  if (M < 1) throw PreconditionError("smoothed_correlation: M must be >= 1");
  const int ell = kernels.order();
  const std::size_t k = form.dimension();
  // Coordinates with x_i / M inside the support of Psi.
  const std::int64_t lo = kernels.uniform_psi() ? M : M + 1;
  const std::int64_t hi = 2 * M - 1;
  if (hi < lo) return 0.0;
  const double side = static_cast<double>(hi - lo + 1);
  if (std::pow(side, static_cast<double>(k)) * ell > point_cap)
    throw ResourceError("smoothed_correlation: lattice box above the point cap");

  struct Point {
    double q;
    double weight;
  };
  std::vector<Point> points;
  std::vector<std::int64_t> x(k, lo);
  std::vector<double> scaled(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) scaled[i] = static_cast<double>(x[i]) / static_cast<double>(M);
    const double w = kernels.variable(scaled);
    if (w > 0.0) points.push_back({eval_form(form, x), w});
    std::size_t i = 0;
    while (i < k && ++x[i] > hi) x[i++] = lo;
    if (i == k) break;
  }
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.q < b.q; });

  const double scale = std::pow(static_cast<double>(M), static_cast<double>(k) - form.degree());
  double reach = 0.0;
  for (int j = 2; j <= ell; ++j) reach = std::max(reach, kernels.half_width(j));
  // Slightly widened q-window; W itself enforces the exact support.
  const double q_reach = reach / scale * (1.0 + 1e-9);

  const std::size_t n = points.size();
  const std::size_t chunks = std::min<std::size_t>(std::max<std::size_t>(n, 1), 64);
  std::vector<double> partial(chunks, 0.0);
  parallel_chunks(n, chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> chosen(static_cast<std::size_t>(ell));
    double sum = 0.0;
    for (std::size_t a = begin; a < end; ++a) {
      const double q1 = points[a].q;
      const auto first = static_cast<std::size_t>(
          std::lower_bound(points.begin(), points.end(), q1 - q_reach, [](const Point& p, double v) { return p.q < v; }) -
          points.begin());
      const auto last = static_cast<std::size_t>(
          std::upper_bound(points.begin(), points.end(), q1 + q_reach, [](double v, const Point& p) { return v < p.q; }) -
          points.begin());
      chosen[0] = a;
      auto level = [&](auto&& self, int j, double acc) -> void {
        if (j > ell) {
          sum += acc;
          return;
        }
        for (std::size_t b = first; b < last; ++b) {
          bool repeat = false;
          for (int p = 0; p < j - 1; ++p) repeat = repeat || chosen[static_cast<std::size_t>(p)] == b;
          if (repeat) continue;
          const double wv = kernels.window(j, (points[b].q - q1) * scale);
          if (wv == 0.0) continue;
          chosen[static_cast<std::size_t>(j - 1)] = b;
          self(self, j + 1, acc * wv * points[b].weight);
        }
      };
      level(level, 2, points[a].weight);
    }
    partial[c] = sum;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

namespace {

// Max over j >= 2 of |q(x_j) - q(x_1)| for one uniform draw in [1,2]^{k ell},
// together with the Psi weight of the draw.
struct ShellDraw {
  double spread;
  double weight;
};

ShellDraw draw_shell(const DiagonalForm& form, const SmoothingKernels& kernels, CounterRng& rng,
                     std::vector<double>& x) {
  const int ell = kernels.order();
  const std::size_t k = form.dimension();
  double weight = 1.0;
  double q1 = 0.0;
  double spread = 0.0;
  for (int j = 1; j <= ell; ++j) {
    double q = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = rng.uniform(1.0, 2.0);
      q += form.coefficient(i) * std::pow(x[i], form.degree());
    }
    weight *= kernels.variable(x);
    if (j == 1)
      q1 = q;
    else
      spread = std::max(spread, std::abs(q - q1));
  }
  return {spread, weight};
}

}  // namespace

std::pair<double, double> shell_epsilons(const DiagonalForm& form, const SmoothingKernels& kernels,
                                         std::size_t samples, std::uint64_t seed, std::size_t min_hits) {
  if (samples < min_hits * 4) throw PrecisionError("shell_epsilons: sample count too small for the hit target");
  CounterRng rng(seed, /*stream=*/1);
  std::vector<double> x(form.dimension());
  std::vector<double> spreads;
  spreads.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const ShellDraw d = draw_shell(form, kernels, rng, x);
    if (d.weight > 0.0) spreads.push_back(d.spread);
  }
  if (spreads.size() < min_hits) throw PrecisionError("shell_epsilons: too few draws inside the Psi support");
  std::nth_element(spreads.begin(), spreads.begin() + static_cast<std::ptrdiff_t>(min_hits - 1), spreads.end());
  const double eps = spreads[min_hits - 1];
  return {2.0 * eps, eps};
}

ShellEstimate hl_expectation(const DiagonalForm& form, std::int64_t M, const SmoothingKernels& kernels,
                             std::pair<double, double> epsilons, std::size_t samples, std::uint64_t seed) {
  const int ell = kernels.order();
  if (static_cast<std::size_t>(ell) * form.dimension() > 16)
    throw PreconditionError("hl_expectation: ell * k must be <= 16");
  const auto [eps_large, eps_small] = epsilons;
  if (!(eps_large > eps_small && eps_small > 0.0))
    throw PreconditionError("hl_expectation: need eps_large > eps_small > 0");
  if (samples < 2) throw PreconditionError("hl_expectation: need at least two samples");

  const double norm_large = std::pow(2.0 * eps_large, ell - 1);
  const double norm_small = std::pow(2.0 * eps_small, ell - 1);
  const double e1 = eps_large * eps_large;
  const double e2 = eps_small * eps_small;
  // Per-draw Richardson combination (e1 f_small - e2 f_large) / (e1 - e2).
  const double c_small = e1 / (e1 - e2);
  const double c_large = -e2 / (e1 - e2);

  CounterRng rng(seed, /*stream=*/0);
  std::vector<double> x(form.dimension());
  double mean = 0.0;
  double m2 = 0.0;
  ShellEstimate out;
  for (std::size_t s = 0; s < samples; ++s) {
    const ShellDraw d = draw_shell(form, kernels, rng, x);
    double y = 0.0;
    if (d.weight > 0.0 && d.spread <= eps_large) {
      ++out.hits_large;
      y += c_large * d.weight / norm_large;
      if (d.spread <= eps_small) {
        ++out.hits_small;
        y += c_small * d.weight / norm_small;
      }
    }
    const double delta = y - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (y - mean);
  }
  if (out.hits_large < 100)
    throw PrecisionError("hl_expectation: only " + std::to_string(out.hits_large) +
                         " shell hits at the larger width; increase the sample count");
  const double n = static_cast<double>(samples);
  out.surface = mean;
  out.surface_stderr = std::sqrt(m2 / (n - 1.0) / n);
  double prefactor = std::pow(static_cast<double>(M), static_cast<double>(form.dimension()));
  for (int j = 2; j <= ell; ++j) prefactor *= kernels.window_integral(j);
  out.expectation = prefactor * out.surface;
  out.standard_error = prefactor * out.surface_stderr;
  out.eps_large = eps_large;
  out.eps_small = eps_small;
  return out;
}

}  // namespace diagform
