// One line per criterion; exit status is the number of failures (capped).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "diagform/census.hpp"
#include "diagform/correlate.hpp"
#include "diagform/dioph.hpp"
#include "diagform/enumerate.hpp"
#include "diagform/exact.hpp"
#include "diagform/rng.hpp"
#include "diagform/sweep.hpp"
#include "oracles.hpp"

using namespace diagform;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Soft statistical checks: one seed, then three fresh seeds of which two must pass.
bool soft(const std::function<bool(std::uint64_t, std::string&)>& attempt, std::uint64_t seed, std::string& log) {
  std::string line;
  if (attempt(seed, line)) {
    log = line;
    return true;
  }
  log = "seed " + std::to_string(seed) + " failed (" + line + "); reruns:";
  int passed = 0;
  for (std::uint64_t s = seed + 1; s <= seed + 3; ++s) {
    std::string l;
    const bool ok = attempt(s, l);
    passed += ok;
    log += " [" + std::to_string(s) + (ok ? " ok: " : " bad: ") + l + "]";
  }
  return passed >= 2;
}

void criterion1() {
  const auto t0 = Clock::now();
  const DiagonalForm f(2, {1, 1});
  const double R = 1e6;
  const double n = static_cast<double>(count_below(f, R));
  const double ratio = n / (normalization_constant(f) * R);
  const double t = seconds_since(t0);
  report(1, std::fabs(ratio - 1) <= 0.01 && t < 5,
         fmt("count_below(1e6)/(c R) = %.6f, c = %.12f, %.2fs", ratio, normalization_constant(f), t));
}

std::vector<double> poisson_points(CounterRng& rng, std::size_t M, double grid) {
  std::vector<double> v(M);
  double t = 0;
  for (auto& x : v) {
    t += rng.exponential();
    x = grid > 0 ? std::round(t / grid) * grid : t;
  }
  return v;
}

void criterion2() {
  const auto t0 = Clock::now();
  CounterRng rng(20240601);
  int mismatches = 0;
  std::uint64_t largest = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int ell = 2 + trial % 3;
    const std::size_t cap = ell == 2 ? 2000 : ell == 3 ? 1000 : 250;
    const auto M = static_cast<std::size_t>(rng.integer(ell, static_cast<std::int64_t>(cap)));
    // A third of the data sets carry ties.
    const auto v = poisson_points(rng, M, trial % 3 == 0 ? 0.5 : 0.0);
    std::vector<double> lo(static_cast<std::size_t>(ell - 1)), hi(lo.size());
    for (std::size_t j = 0; j < lo.size(); ++j) {
      // Alternate windows around 0 with windows overlapping the previous one.
      const double a = (trial + static_cast<int>(j)) % 2 ? rng.uniform(-2.0, 0.0) : rng.uniform(-3.0, 3.0);
      lo[j] = j > 0 && trial % 4 == 1 ? lo[j - 1] + 0.3 : a;
      hi[j] = lo[j] + rng.uniform(0.1, 3.0);
    }
    const CorrelationRequest req{ell, Box(lo, hi), M};
    const auto fast = ell_correlation(v, req);
    const auto brute = ell_correlation_bruteforce(v, req, 1e13);
    if (fast.raw_count != brute.raw_count) ++mismatches;
    largest = std::max(largest, fast.raw_count);
  }
  const double t = seconds_since(t0);
  report(2, mismatches == 0 && t < 120,
         fmt("200 instances, %d mismatches, largest count %llu, %.1fs", mismatches, (unsigned long long)largest, t));
}

// Criteria 3, 5, 6 share one sweep.
void criteria3to6() {
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> last;  // sequences of the accepted run
  auto attempt = [&](std::uint64_t seed, std::string& line) {
    SweepConfig cfg{Box({1, 1, 1}, {2, 2, 2}), 10, seed, {10000, 30000, 100000}, 2, Box::interval(0, 1), 2, 200};
    std::vector<std::vector<double>> seqs(cfg.samples);
    std::mutex mu;
    const auto base = form_source(2);
    const auto res = run_sweep(cfg, [&](std::span<const double> alpha, std::size_t M, std::size_t sample) {
      auto v = base(alpha, M, sample);
      std::lock_guard lock(mu);
      seqs[sample] = v;
      return v;
    });
    std::vector<double> med;
    for (const auto& e : res.estimates) med.push_back(e.median_abs_deviation);
    const bool ok = med.back() <= 0.1 && med[1] <= med[0] && med[2] <= med[1];
    line = fmt("median |T2-1| = %.4f, %.4f, %.4f", med[0], med[1], med[2]);
    last = std::move(seqs);
    return ok;
  };
  std::string log;
  const bool ok = soft(attempt, 3, log);
  report(3, ok && seconds_since(t0) < 600, log + fmt(", %.1fs", seconds_since(t0)));

  std::size_t fewest = SIZE_MAX;
  std::vector<double> ks;
  for (const auto& v : last) {
    fewest = std::min(fewest, long_gaps(std::span(v).first(100000)).count);
    ks.push_back(ks_against_exponential(gap_sequence(std::span(v).first(100000))));
  }
  report(5, fewest >= 1000, fmt("fewest gaps >= 2.006 over samples at M = 1e5: %zu", fewest));
  const double ks_med = median(ks);
  report(6, ks_med <= 0.02,
         fmt("median KS = %.5f (min %.5f, max %.5f)", ks_med, *std::min_element(ks.begin(), ks.end()),
             *std::max_element(ks.begin(), ks.end())));
}

void criterion4() {
  const auto t0 = Clock::now();
  auto attempt = [](std::uint64_t seed, std::string& line) {
    CounterRng rng(seed);
    const auto alpha = sample_alpha(Box({1, 1, 1, 1}, {2, 2, 2, 2}), rng);
    const auto seq = generate_sequence(DiagonalForm(2, alpha), 30000);
    const auto r = ell_correlation(seq, {3, Box({0, 0}, {1, 1}), 30000});
    line = fmt("alpha = (%.4f, %.4f, %.4f, %.4f), T3 = %.4f", alpha[0], alpha[1], alpha[2], alpha[3], r.statistic);
    return std::fabs(r.statistic - 1) <= 0.2;
  };
  std::string log;
  const bool ok = soft(attempt, 4, log);
  report(4, ok, log + fmt(", %.1fs", seconds_since(t0)));
}

void criterion7() {
  const auto t0 = Clock::now();
  CounterRng rng(77);
  int bad = 0, done = 0;
  while (done < 100) {
    const auto k = static_cast<std::size_t>(rng.integer(2, 5));
    const int d = static_cast<int>(rng.integer(2, 4));
    const std::int64_t M = rng.integer(1, 40);
    if (std::pow(static_cast<double>(M + 1), static_cast<double>(k)) > 1e7) continue;
    std::vector<std::int64_t> a(k);
    for (auto& v : a) {
      do v = rng.integer(-4, 4);
      while (v == 0);
    }
    if (done % 2 == 0) {
      // Equation counts scan |x_j| <= M: keep the oracle's (2M+1)^k box bounded too.
      if (std::pow(static_cast<double>(2 * M + 1), static_cast<double>(k)) > 1e7) continue;
      const bool primitive = done % 4 == 0;
      if (count_equation(a, d, M, {.primitive = primitive}) != oracle::equation_count(a, d, M, primitive, false)) ++bad;
    } else {
      const double H = rng.uniform(0, 50);
      if (count_inequality(a, d, M, H) != oracle::inequality_count(a, d, M, H)) ++bad;
    }
    ++done;
  }
  const std::int64_t a2[] = {1, -1}, a3[] = {1, 1, -2};
  const auto ineq = count_inequality(a2, 2, 10, 0);
  const auto eq = count_equation(a3, 2, 5);
  const auto eq_oracle = oracle::equation_count({1, 1, -2}, 2, 5, false, false);
  report(7, bad == 0 && ineq == 11 && eq == eq_oracle,
         fmt("100 random instances, %d mismatches; count_inequality((1,-1),2,10,0) = %llu; "
             "count_equation((1,1,-2),2,5) = %llu, exhaustive oracle %llu (17 expected by the criterion text); %.1fs",
             bad, (unsigned long long)ineq, (unsigned long long)eq, (unsigned long long)eq_oracle, seconds_since(t0)));
}

void criterion8() {
  CounterRng rng(8);
  int violations = 0;
  for (int i = 0; i < 50; ++i) {
    std::int64_t a1 = rng.integer(1, 6), a2 = rng.integer(1, 6);
    if (a1 > a2) std::swap(a1, a2);
    if (rng.integer(0, 1)) a2 = -a2;
    const auto r = fejer_chain_check(a1, a2, static_cast<int>(rng.integer(2, 3)), rng.integer(2, 30),
                                     rng.uniform(0, 100));
    if (!r.holds) ++violations;
  }
  report(8, violations == 0, fmt("50 instances, %d violations", violations));
}

void criterion9() {
  std::vector<std::int64_t> g1;
  for (int e = 4; e <= 10; ++e) g1.push_back(std::int64_t{1} << e);
  const std::int64_t diag[] = {1, -1}, eq3[] = {1, 1, -2}, four[] = {1, -1, 1, -1};
  const auto s1 = exponent_fit([&](std::int64_t M) { return count_inequality(diag, 2, M, 0); }, g1);
  const auto s2 = exponent_fit([&](std::int64_t M) { return count_equation(eq3, 2, M); }, g1);
  const std::vector<std::int64_t> g3 = {8, 16, 32, 64, 128};
  const auto s3 = exponent_fit([&](std::int64_t M) { return count_inequality(four, 2, M, 1); }, g3);
  report(9, std::fabs(s1.slope - 1) <= 0.02 && s2.slope <= 1.3 && s3.slope <= 2.3,
         fmt("slopes: (1,-1) H=0 %.4f; (1,1,-2) eq %.4f; (1,-1,1,-1) H=1 %.4f", s1.slope, s2.slope, s3.slope));
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TupleMatrix random_tuple(CounterRng& rng, int d, std::size_t rows, std::size_t cols, std::int64_t M) {
  std::vector<std::int64_t> e(rows * cols);
  for (auto& v : e) v = rng.integer(M, 2 * M);
  return TupleMatrix(d, rows, cols, e);
}

void criterion10() {
  const auto t0 = Clock::now();
  std::string notes;
  bool ok = true;

  CensusConfig g;
  std::ostringstream out;
  write_census_csv(out, g, census(g));
  const bool golden = out.str() == slurp(std::string(DIAGFORM_GOLDEN_DIR) + "/census_l2_k2_d2_M1.csv");
  ok = ok && golden;
  notes += golden ? "golden ok" : "golden MISMATCH";

  CounterRng rng(10);
  int rank_bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto rows = static_cast<std::size_t>(rng.integer(2, 4));
    const auto cols = static_cast<std::size_t>(rng.integer(2, 4));
    const auto m = build_matrices(random_tuple(rng, static_cast<int>(rng.integer(2, 4)), rows, cols, rng.integer(1, 4)));
    if (exact_rank(m.differences) != exact_rank(m.powers)) ++rank_bad;
  }
  ok = ok && rank_bad == 0;
  notes += fmt("; rank(T)!=rank(T') on %d of 1e5", rank_bad);

  int det_bad = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto n = static_cast<std::size_t>(2 + i % 3);
    const std::int64_t bound = i % 2 ? 1000000000 : 5;
    IntMatrix m(n, n);
    std::vector<std::vector<mpz_class>> nested(n, std::vector<mpz_class>(n));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) nested[r][c] = m(r, c) = static_cast<long>(rng.integer(-bound, bound));
    const auto all = iota(n);
    if (minor_det(m, all, all) != oracle::cofactor_det(nested)) ++det_bad;
  }
  ok = ok && det_bad == 0;
  notes += fmt("; Bareiss!=cofactor on %d of 3000", det_bad);

  int arranged = 0, arr_bad = 0;
  while (arranged < 1000) {
    const auto rows = static_cast<std::size_t>(rng.integer(2, 4));
    const auto cols = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(rows), 6));
    const auto p = build_matrices(random_tuple(rng, static_cast<int>(rng.integer(2, 3)), rows, cols, rng.integer(1, 8))).powers;
    if (exact_rank(p) < rows) continue;
    ++arranged;
    const auto a = optimally_arrange(p).arranged;
    for (std::size_t n = 1; n <= rows; ++n) {
      const auto lead = abs(minor_det_unbounded(a, iota(n), iota(n)));
      if (sgn(lead) == 0) ++arr_bad;
      for (std::size_t m = n; m < cols; ++m) {
        auto c = iota(n - 1);
        c.push_back(m);
        if (abs(minor_det_unbounded(a, iota(n), c)) > lead) ++arr_bad;
      }
    }
  }
  ok = ok && arr_bad == 0;
  notes += fmt("; arrangement violations %d over 1000", arr_bad);

  // A dependent row with a single nonzero coefficient is a multiple of a basis
  // row; on tuples without proportional rows every dependency needs at least two.
  std::uint64_t deficient = 0, unexplained = 0, wide = 0;
  for (auto [rows, cols, M] : {std::tuple{3, 2, 3}, {3, 3, 2}, {3, 4, 1}, {4, 3, 1}, {4, 2, 2}}) {
    CensusConfig c;
    c.rows = static_cast<std::size_t>(rows);
    c.cols = static_cast<std::size_t>(cols);
    c.M = M;
    const auto h = census(c);
    deficient += h.rank_deficient;
    unexplained += h.single_coefficient_unexplained;
    wide += h.wide_dependencies;
    ok = ok && h.arrangement_failures == 0;
  }
  ok = ok && unexplained == 0 && deficient > 0;
  notes += fmt("; %llu rank-deficient census tuples, %llu single-coefficient rows off a proportional pair, "
               "%llu relations with more than two coefficients",
               (unsigned long long)deficient, (unsigned long long)unexplained, (unsigned long long)wide);
  report(10, ok, notes + fmt("; %.1fs", seconds_since(t0)));
}

void criterion11() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (const std::vector<double>& alpha : {std::vector<double>{1.0, std::sqrt(2.0)}, {1.3, 1.9}, {1.0, 1.7320508}}) {
    const double fast = smoothed_correlation(DiagonalForm(2, alpha), 30, SmoothingKernels::canonical(2));
    const double slow = oracle::smoothed_sum(alpha, 2, 30, 2, 1.0);
    worst = std::max(worst, std::fabs(fast - slow) / std::fabs(slow));
  }
  const DiagonalForm f(2, {1.0, std::sqrt(2.0)});
  const auto kernels = SmoothingKernels::canonical(2);
  const std::size_t n = 1000000;
  const auto eps = shell_epsilons(f, kernels, n, 11);
  const auto a = hl_expectation(f, 30, kernels, eps, n, 11);
  const auto b = hl_expectation(f, 30, kernels, {eps.first / 2, eps.second / 2}, n, 11);
  const double se = std::hypot(a.standard_error, b.standard_error);
  const double gap = std::fabs(a.expectation - b.expectation);
  report(11, worst <= 1e-10 && gap <= 3 * se,
         fmt("max relative error vs direct sum %.2e; expectation %.4f vs %.4f at eps/2, |diff| = %.4f <= 3 SE = %.4f; %.1fs",
             worst, a.expectation, b.expectation, gap, 3 * se, seconds_since(t0)));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps = {criterion1, criterion2, criteria3to6, criterion4, criterion7,
                                                    criterion8, criterion9, criterion10, criterion11};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("FAIL ?: uncaught %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d failing\n", failures);
  return std::min(failures, 100);
}
