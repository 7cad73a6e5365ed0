#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "diagform/enumerate.hpp"
#include "diagform/errors.hpp"
#include "diagform/rng.hpp"
#include "oracles.hpp"

using namespace diagform;

TEST_CASE("count_below small hand counts") {
  const DiagonalForm f(2, {1, 1});
  CHECK(count_below(f, 2) == 1);
  CHECK(count_below(f, 8) == 4);
  CHECK(count_below(f, 1.999) == 0);
  CHECK(predicted_count(f, 4) == doctest::Approx(std::numbers::pi));
  CHECK(predicted_count(f, 1e-300) < 1e-299);
  CHECK_THROWS_AS(count_below(f, 0), PreconditionError);
}

TEST_CASE("count_below agrees with exhaustive box enumeration") {
  CounterRng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = static_cast<int>(rng.integer(2, 4));
    const auto k = static_cast<std::size_t>(rng.integer(2, 4));
    std::vector<double> a(k);
    for (auto& v : a) v = rng.uniform(0.5, 3.0);
    const double R = rng.uniform(10.0, k == 4 ? 300.0 : 3000.0);
    CHECK(count_below(DiagonalForm(d, a), R) == oracle::count_below(a, d, R));
  }
}

TEST_CASE("count_below Gauss circle asymptotics") {
  const DiagonalForm f(2, {1, 1});
  const double R = 1e6;
  const double n = static_cast<double>(count_below(f, R));
  CHECK(std::fabs(n / (std::numbers::pi / 4 * R) - 1.0) <= 0.005);
  for (double T : {1e3, 1e4, 1e5}) {
    // #{Lambda <= T} = #{q <= T / c}
    const double m = static_cast<double>(count_below(f, T / (std::numbers::pi / 4)));
    CHECK(std::fabs(m / T - 1.0) <= 3.0 / std::sqrt(T));
  }
}

TEST_CASE("count_below refuses oversized enumerations before starting") {
  const DiagonalForm f(2, {1, 1});
  CHECK_THROWS_AS(count_below(f, 1e6, 1000), ResourceError);
  CHECK_THROWS_AS(generate_sequence(f, 5000, 0.15, 1000), ResourceError);
}

TEST_CASE("generate_sequence small cases") {
  const DiagonalForm f(2, {1, 1});
  const auto s = generate_sequence(f, 4);
  REQUIRE(s.size() == 4);
  const double c = std::numbers::pi / 4;
  CHECK(s.values[0] == doctest::Approx(2 * c));
  CHECK(s.values[1] == doctest::Approx(5 * c));
  CHECK(s.values[2] == doctest::Approx(5 * c));
  CHECK(s.values[3] == doctest::Approx(8 * c));
  const auto two = generate_sequence(f, 2);
  CHECK(two.values == std::vector<double>(s.values.begin(), s.values.begin() + 2));
  CHECK_THROWS_AS(generate_sequence(f, 1), PreconditionError);
}

TEST_CASE("generate_sequence is complete against the brute-force multiset") {
  CounterRng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = static_cast<int>(rng.integer(2, 3));
    const auto k = static_cast<std::size_t>(rng.integer(2, 3));
    std::vector<double> a(k);
    for (auto& v : a) v = rng.uniform(1.0, 2.0);
    const DiagonalForm f(d, a);
    const std::size_t M = static_cast<std::size_t>(rng.integer(100, 10000));
    const auto s = generate_sequence(f, M);
    REQUIRE(s.size() == M);
    CHECK(std::is_sorted(s.values.begin(), s.values.end()));
    const double R = s.threshold;
    const double c = normalization_constant(f);
    std::vector<double> all;
    const double amin = *std::min_element(a.begin(), a.end());
    const auto B = static_cast<std::int64_t>(std::ceil(std::pow(R / amin, 1.0 / d)));
    oracle::for_each_point(k, 1, B, [&](const std::vector<std::int64_t>& x) {
      const double q = eval_form(f, x);
      if (q <= R) all.push_back(c * std::pow(q, double(k) / d));
    });
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() >= M);
    all.resize(M);
    double worst = 0;
    for (std::size_t i = 0; i < M; ++i) worst = std::max(worst, std::fabs(all[i] - s.values[i]) / all[i]);
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("generated sequences have unit mean spacing and extend monotonically") {
  const DiagonalForm f(2, {1.3, 1.7, 1.1});
  const auto big = generate_sequence(f, 100000);
  const double spacing = (big.values.back() - big.values.front()) / (big.size() - 1);
  CHECK(std::fabs(spacing - 1.0) <= 0.05);
  CHECK(big.values.back() / 100000.0 >= 0.9);
  CHECK(big.values.back() / 100000.0 <= 1.1);
  const auto small = generate_sequence(f, 20000);
  CHECK(std::equal(small.values.begin(), small.values.end(), big.values.begin()));
}

TEST_CASE("sequence dump round trip") {
  const auto s = generate_sequence(DiagonalForm(3, {1.25, 2.0}), 500);
  std::stringstream buf;
  write_sequence(buf, s);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 5) == "DFLB1");
  CHECK(bytes.size() == 5 + 3 * 8 + 2 * 8 + 500 * 8);
  const auto back = read_sequence(buf);
  CHECK(back.form.degree() == 3);
  CHECK(back.form.coefficients() == s.form.coefficients());
  CHECK(back.values == s.values);
  std::stringstream junk("NOTIT");
  CHECK_THROWS_AS(read_sequence(junk), PreconditionError);
}
