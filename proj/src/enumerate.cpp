#include "diagform/enumerate.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "diagform/errors.hpp"
#include "diagform/parallel.hpp"

namespace diagform {
namespace {

// Relative slack on the pruning bound. Leaves are tested exactly against R,
// so the slack only guards against discarding a boundary point.
constexpr double kPruneSlack = 1e-12;

class LatticeWalker {
 public:
  LatticeWalker(const DiagonalForm& form, double R) : form_(form), R_(R), k_(form.dimension()) {
    tail_min_.assign(k_ + 1, 0.0);
    for (std::size_t i = k_; i-- > 0;) tail_min_[i] = tail_min_[i + 1] + form.coefficient(i);
    x_.assign(k_, 1);
    terms_.assign(k_, 0.0);
    sorted_.assign(k_, 0.0);
  }

  // Largest x_1 that can appear.
  std::int64_t first_max() const {
    const double room = R_ * (1 + kPruneSlack) - tail_min_[1];
    if (room < form_.coefficient(0)) return 0;
    return static_cast<std::int64_t>(std::floor(std::pow(room / form_.coefficient(0), 1.0 / form_.degree()))) + 1;
  }

  // Calls visit(x, q) for every x with x_1 in [lo, hi] and q(x) <= R.
  template <class Visit>
  void walk(std::int64_t lo, std::int64_t hi, Visit&& visit) {
    for (std::int64_t x1 = lo; x1 <= hi; ++x1) {
      const double t = form_.coefficient(0) * static_cast<double>(checked_power(x1, form_.degree()));
      if (t + tail_min_[1] > R_ * (1 + kPruneSlack)) break;
      x_[0] = x1;
      terms_[0] = t;
      descend(1, t, visit);
    }
  }

 private:
  template <class Visit>
  void descend(std::size_t i, double partial, Visit& visit) {
    if (i == k_) {
      std::copy(terms_.begin(), terms_.end(), sorted_.begin());
      std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
      double q = 0.0;
      for (double v : sorted_) q += v;
      if (q <= R_) visit(std::span<const std::int64_t>(x_), q);
      return;
    }
    const double a = form_.coefficient(i);
    const double bound = R_ * (1 + kPruneSlack) - tail_min_[i + 1];
    for (std::int64_t xi = 1;; ++xi) {
      const double t = a * static_cast<double>(checked_power(static_cast<std::uint64_t>(xi), form_.degree()));
      if (partial + t > bound) break;
      x_[i] = xi;
      terms_[i] = t;
      descend(i + 1, partial + t, visit);
    }
    x_[i] = 1;
  }

  const DiagonalForm& form_;
  double R_;
  std::size_t k_;
  std::vector<double> tail_min_;
  std::vector<std::int64_t> x_;
  std::vector<double> terms_;
  std::vector<double> sorted_;
};

void check_cap(const DiagonalForm& form, double R, std::uint64_t cap) {
  if (!(R > 0.0)) throw PreconditionError("enumeration threshold must be positive");
  const double projected = predicted_count(form, R);
  if (projected > static_cast<double>(cap))
    throw ResourceError("enumeration would visit about " + std::to_string(projected) +
                        " points, above the cap of " + std::to_string(cap));
}

std::size_t chunk_count(std::int64_t first_max) {
  return static_cast<std::size_t>(std::min<std::int64_t>(first_max, 256));
}

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw PreconditionError("sequence dump truncated");
  return v;
}

constexpr std::array<char, 5> kMagic{'D', 'F', 'L', 'B', '1'};

}  // namespace

double predicted_count(const DiagonalForm& form, double R) {
  if (R <= 0.0) return 0.0;
  const double exponent = static_cast<double>(form.dimension()) / form.degree();
  return normalization_constant(form) * std::pow(R, exponent);
}

std::uint64_t count_below(const DiagonalForm& form, double R, std::uint64_t cap) {
  check_cap(form, R, cap);
  const std::int64_t x1_max = LatticeWalker(form, R).first_max();
  if (x1_max < 1) return 0;
  const std::size_t chunks = chunk_count(x1_max);
  std::vector<std::uint64_t> partial(chunks, 0);
  parallel_chunks(static_cast<std::size_t>(x1_max), chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    LatticeWalker walker(form, R);
    std::uint64_t n = 0;
    walker.walk(static_cast<std::int64_t>(b) + 1, static_cast<std::int64_t>(e),
                [&](std::span<const std::int64_t>, double) { ++n; });
    partial[c] = n;
  });
  std::uint64_t total = 0;
  for (auto n : partial) total += n;
  return total;
}

std::vector<double> values_below(const DiagonalForm& form, double R, std::uint64_t cap) {
  check_cap(form, R, cap);
  const std::int64_t x1_max = LatticeWalker(form, R).first_max();
  if (x1_max < 1) return {};
  const double c = normalization_constant(form);
  const double exponent = static_cast<double>(form.dimension()) / form.degree();
  const std::size_t chunks = chunk_count(x1_max);
  std::vector<std::vector<double>> buffers(chunks);
  parallel_chunks(static_cast<std::size_t>(x1_max), chunks, [&](std::size_t ci, std::size_t b, std::size_t e) {
    LatticeWalker walker(form, R);
    auto& buf = buffers[ci];
    walker.walk(static_cast<std::int64_t>(b) + 1, static_cast<std::int64_t>(e),
                [&](std::span<const std::int64_t>, double q) { buf.push_back(normalized_from_q(q, c, exponent)); });
  });
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.size();
  std::vector<double> out;
  out.reserve(total);
  for (auto& b : buffers) out.insert(out.end(), b.begin(), b.end());
  return out;
}

ValueSequence generate_sequence(const DiagonalForm& form, std::size_t M, double safety, std::uint64_t cap) {
  if (M < 2) throw PreconditionError("generate_sequence: M must be >= 2");
  if (!(safety > 0.0)) throw PreconditionError("generate_sequence: safety margin must be positive");
  const double c = normalization_constant(form);
  const double inv_exponent = static_cast<double>(form.degree()) / static_cast<double>(form.dimension());
  for (int attempt = 0; attempt <= 5; ++attempt, safety *= 2) {
    const double R = std::pow((1.0 + safety) * static_cast<double>(M) / c, inv_exponent);
    std::vector<double> values = values_below(form, R, cap);
    if (values.size() < M) continue;
    std::stable_sort(values.begin(), values.end());
    values.resize(M);
    values.shrink_to_fit();
    return ValueSequence{form, std::move(values), c, R};
  }
  throw GenerationError("generate_sequence: fewer than " + std::to_string(M) +
                        " values found after 5 retries of the safety margin");
}

void write_sequence(std::ostream& out, const ValueSequence& seq) {
  out.write(kMagic.data(), kMagic.size());
  put<std::int64_t>(out, seq.form.degree());
  put<std::int64_t>(out, static_cast<std::int64_t>(seq.form.dimension()));
  put<std::int64_t>(out, static_cast<std::int64_t>(seq.values.size()));
  for (double a : seq.form.coefficients()) put(out, a);
  for (double v : seq.values) put(out, v);
  if (!out) throw Error("failed writing sequence dump");
}

void write_sequence(const std::filesystem::path& path, const ValueSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_sequence(out, seq);
}

ValueSequence read_sequence(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw PreconditionError("not a DFLB1 sequence dump");
  const auto d = get<std::int64_t>(in);
  const auto k = get<std::int64_t>(in);
  const auto M = get<std::int64_t>(in);
  if (k < 2 || M < 0 || d < 2) throw PreconditionError("corrupt sequence dump header");
  std::vector<double> alpha(static_cast<std::size_t>(k));
  for (auto& a : alpha) a = get<double>(in);
  DiagonalForm form(static_cast<int>(d), std::move(alpha));
  std::vector<double> values(static_cast<std::size_t>(M));
  for (auto& v : values) v = get<double>(in);
  return ValueSequence{form, std::move(values), normalization_constant(form), 0.0};
}

ValueSequence read_sequence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_sequence(in);
}

}  // namespace diagform
