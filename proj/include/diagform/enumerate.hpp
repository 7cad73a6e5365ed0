#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "diagform/forms.hpp"

namespace diagform {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 33;

// The M smallest normalized values of a form, sorted ascending. Every value
// comes from a point with q(x) <= threshold, and all such points were visited.
struct ValueSequence {
  DiagonalForm form;
  std::vector<double> values;
  double normalization = 0.0;  // c(d, k, alpha)
  double threshold = 0.0;      // q-cutoff actually enumerated

  std::size_t size() const { return values.size(); }
};

// c * R^{k/d}: volume of {x > 0 : q(x) <= R}. Bounds the lattice count from above.
double predicted_count(const DiagonalForm& form, double R);

// Exact number of x in Z_{>0}^k with q(x) <= R. Refuses (ResourceError) when
// predicted_count(R) exceeds cap.
std::uint64_t count_below(const DiagonalForm& form, double R, std::uint64_t cap = kDefaultEnumerationCap);

// All normalized values with q(x) <= R, unsorted, in lexicographic order of x.
std::vector<double> values_below(const DiagonalForm& form, double R, std::uint64_t cap = kDefaultEnumerationCap);

// Enumerates up to R = ((1+safety) M / c)^{d/k}, sorts and truncates to M.
// Retries with doubled safety (at most 5 times) when fewer than M values turn up.
ValueSequence generate_sequence(const DiagonalForm& form, std::size_t M, double safety = 0.15,
                                std::uint64_t cap = kDefaultEnumerationCap);

// Binary layout, little-endian: "DFLB1", int64 d, int64 k, int64 M,
// k doubles alpha, M doubles values.
void write_sequence(std::ostream& out, const ValueSequence& seq);
void write_sequence(const std::filesystem::path& path, const ValueSequence& seq);
ValueSequence read_sequence(std::istream& in);
ValueSequence read_sequence(const std::filesystem::path& path);

}  // namespace diagform
