#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diagform/census.hpp"
#include "diagform/cli.hpp"
#include "diagform/correlate.hpp"
#include "diagform/dioph.hpp"
#include "diagform/enumerate.hpp"
#include "diagform/errors.hpp"
#include "diagform/sweep.hpp"

namespace py = pybind11;
using namespace diagform;

namespace {

py::array_t<double> to_numpy(std::vector<double> v) {
  auto* owner = new std::vector<double>(std::move(v));
  py::capsule free_when_done(owner, [](void* p) { delete static_cast<std::vector<double>*>(p); });
  return py::array_t<double>(static_cast<py::ssize_t>(owner->size()), owner->data(), free_when_done);
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw PreconditionError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

Box window_of(const std::vector<std::pair<double, double>>& box) {
  std::vector<double> lo, hi;
  for (auto [a, b] : box) {
    lo.push_back(a);
    hi.push_back(b);
  }
  return Box(lo, hi);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());

  m.def("normalization_constant",
        [](int d, std::vector<double> alpha) { return normalization_constant(DiagonalForm(d, std::move(alpha))); },
        py::arg("d"), py::arg("alpha"));

  m.def("count_below",
        [](int d, std::vector<double> alpha, double R) { return count_below(DiagonalForm(d, std::move(alpha)), R); },
        py::arg("d"), py::arg("alpha"), py::arg("R"));

  m.def(
      "sequence",
      [](int d, std::vector<double> alpha, std::size_t M) {
        std::vector<double> values;
        {
          py::gil_scoped_release release;
          values = generate_sequence(DiagonalForm(d, std::move(alpha)), M).values;
        }
        return to_numpy(std::move(values));
      },
      py::arg("d"), py::arg("alpha"), py::arg("M"), "Sorted leading M normalized values.");

  m.def(
      "ell_correlation",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values, int ell,
         const std::vector<std::pair<double, double>>& box, std::optional<std::size_t> M) {
        const auto v = as_vector(values);
        const auto r = ell_correlation(v, {ell, window_of(box), M.value_or(v.size())});
        py::dict out;
        out["raw_count"] = r.raw_count;
        out["T"] = r.statistic;
        out["vol_I"] = r.poisson_target;
        out["M"] = r.count;
        return out;
      },
      py::arg("values"), py::arg("ell"), py::arg("box"), py::arg("M") = py::none(),
      "box is a list of (lo, hi) half-open intervals, one per j = 2..ell.");

  m.def(
      "gap_sequence",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
        return to_numpy(gap_sequence(as_vector(values)));
      },
      py::arg("values"));
  m.def(
      "ks_against_exponential",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& gaps) {
        return ks_against_exponential(as_vector(gaps));
      },
      py::arg("gaps"));
  m.def(
      "long_gaps",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values, double threshold) {
        return long_gaps(as_vector(values), threshold).positions;
      },
      py::arg("values"), py::arg("threshold") = 2.006, "0-based positions i with values[i+1] - values[i] >= threshold.");

  m.def(
      "smoothed_correlation",
      [](int d, std::vector<double> alpha, std::int64_t M, int ell, double w) {
        return smoothed_correlation(DiagonalForm(d, std::move(alpha)), M, SmoothingKernels::canonical(ell, w));
      },
      py::arg("d"), py::arg("alpha"), py::arg("M"), py::arg("ell") = 2, py::arg("w") = 1.0);

  m.def(
      "count_equation",
      [](const std::vector<std::int64_t>& a, int d, std::int64_t M, bool primitive, bool nonzero) {
        py::gil_scoped_release release;
        return count_equation(a, d, M, {.primitive = primitive, .nonzero_only = nonzero});
      },
      py::arg("a"), py::arg("d"), py::arg("M"), py::arg("primitive") = false, py::arg("nonzero") = false);
  m.def(
      "count_inequality",
      [](const std::vector<std::int64_t>& a, int d, std::int64_t M, double H) {
        py::gil_scoped_release release;
        return count_inequality(a, d, M, H);
      },
      py::arg("a"), py::arg("d"), py::arg("M"), py::arg("H"));
  m.def(
      "fejer_chain_check",
      [](std::int64_t a1, std::int64_t a2, int d, std::int64_t M, double H) {
        const auto r = fejer_chain_check(a1, a2, d, M, H);
        py::dict out;
        out["mixed"] = r.mixed;
        out["first"] = r.first;
        out["second"] = r.second;
        out["holds"] = r.holds;
        return out;
      },
      py::arg("a1"), py::arg("a2"), py::arg("d"), py::arg("M"), py::arg("H"));

  m.def(
      "census",
      [](std::size_t ell, std::size_t k, int d, std::int64_t M) {
        CensusConfig cfg;
        cfg.rows = ell;
        cfg.cols = k;
        cfg.degree = d;
        cfg.M = M;
        CensusHistogram h;
        {
          py::gil_scoped_release release;
          h = census(cfg);
        }
        // Keys (rank, delta class); class -1 marks rank < ell.
        py::dict bins;
        for (const auto& [key, count] : h.bins) bins[py::make_tuple(key.first, key.second)] = count;
        return bins;
      },
      py::arg("ell"), py::arg("k"), py::arg("d"), py::arg("M"), "Exhaustive census histogram.");

  m.def(
      "sweep",
      [](std::vector<std::pair<double, double>> domain, std::size_t n, std::uint64_t seed,
         std::vector<std::size_t> schedule, int d, std::size_t bootstrap) {
        SweepConfig cfg{window_of(domain), n, seed, std::move(schedule), 2, Box::interval(0, 1), d, bootstrap};
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = run_sweep(cfg);
        }
        py::list rows;
        for (const auto& e : r.estimates) {
          py::dict row;
          row["M"] = e.M;
          row["weak"] = e.weak;
          row["weak_ci"] = py::make_tuple(e.weak_ci.lo, e.weak_ci.hi);
          row["l2"] = e.l2;
          row["l2_ci"] = py::make_tuple(e.l2_ci.lo, e.l2_ci.hi);
          row["median_abs_deviation"] = e.median_abs_deviation;
          rows.append(row);
        }
        return rows;
      },
      py::arg("domain"), py::arg("n"), py::arg("seed"), py::arg("schedule"), py::arg("d") = 2,
      py::arg("bootstrap") = 1000, "Pair correlation sweep over alpha in the domain box, I = [0, 1).");
}
