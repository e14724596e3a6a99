// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the package's __init__; matrices cross as NumPy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ak/errors.hpp"
#include "ak/gram_io.hpp"
#include "ak/linalg.hpp"
#include "ak/oracle_suites.hpp"
#include "ak/scalar_cm.hpp"
#include "ak/spec_io.hpp"
#include "ak/verify.hpp"

namespace py = pybind11;
using namespace ak;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  const auto r = a.unchecked<2>();
  Matrix m(static_cast<std::size_t>(r.shape(0)), static_cast<std::size_t>(r.shape(1)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    for (py::ssize_t j = 0; j < r.shape(1); ++j) m(i, j) = r(i, j);
  return m;
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
  return out;
}

std::vector<Point> to_points(const Array& a) {
  const Matrix m = to_matrix(a);
  std::vector<Point> pts(m.rows(), Point(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) pts[i][j] = m(i, j);
  return pts;
}

AitkenInstance to_instance(const Array& a, const std::vector<double>& b) { return {SymMatrix(to_matrix(a)), b}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of aitken_kernels";

  py::register_exception<Error>(m, "AkError", PyExc_ValueError);

  m.def("catalog_json", [] {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : catalog_entries())
      out.push_back({{"name", e.name}, {"formula", e.formula}, {"params", e.params}, {"measure", e.measure}});
    return out.dump();
  });
  m.def("recipes_json", [] { return recipe_catalog().dump(); });

  m.def("phi", [](const std::string& name, const Params& params, double t) { return catalog_get(name, params)(t); },
        py::arg("name"), py::arg("params"), py::arg("t"));
  m.def("reconstruct_from_measure",
        [](const std::string& name, const Params& params, double t) {
          return reconstruct_from_measure(catalog_get(name, params), t);
        },
        py::arg("name"), py::arg("params"), py::arg("t"));
  m.def("cm_check_json",
        [](const std::string& name, const Params& params, int orders, const std::vector<double>& grid) {
          const auto r = cm_check(catalog_get(name, params), orders, grid);
          return nlohmann::json{{"pass", r.pass},
                                {"worst_violation", r.worst_violation},
                                {"witness_order", r.witness_order},
                                {"witness_t", r.witness_t},
                                {"orders", r.orders}}
              .dump();
        },
        py::arg("name"), py::arg("params"), py::arg("orders"), py::arg("grid"));
  m.def("matern_eval", &matern_eval, py::arg("nu"), py::arg("r"), py::arg("u"), py::arg("nodes") = 64);

  m.def("aitken_rhs", [](const Array& a, const std::vector<double>& b) { return aitken_rhs(to_instance(a, b)); },
        py::arg("a"), py::arg("b"));
  m.def("aitken_lhs",
        [](const Array& a, const std::vector<double>& b, int nodes) {
          const auto r = aitken_lhs(to_instance(a, b), TensorHermite{nodes});
          return py::make_tuple(r.real, r.imag, r.error_estimate);
        },
        py::arg("a"), py::arg("b"), py::arg("nodes") = 64);
  m.def("aitken_lhs_mc",
        [](const Array& a, const std::vector<double>& b, std::size_t samples, std::uint64_t seed) {
          const auto r = aitken_lhs(to_instance(a, b), MonteCarlo{samples, seed});
          return py::make_tuple(r.real, r.imag, r.error_estimate);
        },
        py::arg("a"), py::arg("b"), py::arg("samples") = 20000, py::arg("seed") = 42);

  m.def("hadamard_exp_neg", [](const Array& a) { return to_array(hadamard_exp_neg(SymMatrix(to_matrix(a))).matrix()); });
  m.def("negative_type_check",
        [](const Array& a, int trials, std::uint64_t seed, std::size_t block_size) {
          const auto r = negative_type_check(SymMatrix(to_matrix(a)), trials, seed, block_size);
          return py::make_tuple(r.pass, r.max_form);
        },
        py::arg("a"), py::arg("trials") = 32, py::arg("seed") = 42, py::arg("block_size") = 1);

  m.def("spec_hash", [](const std::string& text) { return spec_hash(parse_kernel_spec(text)); });
  m.def("build_gram",
        [](const std::string& text, const Array& points, bool unsafe, double tol_psd, double tol_pd) {
          const auto spec = parse_kernel_spec(text);
          BuildOptions opts;
          opts.unsafe = unsafe;
          const auto k = build_from_spec(spec, opts);
          const auto gram = assemble_gram(k, to_points(points));
          const auto report = spectral_json(classify_gram(gram, tol_psd, tol_pd));
          return py::make_tuple(to_array(gram.flattened.matrix()), report.dump(), k.provenance().dump());
        },
        py::arg("spec"), py::arg("points"), py::arg("unsafe") = false, py::arg("tol_psd") = kDefaultTolPsd,
        py::arg("tol_pd") = kDefaultTolPd);
  m.def("check_spec_json",
        [](const std::string& text, int n_points, int n_freq, std::uint64_t seed) {
          const auto r = check_spec(parse_kernel_spec(text), n_points, n_freq, seed);
          return nlohmann::json{{"pass", r.pass}, {"reports", r.reports}}.dump();
        },
        py::arg("spec"), py::arg("n_points") = 6, py::arg("n_freq") = 16, py::arg("seed") = 42);
  m.def("run_oracle_suite_json",
        [](const std::string& name, std::uint64_t seed, int trials) { return run_oracle_suite(name, seed, trials).dump(); },
        py::arg("name"), py::arg("seed") = 42, py::arg("trials") = 100);
  m.def("oracle_suite_names", &oracle_suite_names);
}
