#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tfim/experiments.hpp"
#include "tfim/poisson.hpp"
#include "tfim/random_parity.hpp"
#include "tfim/spectral.hpp"

namespace py = pybind11;
using namespace tfim;

namespace {

py::dict result_dict(const RunResult& r) {
  py::dict tables;
  for (const auto& t : r.tables) {
    py::dict d;
    d["columns"] = t.columns;
    d["rows"] = t.rows;
    d["csv"] = to_csv(t);
    tables[py::str(t.name)] = d;
  }
  py::dict out;
  out["tables"] = tables;
  out["summary"] = r.summary;
  out["failures"] = r.failures;
  out["ok"] = r.ok();
  return out;
}

Scheme scheme_from(const std::string& s) {
  for (Scheme k : {Scheme::delete_all, Scheme::add_two_if_empty, Scheme::add_or_delete})
    if (s == scheme_name(k)) return k;
  throw py::value_error("unknown scheme '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_tfim, m) {
  m.doc() = "transverse-field Ising model: representations, identities and experiments";

  static py::exception<EstimationError> estimation_error(m, "EstimationError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const EstimationError& e) {
      py::set_error(estimation_error, e.what());
    }
  });

  m.def(
      "run_config",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<unsigned> workers) {
        RunConfig c = parse_config(text);
        if (seed) c.seed = *seed;
        if (workers) c.workers = *workers;
        RunResult r;
        {
          py::gil_scoped_release nogil;
          r = run_experiment(c);
        }
        return result_dict(r);
      },
      py::arg("text"), py::arg("seed") = py::none(), py::arg("workers") = py::none(),
      "Parse a key = value or JSON config and run it. Returns tables, summary, failures and ok.");

  m.def(
      "check_config",
      [](const std::string& text) { return std::string(kind_name(parse_config(text).kind)); },
      py::arg("text"), "Validate a config; returns its kind or raises ValueError.");

  m.def(
      "lambda_c_1d",
      [](const std::string& text) {
        LambdaCReport L;
        RunConfig c = parse_config(text);
        {
          py::gil_scoped_release nogil;
          L = estimate_lambda_c_1d(c);
        }
        return py::make_tuple(L.estimate, L.uncertainty, L.crossings);
      },
      py::arg("text"));

  m.def("ring_gap", &ring_gap, py::arg("L"), py::arg("lam"), py::arg("delta"));
  m.def(
      "gap_crossing",
      [](int L1, int L2, double delta, double lo, double hi) { return gap_crossing(L1, L2, delta, lo, hi).lambda; },
      py::arg("L1"), py::arg("L2"), py::arg("delta") = 1.0, py::arg("lo") = 0.5, py::arg("hi") = 1.5);
  m.def("E_function", &E_function, py::arg("k"), py::arg("ell"), py::arg("lam"), py::arg("delta"));

  m.def(
      "rn_density", [](const std::string& s, std::size_t k, double at) { return rn_density(scheme_from(s), k, at); },
      py::arg("scheme"), py::arg("k"), py::arg("alpha_t"));
  m.def(
      "rn_bound", [](const std::string& s, double at) { return rn_bound(scheme_from(s), at); }, py::arg("scheme"),
      py::arg("alpha_t"));
  m.def("constant_A", &constant_A, py::arg("x"), py::arg("t"), py::arg("lam"), py::arg("delta"),
        py::arg("beta") = kInf);
  m.def("constant_B", &constant_B, py::arg("N0"), py::arg("r0"), py::arg("lam"), py::arg("delta"), py::arg("d") = 1);
}
