#include <cstring>
#include <optional>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybridvr/compare.hpp"
#include "hybridvr/csv_io.hpp"
#include "hybridvr/deck.hpp"
#include "hybridvr/errors.hpp"
#include "hybridvr/importance.hpp"
#include "hybridvr/mc_engine.hpp"
#include "hybridvr/problem_model.hpp"
#include "hybridvr/quadrature.hpp"
#include "hybridvr/sn_solver.hpp"

namespace py = pybind11;
namespace hv = hybridvr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const hv::CellGroupField& f) {
  Array out({f.cells(), f.groups()});
  const auto v = f.values();
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

hv::CellGroupField from_numpy(const Array& a, const char* what) {
  if (a.ndim() != 2) throw std::invalid_argument(std::string(what) + " must be (cells, groups)");
  hv::CellGroupField f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::memcpy(f.values().data(), a.data(), f.values().size() * sizeof(double));
  return f;
}

// (groups, cells, directions) view of an angular flux.
Array angular_to_numpy(const hv::AngularFluxField& f) {
  Array out({f.groups(), f.cells(), f.directions()});
  double* dst = out.mutable_data();
  for (int g = 0; g < f.groups(); ++g)
    for (int c = 0; c < f.cells(); ++c) {
      const auto src = f.at(c, g);
      std::memcpy(dst, src.data(), src.size() * sizeof(double));
      dst += src.size();
    }
  return out;
}

hv::TransportMode parse_mode(const std::string& mode) {
  if (mode == "forward") return hv::TransportMode::forward;
  if (mode == "adjoint") return hv::TransportMode::adjoint;
  throw std::invalid_argument("mode must be 'forward' or 'adjoint'");
}

hv::SolveOptions solve_options(double tol, int max_iters, const std::string& scheme) {
  hv::SolveOptions o;
  o.tol = tol;
  o.max_iters = max_iters;
  const auto s = hv::parse_spatial_scheme(scheme);
  if (!s) throw std::invalid_argument("scheme must be 'sc' or 'dd'");
  o.scheme = *s;
  return o;
}

hv::VrMethod parse_method(const std::string& name) {
  const auto m = hv::parse_vr_method(name);
  if (!m) throw std::invalid_argument("unknown method '" + name + "'");
  return *m;
}

hv::McOptions mc_options(std::uint64_t histories, std::uint64_t seed, int workers) {
  if (histories == 0) throw std::invalid_argument("histories must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  hv::McOptions o;
  o.histories = histories;
  o.seed = seed;
  o.workers = workers;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic-importance variance reduction for 2-D multigroup Monte Carlo";

  py::register_exception<hv::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<hv::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<hv::SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<hv::ProblemModel>(m, "ProblemModel")
      .def_readonly("name", &hv::ProblemModel::name)
      .def_property_readonly("nx", [](const hv::ProblemModel& p) { return p.mesh.nx; })
      .def_property_readonly("ny", [](const hv::ProblemModel& p) { return p.mesh.ny; })
      .def_property_readonly("groups", &hv::ProblemModel::n_groups)
      .def_property_readonly("cells", [](const hv::ProblemModel& p) { return p.mesh.cell_count(); })
      .def_property_readonly("cell_volume",
                             [](const hv::ProblemModel& p) { return p.mesh.cell_volume(); })
      .def_property_readonly("material_names",
                             [](const hv::ProblemModel& p) {
                               std::vector<std::string> names;
                               for (const auto& mat : p.xs.materials) names.push_back(mat.name);
                               return names;
                             })
      .def_property_readonly("cell_material",
                             [](const hv::ProblemModel& p) { return p.mesh.cell_material; })
      .def("locate", [](const hv::ProblemModel& p, double x, double y) { return p.mesh.locate(x, y); },
           py::arg("x"), py::arg("y"))
      .def("source_density", [](const hv::ProblemModel& p) { return to_numpy(hv::source_density(p)); })
      .def("response_density",
           [](const hv::ProblemModel& p) { return to_numpy(hv::response_density(p)); })
      .def("total_source_strength", &hv::total_source_strength)
      .def("to_json", &hv::deck_to_string)
      .def("__eq__", [](const hv::ProblemModel& a, const hv::ProblemModel& b) { return a == b; })
      .def("__repr__", [](const hv::ProblemModel& p) {
        return "<ProblemModel " + p.name + " " + std::to_string(p.mesh.nx) + "x" +
               std::to_string(p.mesh.ny) + " groups=" + std::to_string(p.n_groups()) + ">";
      });

  m.def("builtin_problem", [](const std::string& name) { return hv::builtin_problem(name); },
        py::arg("name"));
  m.def("builtin_problem_names", &hv::builtin_problem_names);
  m.def("load_deck", [](const std::string& path) { return hv::load_deck(path); }, py::arg("path"));
  m.def("parse_deck", [](const std::string& text) { return hv::parse_deck(text); }, py::arg("text"));
  m.def("write_deck",
        [](const hv::ProblemModel& p, const std::string& path) { hv::write_deck(p, path); },
        py::arg("model"), py::arg("path"));

  py::class_<hv::QuadratureSet>(m, "Quadrature")
      .def_property_readonly("size", &hv::QuadratureSet::size)
      .def_property_readonly("weights",
                             [](const hv::QuadratureSet& q) {
                               Array out(q.size());
                               for (int k = 0; k < q.size(); ++k) out.mutable_at(k) = q.weight(k);
                               return out;
                             })
      .def_property_readonly("directions", [](const hv::QuadratureSet& q) {
        Array out({q.size(), 3});
        for (int k = 0; k < q.size(); ++k) {
          const hv::Direction& d = q.direction(k);
          out.mutable_at(k, 0) = d.mu;
          out.mutable_at(k, 1) = d.eta;
          out.mutable_at(k, 2) = d.xi;
        }
        return out;
      });
  m.def("build_quadrature", &hv::build_quadrature, py::arg("n_polar"), py::arg("n_azim"));

  py::class_<hv::SolveReport>(m, "SolveReport")
      .def_readonly("iterations", &hv::SolveReport::iterations)
      .def_readonly("max_rel_change", &hv::SolveReport::max_rel_change)
      .def_readonly("balance_residual", &hv::SolveReport::balance_residual)
      .def_readonly("fixups", &hv::SolveReport::fixups)
      .def_readonly("outer_iterations", &hv::SolveReport::outer_iterations)
      .def_readonly("converged", &hv::SolveReport::converged);

  py::class_<hv::SolveResult>(m, "SolveResult")
      .def_property_readonly("scalar", [](const hv::SolveResult& r) { return to_numpy(r.scalar); })
      .def_property_readonly("angular",
                             [](const hv::SolveResult& r) { return angular_to_numpy(r.angular); })
      .def_readonly("report", &hv::SolveResult::report);

  m.def(
      "solve",
      [](const hv::ProblemModel& model, const hv::QuadratureSet& quad, const std::string& mode,
         std::optional<Array> adjoint_source, double tol, int max_iters,
         const std::string& scheme) {
        std::optional<hv::CellGroupField> src;
        if (adjoint_source) src = from_numpy(*adjoint_source, "adjoint_source");
        const auto opts = solve_options(tol, max_iters, scheme);
        py::gil_scoped_release release;
        return hv::solve(model, quad, parse_mode(mode), src, opts);
      },
      py::arg("model"), py::arg("quad"), py::arg("mode") = "forward",
      py::arg("adjoint_source") = py::none(), py::arg("tol") = 1e-6, py::arg("max_iters") = 2000,
      py::arg("scheme") = "sc");

  m.def(
      "response",
      [](const Array& flux, const Array& weight, const hv::ProblemModel& model) {
        return hv::response(from_numpy(flux, "flux"), from_numpy(weight, "weight"), model.mesh);
      },
      py::arg("flux"), py::arg("weight"), py::arg("model"));

  m.def(
      "omega_flux",
      [](const hv::SolveResult& fwd, const hv::SolveResult& adj, const hv::QuadratureSet& quad) {
        const auto o = hv::omega_flux(fwd.angular, adj.angular, quad);
        return py::make_tuple(to_numpy(o.values), o.fallback);
      },
      py::arg("forward"), py::arg("adjoint"), py::arg("quad"),
      "Directional adjoint flux and per (cell, group) fallback flags, flattened c * G + g.");

  py::class_<hv::ImportanceMap>(m, "ImportanceMap")
      .def_property_readonly("method",
                             [](const hv::ImportanceMap& w) { return std::string(hv::to_string(w.method)); })
      .def_readonly("R", &hv::ImportanceMap::R)
      .def_readonly("rho", &hv::ImportanceMap::rho)
      .def_readonly("nx", &hv::ImportanceMap::nx)
      .def_readonly("ny", &hv::ImportanceMap::ny)
      .def_readonly("groups", &hv::ImportanceMap::groups)
      .def_property_readonly("q_hat", [](const hv::ImportanceMap& w) { return to_numpy(w.q_hat); })
      .def_property_readonly("w0", [](const hv::ImportanceMap& w) { return to_numpy(w.w0); })
      .def_property_readonly("w_low", [](const hv::ImportanceMap& w) { return to_numpy(w.w_low); })
      .def_property_readonly("w_surv", [](const hv::ImportanceMap& w) { return to_numpy(w.w_surv); })
      .def_property_readonly("w_high", [](const hv::ImportanceMap& w) { return to_numpy(w.w_high); })
      .def("__eq__", [](const hv::ImportanceMap& a, const hv::ImportanceMap& b) { return a == b; });

  m.def(
      "cadis_params",
      [](const Array& phi_adj, const hv::ProblemModel& model, double rho,
         const std::string& method) {
        return hv::cadis_params(from_numpy(phi_adj, "phi_adj"), model, rho, parse_method(method));
      },
      py::arg("phi_adj"), py::arg("model"), py::arg("rho") = 5.0, py::arg("method") = "cadis");

  py::class_<hv::VrResult>(m, "VrResult")
      .def_readonly("map", &hv::VrResult::map)
      .def_property_readonly("importance",
                             [](const hv::VrResult& r) { return to_numpy(r.importance); })
      .def_readonly("seconds", &hv::VrResult::seconds)
      .def_property_readonly("solve_seconds", [](const hv::VrResult& r) {
        py::dict d;
        for (const auto& s : r.solves) d[py::str(s.label)] = s.seconds;
        return d;
      });

  m.def(
      "make_vr",
      [](const hv::ProblemModel& model, const hv::QuadratureSet& quad, const std::string& method,
         const std::string& objective, double rho, double tol, const std::string& scheme) {
        hv::VrOptions o;
        o.method = parse_method(method);
        const auto obj = hv::parse_fw_objective(objective);
        if (!obj) throw std::invalid_argument("unknown objective '" + objective + "'");
        o.objective = *obj;
        o.rho = rho;
        o.solve = solve_options(tol, 2000, scheme);
        py::gil_scoped_release release;
        return hv::make_vr(model, quad, o);
      },
      py::arg("model"), py::arg("quad"), py::arg("method") = "cadis",
      py::arg("objective") = "dose_space", py::arg("rho") = 5.0, py::arg("tol") = 1e-6,
      py::arg("scheme") = "sc");

  m.def(
      "write_importance_map",
      [](const hv::ImportanceMap& map, const std::string& prefix) {
        hv::write_weight_windows(hv::ww_path(prefix), map);
        hv::write_biased_source(hv::biased_source_path(prefix), map);
      },
      py::arg("map"), py::arg("prefix"));
  m.def(
      "read_importance_map",
      [](const std::string& prefix) {
        return hv::read_importance_map(hv::ww_path(prefix), hv::biased_source_path(prefix));
      },
      py::arg("prefix"));

  py::class_<hv::Tally>(m, "Tally")
      .def_readonly("groups", &hv::Tally::groups)
      .def_readonly("mean", &hv::Tally::mean)
      .def_readonly("rel_err", &hv::Tally::rel_err)
      .def_readonly("scored", &hv::Tally::scored)
      .def_readonly("total_mean", &hv::Tally::total_mean)
      .def_readonly("total_rel_err", &hv::Tally::total_rel_err)
      .def_readonly("histories", &hv::Tally::histories)
      .def_readonly("time_minutes", &hv::Tally::time_minutes)
      .def_readonly("leakage", &hv::Tally::leakage)
      .def_readonly("leakage_rel_err", &hv::Tally::leakage_rel_err)
      .def_readonly("collisions", &hv::Tally::collisions)
      .def_readonly("splits", &hv::Tally::splits)
      .def("response", &hv::Tally::response)
      .def("to_csv", &hv::tally_to_csv, py::arg("include_timing") = true);

  m.def(
      "run_histories",
      [](const hv::ProblemModel& model, const hv::ImportanceMap* map, std::uint64_t histories,
         std::uint64_t seed, int workers) {
        const auto o = mc_options(histories, seed, workers);
        py::gil_scoped_release release;
        return hv::run_histories(model, map, o);
      },
      py::arg("model"), py::arg("map") = nullptr, py::arg("histories") = 100000,
      py::arg("seed") = 1, py::arg("workers") = 1);

  m.def("fom", &hv::fom, py::arg("minutes"), py::arg("rel_err"));

  py::class_<hv::CompareRow>(m, "CompareRow")
      .def_readonly("method", &hv::CompareRow::method)
      .def_readonly("t_mc", &hv::CompareRow::t_mc)
      .def_readonly("t_det", &hv::CompareRow::t_det)
      .def_readonly("fom_mc", &hv::CompareRow::fom_mc)
      .def_readonly("fom_adjusted", &hv::CompareRow::fom_adjusted)
      .def_readonly("tally", &hv::CompareRow::tally)
      .def("sigma", &hv::CompareRow::sigma);

  py::class_<hv::CompareReport>(m, "CompareReport")
      .def_readonly("rows", &hv::CompareReport::rows)
      .def("row", &hv::CompareReport::row, py::arg("method"), py::return_value_policy::copy)
      .def("table", &hv::format_compare_table)
      .def("summary_csv", &hv::compare_summary_csv)
      .def("groups_csv", &hv::compare_groups_csv);

  m.def(
      "run_compare",
      [](const hv::ProblemModel& model, const hv::QuadratureSet& quad, std::uint64_t histories,
         std::uint64_t seed, int workers, double rho, double tol) {
        hv::CompareOptions o;
        o.mc = mc_options(histories, seed, workers);
        o.solve.tol = tol;
        o.rho = rho;
        py::gil_scoped_release release;
        return hv::run_compare(model, quad, o);
      },
      py::arg("model"), py::arg("quad"), py::arg("histories") = 100000, py::arg("seed") = 1,
      py::arg("workers") = 1, py::arg("rho") = 5.0, py::arg("tol") = 1e-6);
}
