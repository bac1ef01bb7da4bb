// Python module mavoid._core.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mavoid/errors.hpp"
#include "mavoid/pipeline.hpp"

namespace py = pybind11;
using namespace mavoid;

namespace {

// (t, q) with q of shape [samples, agents, ambient dim].
py::tuple path_arrays(const PathSamples& p) {
  const auto n = static_cast<py::ssize_t>(p.t.size());
  const auto agents = n ? static_cast<py::ssize_t>(p.q.front().size()) : 0;
  const auto dim = static_cast<py::ssize_t>(p.manifold.ambient_dim());
  py::array_t<double> t(n);
  py::array_t<double> q({n, agents, dim});
  auto tv = t.mutable_unchecked<1>();
  auto qv = q.mutable_unchecked<3>();
  for (py::ssize_t s = 0; s < n; ++s) {
    tv(s) = p.t[s];
    for (py::ssize_t i = 0; i < agents; ++i) {
      for (py::ssize_t c = 0; c < dim; ++c) qv(s, i, c) = p.q[s][i][c];
    }
  }
  return py::make_tuple(t, q);
}

py::list avoidance_list(const std::vector<EdgeAvoidance>& av) {
  py::list out;
  for (const auto& e : av) {
    py::dict d;
    d["edge"] = py::make_tuple(e.edge.i + 1, e.edge.j + 1);
    d["min_distance"] = e.min_distance;
    d["argmin_t"] = e.argmin_t;
    d["avoided"] = e.avoided;
    out.append(d);
  }
  return out;
}

py::dict solve_dict(const Scenario& s, const SolveReport& rep) {
  py::dict d;
  d["converged"] = rep.converged;
  d["residual"] = rep.residual;
  d["function_evals"] = rep.function_evals;
  d["message"] = rep.message;
  d["unknowns"] = rep.unknowns;
  if (!rep.trajectory.samples.empty()) {
    const auto arrays = path_arrays(path_samples(rep.trajectory));
    d["t"] = arrays[0];
    d["q"] = arrays[1];
    d["avoidance"] = avoidance_list(check_avoidance(rep.trajectory, s.graph, s.tolerances));
    d["csv"] = write_trajectory(rep.trajectory, s.graph.edges());
  }
  return d;
}

Manifold manifold_from(const std::string& name) {
  if (name == "s2") return Manifold::sphere();
  if (name.size() > 1 && name[0] == 'r') return Manifold::euclidean(std::stoi(name.substr(1)));
  throw InputError("unknown manifold '" + name + "' (use r<n> or s2)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Collision-avoiding multi-agent trajectories on R^n and S^2";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<RecipeError>(m, "RecipeError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  m.def("dist", [](const std::string& mf, const Vec& p, const Vec& q) { return dist(manifold_from(mf), p, q); },
        py::arg("manifold"), py::arg("p"), py::arg("q"));
  m.def("log_map", [](const std::string& mf, const Vec& p, const Vec& q) { return log_map(manifold_from(mf), p, q); },
        py::arg("manifold"), py::arg("p"), py::arg("q"));
  m.def("exp_map", [](const std::string& mf, const Vec& p, const Vec& v) { return exp_map(manifold_from(mf), p, v); },
        py::arg("manifold"), py::arg("p"), py::arg("v"));
  m.def("exp_rotation", [](const Vec3& a) { return Mat3(exp_rotation(a).matrix()); });
  m.def("log_rotation", [](const Mat3& r) { return log_rotation(Rotation(r)); });

  py::enum_<PotentialFamily>(m, "PotentialFamily")
      .value("Inverse", PotentialFamily::Inverse)
      .value("Bump", PotentialFamily::Bump);
  py::class_<PotentialParams>(m, "PotentialParams")
      .def(py::init([](PotentialFamily f, double D, double eps, int k) {
             PotentialParams p{f, D, eps, k};
             p.validate();
             return p;
           }),
           py::arg("family") = PotentialFamily::Inverse, py::arg("D") = 1.0, py::arg("eps") = 1.0,
           py::arg("k") = 2)
      .def_readonly("family", &PotentialParams::family)
      .def_readonly("D", &PotentialParams::D)
      .def_readonly("eps", &PotentialParams::eps)
      .def_readonly("k", &PotentialParams::k)
      .def("__call__", [](const PotentialParams& p, double d) { return eval_potential(p, d); })
      .def("slope", [](const PotentialParams& p, double d) { return potential_slope(p, d); })
      .def("__repr__", [](const PotentialParams& p) {
        return "PotentialParams(" + to_string(p.family) + ", D=" + format_double(p.D) +
               ", eps=" + format_double(p.eps) + ", k=" + std::to_string(p.k) + ")";
      });

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_property_readonly("manifold", [](const Scenario& s) { return s.manifold.name(); })
      .def_property_readonly("agents", &Scenario::agent_count)
      .def_property_readonly("T", [](const Scenario& s) { return s.bc.T; })
      .def_property_readonly("edges",
                             [](const Scenario& s) {
                               py::list out;
                               for (const auto& e : s.graph.edges()) out.append(py::make_tuple(e.i + 1, e.j + 1));
                               return out;
                             })
      .def("to_json", &scenario_to_json)
      .def("solve",
           [](const Scenario& s, std::optional<long> max_evals) {
             Scenario c = s;
             if (max_evals) c.solver.max_evals = *max_evals;
             SolveReport rep;
             {
               py::gil_scoped_release release;
               rep = solve_bvp(c.problem(), c.solve_options());
             }
             return solve_dict(c, rep);
           },
           py::arg("max_evals") = py::none())
      .def("baseline",
           [](const Scenario& s) {
             const auto p = s.potential_free_problem();
             SolveReport rep;
             rep.message = "potential-free cubic";
             rep.unknowns = cubic_init(p);
             rep.trajectory = shoot_trajectory(p, rep.unknowns);
             rep.residual = residual(p, rep.unknowns);
             rep.converged = true;
             return solve_dict(s, rep);
           })
      .def("certify",
           [](const Scenario& s, std::optional<double> vstar) {
             CertifyOptions co;
             co.vstar = vstar;
             return write_certificate(certify_scenario(s, co));
           },
           py::arg("vstar") = py::none());

  m.def("parse_scenario", &parse_scenario, py::arg("text"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("bundled_scenario", [](const std::string& which) { return parse_scenario(bundled_scenario(which)); },
        py::arg("which"));
}
