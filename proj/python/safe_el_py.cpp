#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "safe_el/blf.hpp"
#include "safe_el/errors.hpp"
#include "safe_el/plant.hpp"
#include "safe_el/qp.hpp"
#include "safe_el/report.hpp"
#include "safe_el/scenario.hpp"
#include "safe_el/sim.hpp"

namespace py = pybind11;
using namespace safe_el;

namespace {

py::dict solution_dict(const QpSolution& s) {
  py::dict d;
  d["u_star"] = s.u_star;
  d["active_set"] = s.active_set;
  d["multipliers"] = s.multipliers;
  return d;
}

QpProblem make_problem(const Vec& u_d, const Mat& A, const Vec& b) { return {u_d, A, b}; }

// Trajectory columns keyed by CSV header name.
py::dict log_columns(const TrajectoryLog& log) {
  std::ostringstream os;
  write_csv(log, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> names = csv_header(log);
  std::vector<std::vector<double>> cols(names.size());
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    for (std::size_t c = 0; c < names.size() && std::getline(cells, cell, ','); ++c)
      cols[c].push_back(std::stod(cell));
  }
  py::dict d;
  for (std::size_t c = 0; c < names.size(); ++c) d[py::str(names[c])] = cols[c];
  return d;
}

}  // namespace

PYBIND11_MODULE(_safe_el, m) {
  m.doc() = "Safe control of Euler-Lagrange systems (C++ core bindings)";

  // Kept alive for the interpreter's lifetime; the message leads with the kind.
  static PyObject* exc = py::exception<Error>(m, "SafeElError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(exc, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("solve_min_norm",
        [](const Vec& u_d, const Mat& A, const Vec& b) {
          return solution_dict(solve_min_norm(make_problem(u_d, A, b)));
        },
        py::arg("u_d"), py::arg("A"), py::arg("b"),
        "Project u_d onto {u : A u >= b}.");
  m.def("kkt_oracle",
        [](const Vec& u_d, const Mat& A, const Vec& b) {
          return solution_dict(kkt_oracle(make_problem(u_d, A, b)));
        },
        py::arg("u_d"), py::arg("A"), py::arg("b"));

  py::class_<ManipulatorModel>(m, "ManipulatorModel")
      .def(py::init<>())
      .def_readwrite("m1", &ManipulatorModel::m1)
      .def_readwrite("m2", &ManipulatorModel::m2)
      .def_readwrite("l", &ManipulatorModel::l)
      .def_readwrite("g", &ManipulatorModel::g);

  const ManipulatorModel arm;
  m.def("mass_matrix", &mass_matrix, py::arg("model") = arm, py::arg("q"));
  m.def("coriolis_matrix", &coriolis_matrix, py::arg("model") = arm, py::arg("q"), py::arg("w"));
  m.def("gravity_vector", &gravity_vector, py::arg("model") = arm, py::arg("q"));
  m.def("forward_kinematics", &forward_kinematics, py::arg("model") = arm, py::arg("q"));
  m.def("jacobian", &jacobian, py::arg("model") = arm, py::arg("q"));
  m.def("inverse_kinematics", &inverse_kinematics, py::arg("model") = arm, py::arg("p"),
        py::arg("elbow_up") = false);
  m.def("accel", &accel, py::arg("model") = arm, py::arg("q"), py::arg("w"), py::arg("tau"),
        py::arg("tau_d"));

  py::class_<BlfParams>(m, "BlfParams")
      .def(py::init<>())
      .def_readwrite("lambda2", &BlfParams::lambda2)
      .def_readwrite("d1", &BlfParams::d1)
      .def_readwrite("L", &BlfParams::L)
      .def_readwrite("k1", &BlfParams::k1)
      .def_readwrite("eps", &BlfParams::eps)
      .def_readwrite("eps1", &BlfParams::eps1)
      .def_readwrite("eps2", &BlfParams::eps2)
      .def_readwrite("gamma_theta", &BlfParams::gamma_theta)
      .def_readwrite("replicate_paper", &BlfParams::replicate_paper);
  m.def("blf_torque",
        [](const BlfParams& p, double th1, double th2, const Vec& e, const Vec& w_hat,
           const Vec& nu) { return blf_torque(p, BlfState{th1, th2}, e, w_hat, nu); },
        py::arg("params"), py::arg("theta1_hat"), py::arg("theta2_hat"), py::arg("e"),
        py::arg("w_hat"), py::arg("nu"));
  m.def("regressor_phi", &regressor_phi, py::arg("w_hat"), py::arg("d1"));

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return to_json_string(preset(name)); },
        py::arg("name"));
  m.def("run_json",
        [](const std::string& text) {
          const ScenarioConfig sc = scenario_from_json_string(text);
          RunResult r;
          {
            py::gil_scoped_release release;
            r = run(sc);
          }
          py::dict out;
          out["summary_json"] = summary_to_json(r.summary, sc);
          out["columns"] = log_columns(r.log);
          return out;
        },
        py::arg("scenario_json"),
        "Run a scenario given as JSON; returns the summary JSON and trajectory columns.");
}
