#include <memory>
#include <optional>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pocp/error.hpp"
#include "pocp/experiment.hpp"
#include "pocp/reduced.hpp"
#include "pocp/saddle.hpp"
#include "pocp/spectra.hpp"

namespace py = pybind11;
using namespace pocp;

namespace {

std::shared_ptr<const SpatialDiscretization> discretization_for(const SpatialMesh& mesh) {
  auto shared = std::make_shared<const SpatialMesh>(mesh);
  return std::make_shared<const SpatialDiscretization>(make_discretization(shared));
}

DataFunction data_from(const py::object& obj) {
  if (py::isinstance<DataFunction>(obj)) return obj.cast<DataFunction>();
  return DataFunction::constant(obj.cast<double>());
}

ProblemSpec make_spec(int dim, double T, double lambda, double alpha, double c, const py::object& y0,
                      const py::object& y_omega, const py::object& y_q) {
  ProblemSpec ps;
  ps.dim = dim;
  ps.T = T;
  ps.lambda = lambda;
  ps.alpha = alpha;
  ps.c = c;
  if (!y0.is_none()) ps.y0 = data_from(y0);
  if (!y_q.is_none()) {
    ps.target = TrackingTarget{data_from(y_q)};
  } else if (!y_omega.is_none()) {
    ps.target = EndTimeTarget{data_from(y_omega)};
  }
  return ps;
}

py::dict kkt_dict(const KktResiduals& r) {
  py::dict d;
  d["state"] = r.state;
  d["adjoint"] = r.adjoint;
  d["gradient"] = r.gradient;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pocp, m) {
  m.doc() = "Optimal control of linear parabolic PDEs: reduced CG, all-at-once MINRES and spectra";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<DataFunction>(m, "DataFunction")
      .def_static("zero", &DataFunction::zero)
      .def_static("constant", &DataFunction::constant, py::arg("value"))
      .def_static("cos_product", &DataFunction::cos_product, py::arg("frequency") = 1.0,
                  py::arg("amplitude") = 1.0)
      .def_static("cos_product_decay", &DataFunction::cos_product_decay, py::arg("frequency"),
                  py::arg("rate"), py::arg("amplitude") = 1.0)
      .def_property_readonly("name", &DataFunction::name)
      .def("__call__",
           [](const DataFunction& f, const Eigen::VectorXd& x, std::optional<double> t) { return f.eval(x, t); },
           py::arg("x"), py::arg("t") = py::none())
      .def("__repr__", [](const DataFunction& f) { return "<DataFunction " + f.name() + ">"; });

  py::class_<SpatialMesh, std::shared_ptr<SpatialMesh>>(m, "SpatialMesh")
      .def_property_readonly("dim", &SpatialMesh::dim)
      .def_property_readonly("num_nodes", &SpatialMesh::num_nodes)
      .def_property_readonly("num_elements", &SpatialMesh::num_elements)
      .def_property_readonly("coords", &SpatialMesh::coords)
      .def_property_readonly("elements", &SpatialMesh::elements);
  m.def("interval_mesh", [](int n) { return std::make_shared<SpatialMesh>(build_interval_mesh(n)); },
        py::arg("n_elems"));
  m.def("unit_square_mesh", [](int n) { return std::make_shared<SpatialMesh>(build_unit_square_mesh(n)); },
        py::arg("n_per_side"));

  py::class_<KrylovReport>(m, "KrylovReport")
      .def_readonly("iterations", &KrylovReport::iterations)
      .def_readonly("residual_history", &KrylovReport::residual_history)
      .def_readonly("converged", &KrylovReport::converged)
      .def_readonly("cycles", &KrylovReport::cycles)
      .def_property_readonly("termination", [](const KrylovReport& r) { return std::string(to_string(r.termination)); });

  py::class_<DiscreteProblem>(m, "DiscreteProblem")
      .def_property_readonly("nx", [](const DiscreteProblem& dp) { return dp.system->nx(); })
      .def_property_readonly("steps", [](const DiscreteProblem& dp) { return dp.system->steps(); })
      .def_property_readonly("lambda_", &DiscreteProblem::lambda)
      .def_property_readonly("tracking", &DiscreteProblem::tracking)
      .def_property_readonly("taus", [](const DiscreteProblem& dp) { return dp.system->grid().taus(); })
      .def_property_readonly("mass", [](const DiscreteProblem& dp) { return dp.system->mass().full(); })
      .def("dense_K", [](const DiscreteProblem& dp) { return dp.system->dense_K(); })
      .def("solve_forward",
           [](const DiscreteProblem& dp, const Eigen::MatrixXd& u) {
             return dp.system->solve_forward(BlockVector(u), dp.y0_load).values();
           },
           py::arg("u"))
      .def("apply_reduced",
           [](const DiscreteProblem& dp, const Eigen::MatrixXd& u) {
             return make_reduced_operator(dp).apply(BlockVector(u)).values();
           },
           py::arg("u"))
      .def("objective",
           [](const DiscreteProblem& dp, const Eigen::MatrixXd& u) {
             const BlockVector uu(u);
             return evaluate_objective(dp, uu, state_for(dp, uu));
           },
           py::arg("u"))
      .def("gradient",
           [](const DiscreteProblem& dp, const Eigen::MatrixXd& u) {
             return reduced_gradient(dp, BlockVector(u)).values();
           },
           py::arg("u"))
      .def("inner_DM",
           [](const DiscreteProblem& dp, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
             return dp.system->inner_DM(BlockVector(a), BlockVector(b));
           },
           py::arg("a"), py::arg("b"));

  m.def(
      "discretize",
      [](const SpatialMesh& mesh, int N, double T, double lambda, double alpha, double c, const py::object& y0,
         const py::object& y_omega, const py::object& y_q, std::optional<std::vector<double>> taus) {
        const ProblemSpec ps = make_spec(mesh.dim(), T, lambda, alpha, c, y0, y_omega, y_q);
        return discretize(validate(ps), discretization_for(mesh), build_time_grid(T, N, std::move(taus)));
      },
      py::arg("mesh"), py::arg("N"), py::arg("T") = 1.0, py::arg("lambda_") = 1.0, py::arg("alpha") = 1.0,
      py::arg("c") = 0.0, py::arg("y0") = py::none(), py::arg("y_omega") = py::none(),
      py::arg("y_q") = py::none(), py::arg("taus") = py::none(),
      "Validated, discretized problem. Targets: y_omega (end time, default 0) or y_q (tracking).");

  py::class_<ControlSolution>(m, "ControlSolution")
      .def_property_readonly("u", [](const ControlSolution& s) { return s.u.values(); })
      .def_property_readonly("y", [](const ControlSolution& s) { return s.y.values(); })
      .def_property_readonly("p", [](const ControlSolution& s) { return s.p.values(); })
      .def_readonly("objective", &ControlSolution::objective)
      .def_readonly("report", &ControlSolution::report)
      .def_property_readonly("residuals", [](const ControlSolution& s) { return kkt_dict(s.residuals); });

  m.def("solve_reduced", py::overload_cast<const DiscreteProblem&, double, int>(&solve_reduced),
        py::arg("problem"), py::arg("tol") = 1e-10, py::arg("max_iters") = 1000);
  m.def(
      "solve_all_at_once",
      [](const DiscreteProblem& dp, const std::string& w_mode, const std::string& variant, double tol,
         int max_iters) {
        const WMode w = w_mode == "exact" ? WMode::ExactW : WMode::ApproxW;
        const SaddleVariant v = variant == "disc" ? SaddleVariant::Disc : SaddleVariant::Sym;
        return solve_all_at_once(dp, w, v, tol, max_iters).solution;
      },
      py::arg("problem"), py::arg("w_mode") = "approx", py::arg("variant") = "sym", py::arg("tol") = 1e-8,
      py::arg("max_iters") = 1000);

  m.def(
      "max_eig_reduced", [](const DiscreteProblem& dp, double tol) { return max_eig_reduced(make_reduced_operator(dp), tol); },
      py::arg("problem"), py::arg("tol") = 1e-12);
  m.def(
      "reduced_spectrum",
      [](const DiscreteProblem& dp, int limit) { return dense_reduced_spectrum(make_reduced_operator(dp), limit).eigenvalues; },
      py::arg("problem"), py::arg("dense_limit") = kDenseLimit);
  m.def(
      "saddle_spectrum",
      [](const DiscreteProblem& dp, const std::string& variant) {
        const SaddleSystem sys(dp.system, dp.lambda(), variant == "disc" ? SaddleVariant::Disc : SaddleVariant::Sym);
        const SaddlePreconditioner P(sys, WMode::ExactW);
        return precond_saddle_spectrum(sys, P).eigenvalues;
      },
      py::arg("problem"), py::arg("variant") = "sym");
  m.def("gamma_bound", &gamma_bound, py::arg("c0"), py::arg("T"), py::arg("tau_max") = py::none());

  m.def("_parse_config", [](const std::string& text) { return parse_config_text(text).resolved.dump(); },
        py::arg("text"));
  m.def(
      "_run_experiment",
      [](const std::string& text) {
        const ExperimentConfig cfg = parse_config_text(text);
        std::vector<RunRecord> recs;
        {
          py::gil_scoped_release release;
          recs = run_experiment(cfg);
        }
        std::ostringstream out;
        emit_report(recs, ReportFormat::Json, out);
        return out.str();
      },
      py::arg("text"));
  m.def(
      "_verify",
      [](const std::string& text, bool include_saddle) {
        Json arr = Json::array();
        for (const auto& c : verify_claims(parse_config_text(text), include_saddle)) arr.push_back(to_json(c));
        return arr.dump();
      },
      py::arg("text"), py::arg("include_saddle") = true);
  m.def("_presets", [] {
    Json out = Json::object();
    for (const auto& p : presets()) out[p.name] = {{"description", p.description}, {"config", p.config}};
    return out.dump();
  });
}
