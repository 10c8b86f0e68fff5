#include "mems/fem.hpp"
#include "mems/geometry.hpp"
#include "mems/mesh.hpp"
#include "mems/metric.hpp"
#include "mems/profiles.hpp"
#include "mems/radau.hpp"
#include "mems/simulation.hpp"
#include "mems/skeleton.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mems;

namespace {

Eigen::MatrixXd vertex_array(const TriMesh& m) {
  Eigen::MatrixXd v(m.num_vertices(), 2);
  for (int i = 0; i < m.num_vertices(); ++i) v.row(i) = m.vertex(i).transpose();
  return v;
}

Eigen::MatrixXi triangle_array(const TriMesh& m) {
  Eigen::MatrixXi t(m.num_triangles(), 3);
  for (int k = 0; k < m.num_triangles(); ++k)
    for (int j = 0; j < 3; ++j) t(k, j) = m.triangle(k)[j];
  return t;
}

py::list troughs(const std::vector<Trough>& ts) {
  py::list out;
  for (const auto& t : ts) out.append(py::make_tuple(t.point.x(), t.point.y(), t.value));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moving-mesh touchdown simulator and skeleton predictor";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ResolutionError>(m, "ResolutionError", PyExc_ValueError);
  py::register_exception<NoArrival>(m, "NoArrival");
  py::register_exception<EmptyResult>(m, "EmptyResult");
  py::register_exception<SolveError>(m, "SolveError");

  py::class_<Domain>(m, "Domain")
      .def_static("preset", &Domain::preset, py::arg("name"))
      .def_static("preset_names", &Domain::preset_names)
      .def_static("rectangle", &Domain::rectangle)
      .def_static("disk", [](double cx, double cy, double r) { return Domain::disk({cx, cy}, r); },
                  py::arg("cx"), py::arg("cy"), py::arg("radius"))
      .def_static("load", &Domain::load)
      .def("area", &Domain::area)
      .def("boundary_distance", [](const Domain& d, double x, double y) { return d.boundary_distance({x, y}); })
      .def("contains", [](const Domain& d, double x, double y) { return d.contains({x, y}); });

  py::class_<TriMesh>(m, "TriMesh")
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("triangles", &triangle_array)
      .def_property_readonly("num_interior", &TriMesh::num_interior)
      .def("__len__", &TriMesh::num_triangles)
      .def("min_signed_area", &TriMesh::min_signed_area)
      .def("write_vtk", [](const TriMesh& mesh, const std::string& path) { write_vtk(path, mesh); });

  m.def("generate_mesh", [](const Domain& d, int n) { return generate_initial_mesh(d, n); }, py::arg("domain"),
        py::arg("n") = 6240);

  py::class_<ProfileConstants>(m, "ProfileConstants")
      .def_readonly("z0", &ProfileConstants::z0)
      .def_readonly("w0_at_z0", &ProfileConstants::w0_at_z0)
      .def_readonly("w1bar_at_z0", &ProfileConstants::w1bar_at_z0)
      .def_readonly("alpha", &ProfileConstants::alpha)
      .def_readonly("wkb_rate", &ProfileConstants::wkb_rate);
  m.def("profile_constants", [](double L, int n) { return solve_profiles(L, n).constants; }, py::arg("L") = 30.0,
        py::arg("n") = 6000);
  m.def("phi", &phi, py::arg("t"), py::arg("eps"));
  m.def("quench_time_0d", &zero_d_quench_time, py::arg("u_stop") = 1e-3, py::arg("rtol") = 1e-10,
        py::arg("atol") = 1e-12);

  m.def(
      "metric_normalization",
      [](const TriMesh& mesh, const Eigen::VectorXd& u) {
        const MetricField f = metric_tensor(mesh, u);
        return py::make_tuple(f.sigma, f.alpha, f.fallback);
      },
      py::arg("mesh"), py::arg("u"), "sum |K| sqrt(det M_K), alpha and the flat-solution flag");

  py::class_<SkeletonSet>(m, "Skeleton")
      .def_property_readonly("branches",
                             [](const SkeletonSet& s) {
                               std::vector<Eigen::MatrixXd> out;
                               for (const auto& b : s.branches) {
                                 Eigen::MatrixXd a(b.points.size(), 3);
                                 for (size_t k = 0; k < b.points.size(); ++k)
                                   a.row(k) << b.points[k].x(), b.points[k].y(), b.distance[k];
                                 out.push_back(a);
                               }
                               return out;
                             })
      .def_readonly("meets_boundary", &SkeletonSet::meets_boundary)
      .def("min_distance", &SkeletonSet::min_distance)
      .def("max_distance", &SkeletonSet::max_distance)
      .def("distance_to", [](const SkeletonSet& s, double x, double y) { return distance_to_skeleton(s, {x, y}); });
  m.def("compute_skeleton", [](const Domain& d, double h) { return compute_skeleton(d, h); }, py::arg("domain"),
        py::arg("grid_h") = 0.01);
  m.def("arrival_time", &arrival_time, py::arg("skeleton"), py::arg("eps"), py::arg("z0"));
  m.def(
      "firefront",
      [](const Domain& d, double dist, double h) {
        std::vector<Eigen::MatrixXd> out;
        for (const auto& line : firefront(d, dist, h)) {
          Eigen::MatrixXd a(line.size(), 2);
          for (size_t k = 0; k < line.size(); ++k) a.row(k) = line[k].transpose();
          out.push_back(a);
        }
        return out;
      },
      py::arg("domain"), py::arg("dist"), py::arg("grid_h") = 0.01);
  m.def(
      "predict_touchdown",
      [](const Domain& d, double eps, double grid_h, double t_estimate) {
        PredictOptions po;
        po.grid_h = grid_h;
        po.t_estimate = t_estimate;
        const TouchdownPrediction p = predict_touchdown(d, eps, solve_profiles().constants, po);
        py::list pts;
        for (const auto& c : p.points)
          pts.append(py::dict(py::arg("x") = c.point.x(), py::arg("y") = c.point.y(), py::arg("distance") = c.distance,
                              py::arg("contributors") = c.contributors, py::arg("score") = c.score));
        return py::dict(py::arg("regime") = p.regime == Regime::OnSkeleton ? "on-skeleton" : "pre-skeleton",
                        py::arg("t_s") = p.t_s, py::arg("target_distance") = p.target_distance,
                        py::arg("ring") = p.ring, py::arg("points") = pts);
      },
      py::arg("domain"), py::arg("eps"), py::arg("grid_h") = 0.01, py::arg("t_estimate") = kQuenchTime);

  m.def(
      "simulate",
      [](const Domain& d, double eps, int n, double tau, double rtol, double atol, double t_max, bool adapt) {
        SimulationConfig c;
        c.eps = eps;
        c.target_N = n;
        c.tau = tau;
        c.rtol = rtol;
        c.atol = atol;
        c.t_max = t_max;
        c.adapt = adapt;
        TouchdownReport r;
        {
          py::gil_scoped_release release;
          r = run_simulation(d, c);
        }
        Eigen::MatrixXd hist(r.history.size(), 4);
        for (size_t k = 0; k < r.history.size(); ++k)
          hist.row(k) << r.history[k].t, r.history[k].dt, r.history[k].min_u, r.history[k].min_area;
        return py::dict(py::arg("eps") = r.eps, py::arg("N") = r.N, py::arg("touched") = r.touched,
                        py::arg("t_touch") = r.t_touch, py::arg("t_final") = r.t_final, py::arg("min_u") = r.min_u,
                        py::arg("points") = troughs(r.points), py::arg("troughs") = troughs(r.troughs),
                        py::arg("steps") = r.steps, py::arg("min_area") = r.min_area, py::arg("mesh") = r.mesh,
                        py::arg("u") = r.u, py::arg("history") = hist);
      },
      py::arg("domain"), py::arg("eps"), py::arg("n") = 6240, py::arg("tau") = 0.01, py::arg("rtol") = 1e-6,
      py::arg("atol") = 1e-8, py::arg("t_max") = 1.0, py::arg("adapt") = true,
      "Runs until min u reaches -0.99 (or t_max); history columns are t, dt, min_u, min_area.");
}
