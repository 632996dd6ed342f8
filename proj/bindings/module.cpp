// Python bindings for the core operations: scenario IO, the smooth
// visibility objective and its gradient, gradient-ascent optimization,
// the candidate grid / visibility matrix / discrete solvers, and the
// integer evaluation report.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <string>
#include <vector>

#include "visopt/diffvis.hpp"
#include "visopt/errors.hpp"
#include "visopt/eval.hpp"
#include "visopt/framegen.hpp"
#include "visopt/gdopt.hpp"
#include "visopt/io.hpp"
#include "visopt/ipopt.hpp"
#include "visopt/scene.hpp"

namespace py = pybind11;
using namespace visopt;

namespace {

Intrinsics make_intr(int width, int height) {
  Intrinsics intr;
  intr.width = width;
  intr.height = height;
  return intr;
}

DiffParams make_params(double gamma, double kappa) {
  DiffParams p;
  p.gamma = gamma;
  p.kappa = kappa;
  return p;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

py::array_t<std::uint32_t> matrix_counts(const VisibilityMatrix& vm) {
  py::array_t<std::uint32_t> arr({vm.rows, vm.cols});
  std::copy(vm.counts.begin(), vm.counts.end(), arr.mutable_data());
  return arr;
}

VisibilityMatrix matrix_from_counts(
    py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>
        arr) {
  if (arr.ndim() != 2) throw py::value_error("counts must be 2-D");
  VisibilityMatrix vm;
  vm.rows = std::size_t(arr.shape(0));
  vm.cols = std::size_t(arr.shape(1));
  vm.counts.assign(arr.data(), arr.data() + arr.size());
  for (std::size_t j = 0; j < vm.cols; ++j)
    vm.columns.emplace_back(0, std::int32_t(j));
  return vm;
}

py::dict run_result_to_dict(const RunResult& r) {
  py::dict d;
  d["best_min_visibility"] = r.best_min_visibility;
  d["seed"] = r.seed;
  d["trace"] = r.trace;
  d["rail_assignment"] = r.rail_assignment;
  d["poses"] = r.best_poses;
  return d;
}

py::dict eval_to_dict(const EvalReport& rep) {
  py::dict d;
  d["min_visibility"] = rep.min_visibility;
  d["mean_visibility"] = rep.mean_visibility;
  d["counts"] = rep.counts;
  d["columns"] = rep.columns;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sensor-pose visibility optimization core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError",
                                            PyExc_ValueError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);

  py::class_<RailPose>(m, "RailPose",
                       "Unbounded sensor parameters on a virtual rail")
      .def(py::init<>())
      .def(py::init([](std::int32_t rail, double t, double alpha,
                       double beta) {
             return RailPose{rail, t, alpha, beta};
           }),
           py::arg("rail"), py::arg("t") = 0.0, py::arg("alpha") = 0.0,
           py::arg("beta") = 0.0)
      .def_readwrite("rail", &RailPose::rail_index)
      .def_readwrite("t", &RailPose::t)
      .def_readwrite("alpha", &RailPose::alpha)
      .def_readwrite("beta", &RailPose::beta)
      .def("__repr__", [](const RailPose& p) {
        return "RailPose(rail=" + std::to_string(p.rail_index) +
               ", t=" + std::to_string(p.t) +
               ", alpha=" + std::to_string(p.alpha) +
               ", beta=" + std::to_string(p.beta) + ")";
      });

  py::class_<CanonicalPose>(m, "CanonicalPose",
                            "Absolute sensor pose: position, yaw, pitch")
      .def(py::init<>())
      .def(py::init([](const Vec3& position, double yaw, double pitch) {
             return CanonicalPose{position, yaw, pitch};
           }),
           py::arg("position"), py::arg("yaw"), py::arg("pitch"))
      .def_readonly("position", &CanonicalPose::position)
      .def_readonly("yaw", &CanonicalPose::yaw)
      .def_readonly("pitch", &CanonicalPose::pitch)
      .def("__repr__", [](const CanonicalPose& p) {
        return "CanonicalPose(position=(" + std::to_string(p.position.x()) +
               ", " + std::to_string(p.position.y()) + ", " +
               std::to_string(p.position.z()) +
               "), yaw=" + std::to_string(p.yaw) +
               ", pitch=" + std::to_string(p.pitch) + ")";
      });

  py::class_<Scenario>(m, "Scenario",
                       "Environment, virtual rails, and target frames")
      .def_property_readonly(
          "frame_count", [](const Scenario& s) { return s.frames.size(); })
      .def_property_readonly(
          "rail_count", [](const Scenario& s) { return s.rails.size(); })
      .def_property_readonly("object_count",
                             [](const Scenario& s) {
                               std::size_t n = 0;
                               for (const Frame& f : s.frames)
                                 n += f.objects.size();
                               return n;
                             })
      .def_property_readonly(
          "focus", [](const Scenario& s) { return s.focus_point; })
      .def_property_readonly(
          "hash_hex",
          [](const Scenario& s) { return hash_hex(io::scenario_hash(s)); })
      .def("frame_object_ids",
           [](const Scenario& s, std::size_t i) {
             if (i >= s.frames.size())
               throw py::index_error("frame index out of range");
             std::vector<std::int32_t> ids;
             for (const ObjectBox& o : s.frames[i].objects)
               ids.push_back(o.id);
             return ids;
           },
           py::arg("frame"));

  m.def("load_scenario", &io::load_scenario, py::arg("path"));
  m.def("save_scenario", &io::save_scenario, py::arg("scenario"),
        py::arg("path"));
  m.def(
      "generate_scenario",
      [](const std::string& spec_path, std::uint64_t seed) {
        const io::GeneratorSpec spec = io::load_generator_spec(spec_path);
        Scenario sc;
        sc.environment = spec.environment;
        sc.rails = spec.rails;
        if (spec.has_focus) sc.focus_point = spec.focus_point;
        sc.frames = generate_frames(spec.generator, seed);
        return sc;
      },
      py::arg("spec_path"), py::arg("seed") = 0,
      "Random traffic frames from a generator-spec file");

  m.def(
      "objective",
      [](const Scenario& sc, const std::vector<RailPose>& sensors, int F,
         double gamma, double kappa, std::uint64_t seed, int width, int height,
         int threads) {
        return objective(sc.frames, sensors, sc, F, make_params(gamma, kappa),
                         seed, make_intr(width, height), threads)
            .first;
      },
      py::arg("scenario"), py::arg("sensors"), py::arg("points") = 400,
      py::arg("gamma") = 1.0, py::arg("kappa") = 0.5, py::arg("seed") = 0,
      py::arg("width") = 200, py::arg("height") = 200, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>(),
      "Smooth multi-sensor visibility objective in [0, 1]");

  m.def(
      "gradient",
      [](const Scenario& sc, const std::vector<RailPose>& sensors, int F,
         double gamma, double kappa, std::uint64_t seed, int width, int height,
         int threads) {
        return gradient(sc.frames, sensors, sc, F, make_params(gamma, kappa),
                        seed, make_intr(width, height), threads)
            .d_pose;
      },
      py::arg("scenario"), py::arg("sensors"), py::arg("points") = 400,
      py::arg("gamma") = 1.0, py::arg("kappa") = 0.5, py::arg("seed") = 0,
      py::arg("width") = 200, py::arg("height") = 200, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>(),
      "d objective / d (t, alpha, beta) per sensor");

  m.def(
      "optimize",
      [](const Scenario& sc, int sensors, int runs, int epochs, int points,
         double lr, double gamma, double kappa, std::uint64_t seed,
         int width, int height, int threads, bool focus_init) {
        GdHyper hyper;
        hyper.points_per_object = points;
        hyper.lr = lr;
        hyper.diff = make_params(gamma, kappa);
        hyper.intr = make_intr(width, height);
        hyper.threads = threads;
        hyper.use_focus_init = focus_init;
        const RunResult r =
            optimize_multirun(sc, sensors, runs, epochs, hyper, seed);
        py::gil_scoped_acquire gil;
        return run_result_to_dict(r);
      },
      py::arg("scenario"), py::arg("sensors"), py::arg("runs") = 10,
      py::arg("epochs") = 20, py::arg("points") = 400, py::arg("lr") = 0.1,
      py::arg("gamma") = 1.0, py::arg("kappa") = 0.5, py::arg("seed") = 0,
      py::arg("width") = 200, py::arg("height") = 200, py::arg("threads") = 1,
      py::arg("focus_init") = true,
      py::call_guard<py::gil_scoped_release>(),
      "Multi-run gradient ascent; returns the best run as a dict");

  py::class_<CandidateGrid>(m, "CandidateGrid",
                            "Discrete pose grid over the virtual rails")
      .def("__len__",
           [](const CandidateGrid& g) { return g.candidates.size(); })
      .def_readonly("positions", &CandidateGrid::positions)
      .def_readonly("yaws", &CandidateGrid::yaws)
      .def_readonly("pitches", &CandidateGrid::pitches)
      .def_readonly("rail_count", &CandidateGrid::rail_count)
      .def("pose",
           [](const CandidateGrid& g, std::size_t i) {
             if (i >= g.candidates.size())
               throw py::index_error("candidate index out of range");
             return g.candidates[i].pose;
           },
           py::arg("index"))
      .def("candidate",
           [](const CandidateGrid& g, std::size_t i) {
             if (i >= g.candidates.size())
               throw py::index_error("candidate index out of range");
             const Candidate& c = g.candidates[i];
             py::dict d;
             d["rail"] = c.rail_index;
             d["fraction"] = c.fraction;
             d["yaw_index"] = c.yaw_index;
             d["pitch_index"] = c.pitch_index;
             d["pose"] = c.pose;
             return d;
           },
           py::arg("index"));

  m.def(
      "build_candidates",
      [](const Scenario& sc, int positions, int yaws, int pitches) {
        return build_candidates(sc.rails, positions, yaws, pitches);
      },
      py::arg("scenario"), py::arg("positions") = 10, py::arg("yaws") = 10,
      py::arg("pitches") = 3);

  py::class_<VisibilityMatrix>(
      m, "VisibilityMatrix",
      "Integer visibility of every (candidate, object-in-frame) pair")
      .def_readonly("rows", &VisibilityMatrix::rows)
      .def_readonly("cols", &VisibilityMatrix::cols)
      .def_property_readonly("counts", &matrix_counts)
      .def_readonly("columns", &VisibilityMatrix::columns)
      .def_static("from_counts", &matrix_from_counts, py::arg("counts"),
                  "Synthetic matrix from a 2-D uint32 array");

  m.def(
      "build_vismatrix",
      [](const CandidateGrid& grid, const Scenario& sc, int width, int height,
         int threads) {
        return build_vismatrix(grid, sc, make_intr(width, height), threads);
      },
      py::arg("grid"), py::arg("scenario"), py::arg("width") = 200,
      py::arg("height") = 200, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());

  py::class_<StopRule>(m, "StopRule",
                       "Sampling-solver stop rule; non-positive seconds "
                       "disable the timer, negative iterations the cap")
      .def(py::init([](double max_seconds, std::int64_t max_iterations) {
             return StopRule{max_seconds, max_iterations};
           }),
           py::arg("max_seconds") = 60.0,
           py::arg("max_iterations") = 100000)
      .def_readwrite("max_seconds", &StopRule::max_seconds)
      .def_readwrite("max_iterations", &StopRule::max_iterations);

  py::class_<IPSolution>(m, "IPSolution", "Chosen candidate rows and score")
      .def_readonly("chosen", &IPSolution::chosen)
      .def_readonly("z", &IPSolution::z)
      .def_readonly("iterations", &IPSolution::iterations)
      .def_readonly("solver", &IPSolution::solver)
      .def("__repr__", [](const IPSolution& s) {
        return "IPSolution(solver=" + s.solver + ", z=" + std::to_string(s.z) +
               ")";
      });

  m.def("solve_exhaustive", &solve_exhaustive, py::arg("matrix"),
        py::arg("sensors"), py::arg("budget") = std::uint64_t(10000000),
        py::call_guard<py::gil_scoped_release>());
  m.def("solve_naive", &solve_naive, py::arg("matrix"), py::arg("sensors"),
        py::arg("stop"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("solve_mcmc", &solve_mcmc, py::arg("matrix"), py::arg("sensors"),
        py::arg("stop"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "evaluate",
      [](const Scenario& sc, const std::vector<RailPose>& rail_poses,
         int width, int height, int threads) {
        io::PoseFile pf;
        pf.rail_poses = rail_poses;
        const std::vector<CanonicalPose> poses = io::resolve_poses(pf, sc);
        const EvalReport rep =
            evaluate(poses, sc, make_intr(width, height), threads);
        py::gil_scoped_acquire gil;
        return eval_to_dict(rep);
      },
      py::arg("scenario"), py::arg("poses"), py::arg("width") = 200,
      py::arg("height") = 200, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>(),
      "Integer per-object visibility of rail poses over a scenario");

  m.def(
      "evaluate_canonical",
      [](const Scenario& sc, const std::vector<CanonicalPose>& poses,
         int width, int height, int threads) {
        const EvalReport rep =
            evaluate(poses, sc, make_intr(width, height), threads);
        py::gil_scoped_acquire gil;
        return eval_to_dict(rep);
      },
      py::arg("scenario"), py::arg("poses"), py::arg("width") = 200,
      py::arg("height") = 200, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>(),
      "Integer per-object visibility of absolute poses over a scenario");
}
