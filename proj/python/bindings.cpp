#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "gcsf/analysis.hpp"
#include "gcsf/error.hpp"
#include "gcsf/flow.hpp"
#include "gcsf/geometry.hpp"
#include "gcsf/grid.hpp"
#include "gcsf/io.hpp"
#include "gcsf/pipeline.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

gcsf::Field to_field(const Array& a) {
    if (a.ndim() != 1) throw gcsf::Error(gcsf::ErrorKind::InvalidArgument, "expected a 1-D array");
    const auto n = static_cast<std::size_t>(a.shape(0));
    return gcsf::Field(gcsf::PeriodicGrid(n), std::vector<double>(a.data(), a.data() + n));
}

Array to_array(const gcsf::Field& f) {
    Array out(static_cast<py::ssize_t>(f.size()));
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

Array stack(const std::vector<gcsf::Field>& fields) {
    const std::size_t rows = fields.size();
    const std::size_t cols = rows ? fields.front().size() : 0;
    Array out({rows, cols});
    double* dst = out.mutable_data();
    for (const auto& f : fields) dst = std::copy(f.values().begin(), f.values().end(), dst);
    return out;
}

std::vector<gcsf::Field> unstack(const Array& a) {
    if (a.ndim() != 2) throw gcsf::Error(gcsf::ErrorKind::InvalidArgument, "expected a 2-D array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    const gcsf::PeriodicGrid grid(cols);
    std::vector<gcsf::Field> out;
    for (std::size_t r = 0; r < rows; ++r) {
        out.emplace_back(grid, std::vector<double>(a.data() + r * cols, a.data() + (r + 1) * cols));
    }
    return out;
}

gcsf::DiffMethod diff_method(const std::string& name) {
    if (name == "spectral") return gcsf::DiffMethod::Spectral;
    if (name == "fd4") return gcsf::DiffMethod::FiniteDifference4;
    throw gcsf::Error(gcsf::ErrorKind::InvalidArgument, "method must be 'spectral' or 'fd4'");
}

gcsf::RunConfig run_config(const py::kwargs& settings) {
    gcsf::RunConfig cfg;
    for (const auto& [key, value] : settings) gcsf::apply_setting(cfg, py::str(key), py::str(value));
    return cfg;
}

py::dict verdict_dict(const gcsf::Verdict& v) {
    return py::dict("claim_id"_a = v.claim_id, "statement"_a = v.statement,
                    "measured"_a = v.measured, "required"_a = v.required, "pass"_a = v.pass,
                    "below_floor"_a = v.below_floor);
}

py::dict geometry_dict(const gcsf::CurveGeometry& g) {
    Array pts({g.points.size(), std::size_t{2}});
    double* d = pts.mutable_data();
    for (const auto& p : g.points) {
        *d++ = p.x;
        *d++ = p.y;
    }
    return py::dict("support"_a = to_array(g.support), "points"_a = pts, "area"_a = g.area,
                    "length"_a = g.length, "r_in"_a = g.r_in, "r_out"_a = g.r_out,
                    "closure_residual"_a = g.closure_residual,
                    "isoperimetric_ratio"_a = g.isoperimetric_ratio());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Curvature flow simulation and blow-up diagnostics";

    // Carries the error kind name on `.kind`.
    static py::handle error_type =
        PyErr_NewException("gcsf._core.GcsfError", PyExc_RuntimeError, nullptr);
    m.attr("GcsfError") = error_type;
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const gcsf::Error& e) {
            py::object exc = error_type(e.what());
            exc.attr("kind") = std::string(e.name());
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.attr("SCHEMA_VERSION") = gcsf::io::kSchemaVersion;

    // grid
    m.def("derivative",
          [](const Array& f, int order, const std::string& method) {
              return to_array(gcsf::derivative(to_field(f), order, diff_method(method)));
          },
          "f"_a, "order"_a = 1, "method"_a = "spectral",
          "d^order f/dtheta^order of samples on the uniform periodic grid.");
    m.def("integrate", [](const Array& f) { return gcsf::integrate(to_field(f)); }, "f"_a);
    m.def("lq_norm",
          [](const Array& f, int l, double q) { return gcsf::lq_norm(to_field(f), l, q); },
          "f"_a, "l"_a, "q"_a, "q = inf gives the sup norm of the l-th derivative.");

    // geometry
    m.def("closure_residual", [](const Array& k) {
        return gcsf::closure_residual(gcsf::CurvatureProfile(to_field(k)));
    }, "k"_a);
    m.def("solve_support",
          [](const Array& k, double tol) {
              return to_array(gcsf::solve_support(gcsf::CurvatureProfile(to_field(k)), tol));
          },
          "k"_a, "tol_closure"_a = gcsf::kDefaultClosureTolerance);
    m.def("compute_geometry",
          [](const Array& k, double tol) {
              return geometry_dict(gcsf::compute_geometry(gcsf::CurvatureProfile(to_field(k)), tol));
          },
          "k"_a, "tol_closure"_a = gcsf::kDefaultClosureTolerance);
    m.def("normalized_deviation",
          [](const Array& h, double area) { return gcsf::normalized_deviation(to_field(h), area); },
          "h"_a, "area"_a);

    // flow
    m.def("initial_profile",
          [](const std::string& shape, std::size_t n) {
              return to_array(gcsf::initial_profile(gcsf::parse_shape(shape), gcsf::PeriodicGrid(n)).field());
          },
          "shape"_a, "n"_a = 256, "Curvature of 'circle:r=..', 'ellipse:a=..,b=..' or 'support:c0=..;a2=..'.");
    m.def("rhs_physical",
          [](const Array& k, double p) {
              return to_array(gcsf::rhs_physical(to_field(k), gcsf::GModel::power_law(p)));
          },
          "k"_a, "p"_a);
    m.def("rhs_rescaled",
          [](const Array& kt, double p) { return to_array(gcsf::rhs_rescaled(to_field(kt), p)); },
          "kt"_a, "p"_a);
    m.def("stable_dt",
          [](const Array& k, double p, double sigma) {
              auto f = to_field(k);
              return gcsf::stable_dt(f, gcsf::GModel::power_law(p), f.grid().spacing(), sigma);
          },
          "k"_a, "p"_a, "sigma"_a = 0.2);
    m.def("run_physical",
          [](const Array& k0, double p, double k_stop, double sigma, std::size_t snapshot_stride) {
              gcsf::FlowConfig cfg;
              cfg.g = gcsf::GModel::power_law(p);
              const auto field = to_field(k0);
              cfg.n = field.size();
              cfg.k_stop = k_stop;
              cfg.sigma = sigma;
              cfg.snapshot_stride = snapshot_stride;
              gcsf::Trajectory traj;
              {
                  py::gil_scoped_release release;
                  traj = gcsf::run_physical(gcsf::CurvatureProfile(field), cfg);
              }
              std::vector<gcsf::Field> profiles;
              for (const auto& k : traj.profiles) profiles.push_back(k.field());
              py::dict out("times"_a = traj.times, "profiles"_a = stack(profiles),
                           "closure"_a = traj.closure, "total_steps"_a = traj.total_steps,
                           "stop_reason"_a = std::string(gcsf::to_string(traj.stop_reason)));
              py::gil_scoped_release release;
              const auto fit = gcsf::estimate_omega(traj);
              py::gil_scoped_acquire acquire;
              out["omega_hat"] = fit.omega;
              out["omega_fit_residual"] = fit.residual;
              out["omega_area"] = fit.omega_area ? py::cast(*fit.omega_area) : py::none();
              return out;
          },
          "k0"_a, "p"_a = 1.0, "k_stop"_a = 0.0, "sigma"_a = 0.2, "snapshot_stride"_a = 0,
          "Integrates to k_max >= k_stop (default 50 x initial) and fits the blow-up time.");
    m.def("rescale",
          [](const std::vector<double>& times, const Array& profiles, double omega, double p) {
              std::vector<gcsf::Field> taus_profiles;
              std::vector<double> taus;
              for (const auto& f : unstack(profiles)) taus_profiles.push_back(f);
              if (times.size() != taus_profiles.size()) {
                  throw gcsf::Error(gcsf::ErrorKind::InvalidArgument, "times and profiles disagree");
              }
              for (std::size_t j = 0; j < times.size(); ++j) {
                  taus.push_back(gcsf::rescaled_time(times[j], omega, p));
                  taus_profiles[j] = gcsf::rescale_profile(taus_profiles[j], times[j], omega, p);
              }
              return py::make_tuple(taus, stack(taus_profiles));
          },
          "times"_a, "profiles"_a, "omega"_a, "p"_a);
    m.def("run_rescaled",
          [](const Array& kt0, double p, double tau_end, std::vector<double> output_taus) {
              gcsf::RescaledConfig cfg;
              cfg.output_taus = std::move(output_taus);
              const auto field = to_field(kt0);
              py::gil_scoped_release release;
              auto rt = gcsf::run_rescaled(field, p, tau_end, cfg);
              py::gil_scoped_acquire acquire;
              return py::make_tuple(rt.taus, stack(rt.profiles));
          },
          "kt0"_a, "p"_a, "tau_end"_a, "output_taus"_a = std::vector<double>{});

    // analysis
    m.def("fit_decay_rate",
          [](const std::vector<double>& t, const std::vector<double>& v, double window, double floor) {
              const auto fit = gcsf::fit_decay_rate(t, v, window, floor);
              return py::dict("slope"_a = fit.slope, "C"_a = fit.C, "residual"_a = fit.residual,
                              "points"_a = fit.points, "window_begin"_a = fit.window_begin,
                              "window_end"_a = fit.window_end, "below_floor"_a = fit.below_floor);
          },
          "times"_a, "values"_a, "window_fraction"_a = 0.5, "floor"_a = gcsf::kBelowFloor);
    m.def("gage_hamilton_ratio",
          [](const Array& kt) { return gcsf::gage_hamilton_ratio(to_field(kt)); }, "kt"_a);
    m.def("blowup_functional",
          [](double k, double p) { return gcsf::blowup_functional(k, gcsf::GModel::power_law(p)); },
          "k"_a, "p"_a);
    m.def("inequality_suite",
          [](std::uint64_t seed, std::size_t count) {
              const auto r = gcsf::inequality_suite(seed, count);
              return py::dict("seed"_a = r.seed, "count"_a = r.count, "violations"_a = r.violations,
                              "worst_young"_a = r.worst_young, "worst_wirtinger"_a = r.worst_wirtinger,
                              "worst_sobolev"_a = r.worst_sobolev,
                              "wirtinger_equality_gap"_a = r.wirtinger_equality_gap);
          },
          "seed"_a = 42, "count"_a = 1000);

    // pipeline
    m.def("verify",
          [](const py::kwargs& settings) {
              auto cfg = run_config(settings);
              cfg.validate();
              gcsf::VerificationResult res;
              {
                  py::gil_scoped_release release;
                  res = gcsf::verify(cfg);
              }
              py::list verdicts;
              for (const auto& v : res.verdicts) verdicts.append(verdict_dict(v));
              return py::dict("omega_hat"_a = res.simulation.omega.omega, "verdicts"_a = verdicts,
                              "all_pass"_a = res.all_pass());
          },
          "Runs the full verdict battery in memory. Keyword arguments are run settings "
          "(p, shape, n, sigma, k_stop_factor, l_max, alpha, slope_tol, ...).");
    m.def("run_command",
          [](const std::string& command, const py::kwargs& settings) {
              const auto cfg = run_config(settings);
              py::gil_scoped_release release;
              if (command == "simulate") return gcsf::cmd_simulate(cfg);
              if (command == "verify") return gcsf::cmd_verify(cfg);
              if (command == "inequalities") return gcsf::cmd_inequalities(cfg);
              throw gcsf::Error(gcsf::ErrorKind::ConfigError, "unknown command '" + command + "'");
          },
          "command"_a,
          "Runs simulate, verify or inequalities like the CLI and returns its exit code.");
}
