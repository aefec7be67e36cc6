#include "gcsf/flow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gcsf/error.hpp"

namespace gcsf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(std::string_view text, std::string_view context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorKind::ConfigError,
                    "bad number '" + std::string(text) + "' in " + std::string(context));
    }
    return v;
}

std::vector<std::pair<std::string, std::string>> split_params(std::string_view body,
                                                              std::string_view context) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t start = 0;
    while (start <= body.size()) {
        std::size_t end = body.find_first_of(",;", start);
        if (end == std::string_view::npos) end = body.size();
        std::string_view item = body.substr(start, end - start);
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw Error(ErrorKind::ConfigError,
                            "expected key=value in shape '" + std::string(context) + "'");
            }
            out.emplace_back(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        }
        start = end + 1;
    }
    return out;
}

Field ellipse_support(double a, double b, const PeriodicGrid& grid) {
    return Field::sample(grid, [a, b](double th) {
        const double c = std::cos(th), s = std::sin(th);
        return std::sqrt(a * a * c * c + b * b * s * s);
    });
}

void require_positive(const Field& k, std::string_view where) {
    const double m = k.min();
    if (!(m > 0.0)) {
        throw Error(ErrorKind::NonPositiveCurvature,
                    std::string(where) + ": min curvature " + std::to_string(m));
    }
}

Field remove_first_mode(const Field& f) {
    Spectrum s = forward(f);
    s.coeffs[1] = 0.0;
    return inverse(s);
}

}  // namespace

GModel GModel::power_law(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw Error(ErrorKind::InvalidArgument, "power-law exponent must be >= 1");
    }
    GModel g;
    g.p_ = p;
    std::ostringstream os;
    os << "power_law(p=" << p << ")";
    g.name_ = os.str();
    return g;
}

GModel GModel::general(Fn g, Fn dg, std::string name) {
    if (!g || !dg) throw Error(ErrorKind::InvalidArgument, "general G needs G and G'");
    GModel m;
    m.p_ = kNaN;
    m.g_ = std::move(g);
    m.dg_ = std::move(dg);
    m.name_ = std::move(name);
    return m;
}

double GModel::G(double x) const { return g_ ? g_(x) : std::pow(x, p_ - 1.0); }

double GModel::dG(double x) const {
    if (dg_) return dg_(x);
    return p_ == 1.0 ? 0.0 : (p_ - 1.0) * std::pow(x, p_ - 2.0);
}

double GModel::diffusion(double k) const {
    if (!g_) return p_ * std::pow(k, p_ + 1.0);
    return k * k * (dG(k) * k + G(k));
}

HypothesisReport validate_hypotheses(const GModel& g, double lo, double hi, int samples) {
    HypothesisReport r;
    const double llo = std::log(lo), lhi = std::log(hi);
    std::vector<double> xs(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        xs[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (samples - 1));
    }
    auto gx2 = [&g](double x) { return g.G(x) * x * x; };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double gv = g.G(x), dv = g.dG(x);
        if (!(gv > 0.0)) r.positive = false;
        if (dv < 0.0) r.nondecreasing = false;
        if (gv > 0.0) r.growth_constant = std::max(r.growth_constant, dv * x / gv);
        // Convexity via a centred second difference with a relative step.
        const double step = 1e-3 * x;
        const double second = gx2(x + step) - 2.0 * gx2(x) + gx2(x - step);
        if (second < -1e-9 * std::abs(gx2(x))) r.convex_gx2 = false;
    }
    return r;
}

ShapeSpec parse_shape(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw Error(ErrorKind::ConfigError, "shape must look like kind:params, got '" +
                                                std::string(spec) + "'");
    }
    const std::string_view kind = spec.substr(0, colon);
    const auto params = split_params(spec.substr(colon + 1), spec);

    if (kind == "circle") {
        CircleShape c;
        bool have_r = false;
        for (const auto& [key, value] : params) {
            if (key != "r") throw Error(ErrorKind::ConfigError, "unknown circle key '" + key + "'");
            c.r = parse_number(value, spec);
            have_r = true;
        }
        if (!have_r || !(c.r > 0.0)) throw Error(ErrorKind::ConfigError, "circle needs r > 0");
        return c;
    }
    if (kind == "ellipse") {
        EllipseShape e;
        int seen = 0;
        for (const auto& [key, value] : params) {
            if (key == "a") {
                e.a = parse_number(value, spec);
            } else if (key == "b") {
                e.b = parse_number(value, spec);
            } else {
                throw Error(ErrorKind::ConfigError, "unknown ellipse key '" + key + "'");
            }
            ++seen;
        }
        if (seen != 2 || !(e.a > 0.0) || !(e.b > 0.0)) {
            throw Error(ErrorKind::ConfigError, "ellipse needs a > 0 and b > 0");
        }
        return e;
    }
    if (kind == "support") {
        SupportShape s;
        bool have_c0 = false;
        for (const auto& [key, value] : params) {
            const double v = parse_number(value, spec);
            if (key == "c0") {
                s.c0 = v;
                have_c0 = true;
                continue;
            }
            if (key.size() < 2 || (key[0] != 'a' && key[0] != 'b')) {
                throw Error(ErrorKind::ConfigError, "unknown support key '" + key + "'");
            }
            int m = 0;
            auto [ptr, ec] = std::from_chars(key.data() + 1, key.data() + key.size(), m);
            if (ec != std::errc() || ptr != key.data() + key.size() || m < 2) {
                throw Error(ErrorKind::ConfigError,
                            "support modes need m >= 2, got '" + key + "'");
            }
            auto& slot = s.modes[m];
            (key[0] == 'a' ? slot.first : slot.second) = v;
        }
        if (!have_c0) throw Error(ErrorKind::ConfigError, "support shape needs c0");
        return s;
    }
    throw Error(ErrorKind::ConfigError, "unknown shape kind '" + std::string(kind) + "'");
}

std::string format_shape(const ShapeSpec& shape) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CircleShape>) {
                os << "circle:r=" << s.r;
            } else if constexpr (std::is_same_v<T, EllipseShape>) {
                os << "ellipse:a=" << s.a << ",b=" << s.b;
            } else {
                os << "support:c0=" << s.c0;
                for (const auto& [m, ab] : s.modes) {
                    if (ab.first != 0.0) os << ";a" << m << "=" << ab.first;
                    if (ab.second != 0.0) os << ";b" << m << "=" << ab.second;
                }
            }
        },
        shape);
    return os.str();
}

Field support_function(const ShapeSpec& shape, const PeriodicGrid& grid) {
    return std::visit(
        [&grid](const auto& s) -> Field {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CircleShape>) {
                return Field(grid, s.r);
            } else if constexpr (std::is_same_v<T, EllipseShape>) {
                return ellipse_support(s.a, s.b, grid);
            } else {
                return Field::sample(grid, [&s](double th) {
                    double h = s.c0;
                    for (const auto& [m, ab] : s.modes) {
                        h += ab.first * std::cos(m * th) + ab.second * std::sin(m * th);
                    }
                    return h;
                });
            }
        },
        shape);
}

CurvatureProfile initial_profile(const ShapeSpec& shape, const PeriodicGrid& grid) {
    // Radius of curvature h + h'' in closed form for each shape family.
    const Field rho = std::visit(
        [&grid](const auto& s) -> Field {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CircleShape>) {
                return Field(grid, s.r);
            } else if constexpr (std::is_same_v<T, EllipseShape>) {
                const double a2b2 = s.a * s.a * s.b * s.b;
                return ellipse_support(s.a, s.b, grid).map(
                    [a2b2](double h) { return a2b2 / (h * h * h); });
            } else {
                return Field::sample(grid, [&s](double th) {
                    double r = s.c0;
                    for (const auto& [m, ab] : s.modes) {
                        const double w = 1.0 - static_cast<double>(m) * m;
                        r += w * (ab.first * std::cos(m * th) + ab.second * std::sin(m * th));
                    }
                    return r;
                });
            }
        },
        shape);
    if (rho.min() <= 0.0) {
        throw Error(ErrorKind::NotConvex, "h + h'' reaches " + std::to_string(rho.min()));
    }
    return CurvatureProfile(rho.map([](double r) { return 1.0 / r; }));
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::KStop: return "k_stop";
        case StopReason::StepCap: return "step_cap";
        case StopReason::TauEnd: return "tau_end";
    }
    return "unknown";
}

Field rhs_physical(const Field& k, const GModel& g, DiffMethod diff) {
    require_positive(k, "rhs_physical");
    const Field w = k.map([&g](double v) { return g.G(v) * v; });
    Field out = derivative(w, 2, diff);
    out += w;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k[i] * k[i];
    return out;
}

double stable_dt(const Field& k, const GModel& g, double dtheta, double sigma) {
    double dmax = 0.0;
    for (double v : k.values()) dmax = std::max(dmax, g.diffusion(v));
    return sigma * dtheta * dtheta / dmax;
}

namespace {

// One classical RK4 step of du/ds = rhs(u).
template <class Rhs>
Field rk4_step(const Field& u, double dt, Rhs&& rhs) {
    const Field k1 = rhs(u);
    const Field k2 = rhs(u + k1 * (0.5 * dt));
    const Field k3 = rhs(u + k2 * (0.5 * dt));
    const Field k4 = rhs(u + k3 * dt);
    Field next = u;
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return next;
}

std::size_t auto_stride(const GModel& g, double k0, double k_stop, double dtheta, double sigma) {
    // Steps ~ (1/(sigma dtheta^2)) int (1 + G'(k) k / G(k)) d ln k, from D/(G k^3).
    const int pieces = 64;
    const double a = std::log(k0), b = std::log(k_stop);
    double integral = 0.0;
    for (int i = 0; i <= pieces; ++i) {
        const double k = std::exp(a + (b - a) * i / pieces);
        const double w = (i == 0 || i == pieces) ? 0.5 : 1.0;
        integral += w * (1.0 + g.dG(k) * k / g.G(k));
    }
    integral *= (b - a) / pieces;
    const double steps = integral / (sigma * dtheta * dtheta);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(steps / 400.0)));
}

}  // namespace

Trajectory run_physical(const CurvatureProfile& k0, const FlowConfig& cfg) {
    if (k0.grid().size() != cfg.n) {
        throw Error(ErrorKind::InvalidArgument, "initial profile grid does not match config n");
    }
    if (!(cfg.sigma > 0.0 && cfg.sigma <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "sigma must lie in (0, 1]");
    }
    const double k_stop = cfg.k_stop > 0.0 ? cfg.k_stop : 50.0 * k0.max();
    if (!(k_stop > k0.max())) {
        throw Error(ErrorKind::InvalidArgument, "k_stop must exceed the initial max curvature");
    }
    const double dtheta = k0.grid().spacing();
    const std::size_t stride = cfg.snapshot_stride > 0
                                   ? cfg.snapshot_stride
                                   : auto_stride(cfg.g, k0.max(), k_stop, dtheta, cfg.sigma);
    const double drift_limit = cfg.closure_drift_factor * cfg.tol_closure;

    Trajectory traj;
    traj.g = cfg.g;

    auto record = [&](const Field& k, double t, std::size_t step) {
        const CurvatureProfile profile(k);
        const double residual = closure_residual(profile);
        if (residual > drift_limit) {
            throw Error(ErrorKind::ClosureDrift, "closure residual " + std::to_string(residual) +
                                                     " at t = " + std::to_string(t));
        }
        const double tail = spectral_tail_fraction(k);
        if (tail > cfg.tail_threshold) {
            throw Error(ErrorKind::ResolutionLoss, "spectral tail fraction " +
                                                       std::to_string(tail) +
                                                       " at t = " + std::to_string(t));
        }
        traj.times.push_back(t);
        traj.profiles.push_back(profile);
        traj.steps.push_back(step);
        traj.closure.push_back(residual);
        traj.tail.push_back(tail);
    };

    auto rhs = [&cfg](const Field& k) { return rhs_physical(k, cfg.g, cfg.diff); };

    Field k = k0.field();
    double t = 0.0;
    std::size_t step = 0;
    record(k, t, step);
    traj.stop_reason = StopReason::StepCap;
    while (step < cfg.max_steps) {
        const double dt = stable_dt(k, cfg.g, dtheta, cfg.sigma);
        k = rk4_step(k, dt, rhs);
        t += dt;
        ++step;
        require_positive(k, "run_physical");
        if (!k.all_finite()) throw Error(ErrorKind::ResolutionLoss, "non-finite curvature");
        const bool done = k.max() >= k_stop;
        if (done || step % stride == 0) {
            if (cfg.project_closure) {
                k = remove_first_mode(k.map([](double v) { return 1.0 / v; }))
                        .map([](double v) { return 1.0 / v; });
            }
            record(k, t, step);
        }
        if (done) {
            traj.stop_reason = StopReason::KStop;
            break;
        }
    }
    if (traj.stop_reason == StopReason::StepCap && traj.steps.back() != step) record(k, t, step);
    traj.total_steps = step;
    return traj;
}

OmegaFit estimate_omega(const Trajectory& traj, const OmegaFitOptions& opts) {
    if (!traj.g.is_power_law()) {
        throw Error(ErrorKind::InvalidArgument, "blow-up time fit requires a power-law G");
    }
    const std::size_t n = traj.size();
    if (n < opts.min_points) {
        throw Error(ErrorKind::PoorFit, "too few snapshots for a blow-up time fit");
    }
    const double growth = traj.profiles.back().max() / traj.profiles.front().max();
    if (growth < opts.min_growth) {
        throw Error(ErrorKind::PoorFit, "trajectory has not approached blow-up (k_max grew by " +
                                            std::to_string(growth) + ")");
    }
    const double p = traj.p();
    std::size_t count = static_cast<std::size_t>(std::ceil(opts.window_fraction * n));
    count = std::clamp(count, opts.min_points, n);
    const std::size_t begin = n - count;

    std::vector<double> ts(count), ys(count);
    for (std::size_t j = 0; j < count; ++j) {
        ts[j] = traj.times[begin + j];
        const Field& k = traj.profiles[begin + j].field();
        if (opts.statistic == OmegaStatistic::KMax) {
            ys[j] = std::pow(k.max(), -(p + 1.0)) / (p + 1.0);
        } else {
            ys[j] = k.map([p](double v) { return std::pow(v, -(p + 1.0)) / (p + 1.0); }).mean();
        }
    }
    // Centre t for conditioning.
    const double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / count;
    const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        sxx += (ts[j] - tm) * (ts[j] - tm);
        sxy += (ts[j] - tm) * (ys[j] - ym);
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::PoorFit, "degenerate time window");
    const double slope = sxy / sxx;
    if (!(slope < 0.0)) throw Error(ErrorKind::PoorFit, "blow-up functional is not decreasing");

    double ss = 0.0, ymax = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        const double r = ys[j] - (ym + slope * (ts[j] - tm));
        ss += r * r;
        ymax = std::max(ymax, std::abs(ys[j]));
    }
    OmegaFit fit;
    fit.slope = slope;
    fit.omega = tm - ym / slope;
    fit.residual = std::sqrt(ss / count) / ymax;
    fit.window_begin = begin;
    fit.points = count;
    if (fit.residual > opts.poor_fit_threshold) {
        throw Error(ErrorKind::PoorFit,
                    "relative fit residual " + std::to_string(fit.residual) + " too large");
    }
    if (!(fit.omega > traj.times.back())) {
        throw Error(ErrorKind::PoorFit, "fitted blow-up time precedes the last snapshot");
    }
    if (p == 1.0) {
        const CurvatureProfile& last = traj.profiles.back();
        const Field h = solve_support(last, kInf);
        const double omega_area =
            traj.times.back() + area(h, last) / kTwoPi;
        fit.omega_area = omega_area;
        if (std::abs(omega_area - fit.omega) > opts.area_cross_check * fit.omega) {
            throw Error(ErrorKind::PoorFit, "fitted blow-up time disagrees with the area law");
        }
    }
    return fit;
}

double rescaled_time(double t, double omega, double p) {
    return -std::log((omega - t) / omega) / (p + 1.0);
}

Field rescale_profile(const Field& k, double t, double omega, double p) {
    const double factor = std::pow((p + 1.0) * (omega - t), p / (p + 1.0));
    return k.map([p, factor](double v) { return std::pow(v, p) * factor; });
}

RescaledTrajectory rescale(const Trajectory& traj, double omega) {
    if (!traj.g.is_power_law()) {
        throw Error(ErrorKind::InvalidArgument, "rescaling is defined for power-law G only");
    }
    if (traj.size() == 0 || !(omega > traj.times.back())) {
        throw Error(ErrorKind::InvalidArgument, "omega must exceed every snapshot time");
    }
    const double p = traj.p();
    RescaledTrajectory rt;
    rt.p = p;
    rt.omega = omega;
    rt.total_steps = traj.total_steps;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double t = traj.times[j];
        rt.taus.push_back(rescaled_time(t, omega, p));
        rt.profiles.push_back(rescale_profile(traj.profiles[j].field(), t, omega, p));
        rt.closure.push_back(rescaled_closure_residual(rt.profiles.back(), p));
    }
    return rt;
}

Field rhs_rescaled(const Field& kt, double p, DiffMethod diff) {
    require_positive(kt, "rhs_rescaled");
    const Field d2 = derivative(kt, 2, diff);
    Field out = kt;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = kt[i];
        const double v1p = std::pow(v, 1.0 / p);
        out[i] = p * v * v1p * d2[i] + p * v * v * v1p - p * v;
    }
    return out;
}

double rescaled_closure_residual(const Field& kt, double p) {
    return first_mode_magnitude(kt.map([p](double v) { return std::pow(v, -1.0 / p); }));
}

RescaledTrajectory run_rescaled(const Field& kt0, double p, double tau_end,
                                const RescaledConfig& cfg) {
    if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
    if (!(tau_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau_end must be positive");
    require_positive(kt0, "run_rescaled");
    const double initial_closure = rescaled_closure_residual(kt0, p);
    if (initial_closure > cfg.tol_closure) {
        throw Error(ErrorKind::ClosureViolation,
                    "initial rescaled closure residual " + std::to_string(initial_closure));
    }
    std::vector<double> outputs = cfg.output_taus;
    std::sort(outputs.begin(), outputs.end());
    outputs.erase(std::remove_if(outputs.begin(), outputs.end(),
                                 [tau_end](double v) { return v <= 0.0 || v > tau_end; }),
                  outputs.end());
    const bool exact_outputs = !outputs.empty();
    if (!exact_outputs || outputs.back() < tau_end) outputs.push_back(tau_end);

    const double dtheta = kt0.grid().spacing();
    const double drift_limit = cfg.closure_drift_factor * cfg.tol_closure;

    RescaledTrajectory rt;
    rt.p = p;
    rt.omega = kNaN;

    auto record = [&](const Field& kt, double tau) {
        const double mean = kt.mean();
        if (mean < cfg.gauge_low || mean > cfg.gauge_high) {
            throw Error(ErrorKind::GaugeDrift, "mean of rescaled curvature " +
                                                   std::to_string(mean) + " at tau = " +
                                                   std::to_string(tau));
        }
        const double residual = rescaled_closure_residual(kt, p);
        if (residual > drift_limit) {
            throw Error(ErrorKind::ClosureDrift, "rescaled closure residual " +
                                                     std::to_string(residual));
        }
        rt.taus.push_back(tau);
        rt.profiles.push_back(kt);
        rt.closure.push_back(residual);
    };

    auto rhs = [p, &cfg](const Field& u) { return rhs_rescaled(u, p, cfg.diff); };

    Field kt = kt0;
    double tau = 0.0;
    std::size_t step = 0;
    std::size_t next_output = 0;
    record(kt, tau);
    while (next_output < outputs.size()) {
        if (step >= cfg.max_steps) break;
        double dmax = 0.0;
        for (double v : kt.values()) dmax = std::max(dmax, p * std::pow(v, 1.0 + 1.0 / p));
        double dt = cfg.sigma * dtheta * dtheta / dmax;
        const double target = outputs[next_output];
        bool hit = false;
        if (tau + dt >= target) {
            dt = target - tau;
            hit = true;
        }
        kt = rk4_step(kt, dt, rhs);
        tau = hit ? target : tau + dt;
        ++step;
        require_positive(kt, "run_rescaled");
        // Gauge runaway is caught at every step so the abort is clean.
        const double mean = kt.mean();
        if (mean < cfg.gauge_low || mean > cfg.gauge_high || !kt.all_finite()) {
            throw Error(ErrorKind::GaugeDrift, "mean of rescaled curvature " +
                                                   std::to_string(mean) + " at tau = " +
                                                   std::to_string(tau));
        }
        if (hit) {
            record(kt, tau);
            ++next_output;
        } else if (!exact_outputs && cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0) {
            record(kt, tau);
        }
    }
    rt.total_steps = step;
    return rt;
}

}  // namespace gcsf
