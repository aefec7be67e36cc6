#include "gcsf/analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gcsf/error.hpp"
#include "gcsf/geometry.hpp"

namespace gcsf {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::size_t window_start(std::size_t n, double fraction) {
    const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    return n - std::clamp<std::size_t>(count, 1, n);
}

bool nondecreasing(const std::vector<double>& v, std::size_t from, double slack) {
    for (std::size_t i = from + 1; i < v.size(); ++i) {
        if (v[i] < v[i - 1] - slack) return false;
    }
    return true;
}

bool nonincreasing(const std::vector<double>& v, std::size_t from, double slack) {
    for (std::size_t i = from + 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] + slack) return false;
    }
    return true;
}

// Uniform double in [0, 1) from the top 53 bits; fixed across platforms.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

void append_rows(NormLedger& ledger, double time, const Field& f) {
    for (int l = 0; l <= ledger.l_max; ++l) {
        const Field d = l == 0 ? f : derivative(f, l);
        for (double q : kLedgerExponents) {
            ledger.rows.push_back({time, l, q, lq_norm(d, 0, q)});
        }
    }
}

void sort_ledger(NormLedger& ledger) {
    std::stable_sort(ledger.rows.begin(), ledger.rows.end(),
                     [](const NormRow& a, const NormRow& b) {
                         if (a.l != b.l) return a.l < b.l;
                         if (a.q != b.q) return a.q < b.q;
                         return a.time < b.time;
                     });
}

}  // namespace

double roundoff_floor(int l, std::size_t n, double scale) {
    return 100.0 * std::numeric_limits<double>::epsilon() *
           std::pow(static_cast<double>(n / 2), l) * scale;
}

NormLedger::Series NormLedger::series(int l, double q) const {
    Series s;
    for (const NormRow& r : rows) {
        if (r.l == l && r.q == q) {
            s.times.push_back(r.time);
            s.values.push_back(r.value);
        }
    }
    return s;
}

NormLedger build_ledger(const RescaledTrajectory& rt, int l_max, double tail_limit) {
    if (l_max < 0 || l_max > kMaxDerivativeOrder) {
        throw Error(ErrorKind::InvalidArgument, "l_max must be in [0, 6]");
    }
    NormLedger ledger;
    ledger.coordinate = TimeCoordinate::Rescaled;
    ledger.l_max = l_max;
    ledger.grid_size = rt.size() > 0 ? rt.profiles.front().size() : 0;
    for (std::size_t j = 0; j < rt.size(); ++j) {
        const Field& f = rt.profiles[j];
        if (l_max >= 1) {
            const Field top = derivative(f, l_max);
            // Roundoff has a flat spectrum, amplified by m^l under differentiation; only
            // judge resolution where the derivative clears that floor by a wide margin.
            if (top.max_abs() > 10.0 * roundoff_floor(l_max, f.size(), f.max_abs())) {
                const double tail = spectral_tail_fraction(top);
                if (tail > tail_limit) {
                    throw Error(ErrorKind::ResolutionLoss,
                                "order-" + std::to_string(l_max) + " derivative tail fraction " +
                                    fmt(tail) + " at tau = " + fmt(rt.taus[j]));
                }
            }
        }
        append_rows(ledger, rt.taus[j], f);
    }
    sort_ledger(ledger);
    return ledger;
}

NormLedger build_physical_ledger(const Trajectory& traj, int l_max) {
    if (l_max < 0 || l_max > kMaxDerivativeOrder) {
        throw Error(ErrorKind::InvalidArgument, "l_max must be in [0, 6]");
    }
    NormLedger ledger;
    ledger.coordinate = TimeCoordinate::Physical;
    ledger.l_max = l_max;
    ledger.grid_size = traj.size() > 0 ? traj.profiles.front().grid().size() : 0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        append_rows(ledger, traj.times[j], traj.profiles[j].field());
    }
    sort_ledger(ledger);
    return ledger;
}

RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                       double window_fraction, double floor, std::size_t min_points) {
    if (times.size() != values.size() || times.empty()) {
        throw Error(ErrorKind::InvalidArgument, "decay fit needs matching nonempty series");
    }
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "window fraction must lie in (0, 1]");
    }
    RateFit fit;
    fit.window_end = times.back();
    fit.window_begin = times.back() - window_fraction * (times.back() - times.front());

    std::vector<double> xs, ys;
    bool dropped = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < fit.window_begin) continue;
        if (values[i] < 0.0) {
            throw Error(ErrorKind::NonPositive, "negative value in decay series");
        }
        if (values[i] < floor) {
            dropped = true;
            continue;
        }
        xs.push_back(times[i]);
        ys.push_back(std::log(values[i]));
    }
    fit.points = xs.size();
    if (xs.size() < min_points) {
        if (dropped) {
            fit.below_floor = true;
            return fit;
        }
        throw Error(ErrorKind::InvalidArgument,
                    "decay fit needs at least " + std::to_string(min_points) + " points");
    }
    const double n = static_cast<double>(xs.size());
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::InvalidArgument, "degenerate decay-fit window");
    fit.slope = sxy / sxx;
    const double intercept = ym - fit.slope * xm;
    fit.C = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

void VerdictConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie strictly between 0 and 1");
    }
    if (!(slope_tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "slope_tol must be >= 0");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "window fraction must lie in (0, 1]");
    }
}

std::vector<Verdict> verify_derivative_decay(const NormLedger& ledger, double p,
                                             const VerdictConfig& cfg) {
    cfg.validate();
    std::vector<Verdict> out;
    const double required = -2.0 * cfg.alpha * p + cfg.slope_tol;
    for (int l = 1; l <= ledger.l_max; ++l) {
        const auto s = ledger.series(l, kInf);
        // The rescaled field is O(1); its own sup norm sets the roundoff scale.
        const auto base = ledger.series(0, kInf);
        const double scale = base.values.empty()
                                 ? 1.0
                                 : *std::max_element(base.values.begin(), base.values.end());
        const double floor = std::max(cfg.floor, roundoff_floor(l, ledger.grid_size, scale));
        const RateFit fit = fit_decay_rate(s.times, s.values, cfg.window_fraction, floor);
        Verdict v;
        v.claim_id = "derivative_decay_l" + std::to_string(l);
        v.statement = "sup norm of the order-" + std::to_string(l) +
                      " rescaled curvature derivative decays at least like exp(-2 alpha p tau)";
        v.required = required;
        v.below_floor = fit.below_floor;
        v.measured = fit.below_floor ? -kInf : fit.slope;
        v.pass = fit.below_floor || fit.slope <= required;
        out.push_back(v);
    }
    return out;
}

std::vector<Verdict> verify_blowup_rates(const Trajectory& traj, double omega, int l_max,
                                         const VerdictConfig& cfg) {
    cfg.validate();
    if (!traj.g.is_power_law()) {
        throw Error(ErrorKind::InvalidArgument, "blow-up rate check is stated for power laws");
    }
    const double p = traj.p();
    const double exponent = 2.0 * cfg.alpha * p / (p + 1.0) - 1.0 / (p + 1.0);
    std::vector<Verdict> out;
    for (int l = 1; l <= l_max; ++l) {
        // s = -ln(omega - t) increases toward blow-up; norm ~ (omega - t)^power means
        // ln norm has slope -power in s. The floor is relative to the curvature scale.
        std::vector<double> s, values;
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const Field& k = traj.profiles[j].field();
            const double norm = derivative(k, l).max_abs();
            s.push_back(-std::log(omega - traj.times[j]));
            const double floor =
                std::max(cfg.floor, roundoff_floor(l, k.size(), 1.0)) * k.max_abs();
            values.push_back(norm < floor ? 0.0 : norm);
        }
        const RateFit fit = fit_decay_rate(s, values, cfg.window_fraction, cfg.floor);
        Verdict v;
        v.claim_id = "blowup_rate_l" + std::to_string(l);
        v.statement = "sup norm of the order-" + std::to_string(l) +
                      " curvature derivative is O((omega - t)^(2 alpha p/(p+1) - 1/(p+1)))";
        v.required = exponent - cfg.slope_tol;
        v.below_floor = fit.below_floor;
        v.measured = fit.below_floor ? kInf : -fit.slope;
        v.pass = fit.below_floor || v.measured >= v.required;
        out.push_back(v);
    }
    return out;
}

double blowup_functional(double k, const GModel& g) {
    if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "curvature must be positive");
    if (g.is_power_law()) {
        const double p = g.p();
        return std::pow(k, -(p + 1.0)) / (p + 1.0);
    }
    // x = 1/u maps (k, inf) onto (0, 1/k]: dx/(G x^3) = u du / G(1/u).
    auto integrand = [&g](double u) { return u > 0.0 ? u / g.G(1.0 / u) : 0.0; };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, 1.0 / k, 20, 1e-12, &error);
    if (!std::isfinite(value) || !std::isfinite(error) || error > 1e-10 * std::abs(value)) {
        throw Error(ErrorKind::DivergentIntegral,
                    "blow-up functional quadrature did not converge at k = " + fmt(k));
    }
    return value;
}

RoundnessSeries roundness_series(const Trajectory& traj, double omega) {
    if (!(omega > traj.times.back())) {
        throw Error(ErrorKind::InvalidArgument, "omega must exceed every snapshot time");
    }
    RoundnessSeries s;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const CurvatureProfile& k = traj.profiles[j];
        const double remaining = omega - traj.times[j];
        CurveGeometry geo = compute_geometry(k, kInf);
        double sup = 0.0;
        for (double v : k.field().values()) {
            sup = std::max(sup, std::abs(blowup_functional(v, traj.g) / remaining - 1.0));
        }
        s.times.push_back(traj.times[j]);
        s.radius_ratio.push_back(geo.r_in / geo.r_out);
        s.curvature_ratio.push_back(k.min() / k.max());
        s.functional_sup.push_back(sup);
        s.iso_ratio.push_back(geo.isoperimetric_ratio());
        s.deviation.push_back(normalized_deviation(geo.support, geo.area));
        s.geometry.push_back(std::move(geo));
    }
    return s;
}

std::vector<Verdict> verify_roundness(const RoundnessSeries& s, const VerdictConfig& cfg) {
    if (s.times.empty()) throw Error(ErrorKind::InvalidArgument, "empty roundness series");
    const std::size_t from = window_start(s.times.size(), cfg.monotone_window);
    std::vector<Verdict> out;

    Verdict radius;
    radius.claim_id = "radius_ratio";
    radius.statement = "inradius/circumradius tends to 1 monotonically near blow-up";
    radius.measured = s.radius_ratio.back();
    radius.required = cfg.ratio_tol;
    radius.pass = radius.measured >= cfg.ratio_tol &&
                  nondecreasing(s.radius_ratio, from, cfg.monotone_slack);
    out.push_back(radius);

    Verdict curvature;
    curvature.claim_id = "curvature_ratio";
    curvature.statement = "k_min/k_max tends to 1 monotonically near blow-up";
    curvature.measured = s.curvature_ratio.back();
    curvature.required = cfg.ratio_tol;
    curvature.pass = curvature.measured >= cfg.ratio_tol &&
                     nondecreasing(s.curvature_ratio, from, cfg.monotone_slack);
    out.push_back(curvature);

    Verdict functional;
    functional.claim_id = "blowup_functional";
    functional.statement =
        "int_k^inf dx/(G(x) x^3) / (omega - t) tends to 1 uniformly on the circle";
    functional.measured = s.functional_sup.back();
    functional.required = cfg.item3_tol;
    functional.pass = functional.measured <= cfg.item3_tol &&
                      nonincreasing(s.functional_sup, from, cfg.monotone_slack);
    out.push_back(functional);

    Verdict iso;
    iso.claim_id = "isoperimetric_ratio";
    iso.statement = "L^2/(4 pi A) tends to 1 as the curve shrinks to a round point";
    iso.measured = s.iso_ratio.back();
    iso.required = cfg.iso_tol;
    iso.pass = iso.measured <= cfg.iso_tol;
    out.push_back(iso);
    return out;
}

double gage_hamilton_ratio(const Field& kt) {
    const Field d1 = derivative(kt, 1);
    if (d1.max_abs() < kBelowFloor) return kInf;
    const Field d2 = derivative(kt, 2);
    return integrate(d2 * d2) / integrate(d1 * d1);
}

Verdict verify_gage_hamilton(const RescaledTrajectory& rt, const VerdictConfig& cfg) {
    cfg.validate();
    if (rt.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty rescaled trajectory");
    const auto from = static_cast<std::size_t>(cfg.gh_start_fraction * rt.size());
    double worst = kInf;
    for (std::size_t j = from; j < rt.size(); ++j) {
        worst = std::min(worst, gage_hamilton_ratio(rt.profiles[j]));
    }
    Verdict v;
    v.claim_id = "gage_hamilton_ratio";
    v.statement = "int k~''^2 >= 4 alpha int k~'^2 once the rescaled flow has settled";
    v.measured = worst;
    v.required = 4.0 * cfg.alpha;
    v.below_floor = std::isinf(worst);
    v.pass = worst >= v.required;
    return v;
}

std::vector<Verdict> verify_energy_bounds(const NormLedger& ledger, const VerdictConfig& cfg) {
    std::vector<Verdict> out;
    if (ledger.l_max >= 1) {
        const auto s = ledger.series(1, kInf);
        const double peak = *std::max_element(s.values.begin(), s.values.end());
        Verdict v;
        v.claim_id = "gradient_vanishes";
        v.statement = "sup norm of k~' converges to zero";
        v.measured = peak > 0.0 ? s.values.back() / peak : 0.0;
        v.required = 1e-2;
        v.below_floor = s.values.back() < cfg.floor;
        v.pass = v.below_floor || v.measured <= v.required;
        out.push_back(v);
    }
    const std::pair<int, double> bounded[] = {{1, 2.0}, {1, 4.0}, {2, 2.0}};
    for (const auto& [l, q] : bounded) {
        if (l > ledger.l_max) continue;
        const auto s = ledger.series(l, q);
        const std::size_t half = s.values.size() / 2;
        const double early = *std::max_element(s.values.begin(), s.values.begin() + half + 1);
        const double late = *std::max_element(s.values.begin() + half, s.values.end());
        Verdict v;
        v.claim_id = "bounded_l" + std::to_string(l) + "_q" + std::to_string(static_cast<int>(q));
        v.statement = "L" + std::to_string(static_cast<int>(q)) + " norm of the order-" +
                      std::to_string(l) + " rescaled derivative stays bounded";
        v.measured = late;
        v.required = early;
        v.below_floor = early < cfg.floor;
        v.pass = late <= early * (1.0 + 1e-9) + cfg.floor;
        out.push_back(v);
    }
    return out;
}

double energy_f(const Field& kt, int n) {
    if (n < 1 || n % 2 == 0) throw Error(ErrorKind::InvalidArgument, "n must be odd and >= 1");
    return integrate(derivative(kt, 1).map([n](double v) { return std::pow(v, n + 1); }));
}

double energy_g(const Field& kt) {
    const Field d2 = derivative(kt, 2);
    return integrate(d2 * d2);
}

double envelope_power_bound(const EnvelopeParams& prm, double tau) {
    if (!(prm.q >= 1.0)) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
    return prm.C / (2.0 * prm.q) + prm.D * std::exp(-2.0 * tau);
}

double envelope_forced_decay(const EnvelopeParams& prm, double tau) {
    const double homogeneous = prm.D * std::exp(-prm.alpha * tau);
    const double scale = std::max({1.0, std::abs(prm.alpha), std::abs(prm.beta)});
    if (std::abs(prm.alpha - prm.beta) <= 1e-12 * scale) {
        return homogeneous + prm.C * tau * std::exp(-prm.alpha * tau);
    }
    return homogeneous + prm.C / (prm.alpha - prm.beta) * std::exp(-prm.beta * tau);
}

double InequalityReport::worst_margin() const {
    return std::min({worst_young, worst_wirtinger, worst_sobolev});
}

double young_bound(double a, double b, double eps, double p) {
    if (!(p > 1.0) || !(eps > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "Young bound needs p > 1 and eps > 0");
    }
    const double q = p / (p - 1.0);
    return std::pow(eps, p) * std::pow(a, p) / p + std::pow(b, q) / (std::pow(eps, q) * q);
}

double wirtinger_slack(const Field& f) {
    const Field g = f - Field(f.grid(), f.mean());
    const Field dg = derivative(g, 1);
    return integrate(dg * dg) - integrate(g * g);
}

double sobolev_bound(const Field& f) {
    const double c = std::max(lq_norm(f, 0, 2.0), lq_norm(f, 1, 2.0));
    return (1.0 / std::sqrt(kTwoPi) + std::sqrt(kTwoPi)) * c;
}

InequalityReport inequality_suite(std::uint64_t seed, std::size_t count, std::size_t n,
                                  double margin) {
    if (count == 0) throw Error(ErrorKind::InvalidArgument, "inequality suite needs count >= 1");
    const PeriodicGrid grid(n);
    std::mt19937_64 rng(seed);

    InequalityReport report;
    report.seed = seed;
    report.count = count;
    auto record = [&](double& worst, double lhs, double rhs) {
        const double slack = (rhs - lhs) / std::max(1.0, std::abs(rhs));
        worst = std::min(worst, slack);
        if (slack < -margin) ++report.violations;
    };

    const int max_degree = static_cast<int>(n / 4);
    for (std::size_t trial = 0; trial < count; ++trial) {
        // Young: ab <= eps^p a^p/p + b^q/(eps^q q), 1/p + 1/q = 1.
        const double a = uniform(rng, 0.0, 10.0);
        const double b = uniform(rng, 0.0, 10.0);
        const double eps = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
        const double pe = uniform(rng, 1.05, 6.0);
        record(report.worst_young, a * b, young_bound(a, b, eps, pe));

        const int degree = 1 + static_cast<int>(unit(rng) * max_degree);
        std::vector<double> ca(static_cast<std::size_t>(degree) + 1), cb(ca.size());
        const double offset = uniform(rng, -2.0, 2.0);
        for (int m = 1; m <= degree; ++m) {
            ca[static_cast<std::size_t>(m)] = uniform(rng, -1.0, 1.0) / m;
            cb[static_cast<std::size_t>(m)] = uniform(rng, -1.0, 1.0) / m;
        }
        const Field f = Field::sample(grid, [&](double th) {
            double v = offset;
            for (int m = 1; m <= degree; ++m) {
                v += ca[static_cast<std::size_t>(m)] * std::cos(m * th) +
                     cb[static_cast<std::size_t>(m)] * std::sin(m * th);
            }
            return v;
        });

        // Wirtinger on the mean-zero part, Sobolev with C = max(|f|_2, |f'|_2).
        const Field g = f - Field(grid, f.mean());
        const Field dg = derivative(g, 1);
        record(report.worst_wirtinger, integrate(g * g), integrate(dg * dg));
        record(report.worst_sobolev, f.max_abs(), sobolev_bound(f));
    }

    const Field s = Field::sample(grid, [](double th) { return std::sin(th); });
    report.wirtinger_equality_gap = std::abs(wirtinger_slack(s));
    return report;
}

}  // namespace gcsf
