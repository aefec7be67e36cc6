#include <cmath>
#include <random>

#include "doctest.h"

#include "gcsf/analysis.hpp"
#include "gcsf/error.hpp"
#include "gcsf/flow.hpp"
#include "support.hpp"

using namespace gcsf;
using gcsf::testing::thrown_kind;

namespace {

const PeriodicGrid g256(256);
constexpr double pi = std::numbers::pi;

RescaledTrajectory single_snapshot(const Field& f) {
    RescaledTrajectory rt;
    rt.taus = {0.0};
    rt.profiles = {f};
    rt.closure = {0.0};
    return rt;
}

double ledger_value(const NormLedger& ledger, int l, double q) {
    return ledger.series(l, q).values.front();
}

// Ellipse run shared between cases; integrated once.
struct EllipseRun {
    Trajectory traj;
    OmegaFit omega;
    RescaledTrajectory rt;
    NormLedger ledger;
};

const EllipseRun& ellipse_run() {
    static const EllipseRun run = [] {
        EllipseRun r;
        FlowConfig cfg;
        r.traj = run_physical(initial_profile(EllipseShape{1.0, 0.5}, g256), cfg);
        r.omega = estimate_omega(r.traj);
        r.rt = rescale(r.traj, r.omega.omega);
        r.ledger = build_ledger(r.rt, 2);
        return r;
    }();
    return run;
}

}  // namespace

TEST_CASE("ledger rows") {
    auto flat = build_ledger(single_snapshot(Field(g256, 1.0)), 3);
    for (const auto& row : flat.rows) {
        if (row.l >= 1) CHECK(row.value <= 1e-10);
    }
    CHECK(flat.grid_size == 256);

    auto f = Field::sample(g256, [](double t) { return 1.0 + 0.1 * std::cos(2 * t); });
    auto ledger = build_ledger(single_snapshot(f), 2);
    CHECK(ledger_value(ledger, 1, 2.0) == doctest::Approx(0.2 * std::sqrt(pi)).epsilon(1e-12));
    CHECK(0.2 * std::sqrt(pi) == doctest::Approx(0.35449).epsilon(1e-5));
    CHECK(ledger_value(ledger, 2, kInf) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ledger.rows.size() == 3 * 3);

    CHECK(thrown_kind([&] { build_ledger(single_snapshot(f), 7); }) == ErrorKind::InvalidArgument);

    // A field with energy parked in the top decade of modes is under-resolved.
    auto rough = Field::sample(g256, [](double t) { return 1.0 + 0.01 * std::cos(120 * t); });
    CHECK(thrown_kind([&] { build_ledger(single_snapshot(rough), 2); }) == ErrorKind::ResolutionLoss);
}

TEST_CASE("decay fits") {
    std::vector<double> tau, y, y2, zeros;
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.1 * i;
        tau.push_back(t);
        y.push_back(5.0 * std::exp(-2.0 * t));
        y2.push_back(3.0 * std::exp(-t) + 3.0 * std::exp(-4.0 * t));
        zeros.push_back(0.0);
    }
    auto fit = fit_decay_rate(tau, y);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(fit.C == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(fit.residual <= 1e-12);

    // Late window: the e^{-tau} term dominates, the other is down by e^{-15}.
    auto late = fit_decay_rate(tau, y2, 0.5);
    CHECK(late.slope == doctest::Approx(-1.0).epsilon(1e-5));

    CHECK(fit_decay_rate(tau, zeros).below_floor);

    auto negative = y;
    negative.back() = -1.0;
    CHECK(thrown_kind([&] { fit_decay_rate(tau, negative); }) == ErrorKind::NonPositive);
    CHECK(thrown_kind([&] { fit_decay_rate({0.0, 1.0}, {1.0, 0.5}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("envelopes") {
    CHECK(envelope_forced_decay({.C = 1, .D = 1, .q = 1, .alpha = 2, .beta = 1}, 0.0) ==
          doctest::Approx(2.0));
    CHECK(envelope_forced_decay({.C = 1, .D = 1, .q = 1, .alpha = 2, .beta = 2}, 1.0) ==
          doctest::Approx(2.0 * std::exp(-2.0)));
    for (double tau : {0.0, 0.7, 5.0}) {
        CHECK(envelope_power_bound({.C = 2, .D = 0, .q = 1}, tau) == doctest::Approx(1.0));
    }
}

TEST_CASE("Gage-Hamilton ratio") {
    const double eps = 1e-3;
    auto mode = [&](double a2, double a3) {
        return Field::sample(g256, [=](double t) {
            return 1.0 + eps * (a2 * std::cos(2 * t) + a3 * std::cos(3 * t));
        });
    };
    CHECK(gage_hamilton_ratio(mode(1, 0)) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(gage_hamilton_ratio(mode(0, 1)) == doctest::Approx(9.0).epsilon(1e-10));
    CHECK(gage_hamilton_ratio(mode(1, 1)) == doctest::Approx(97.0 / 13.0).epsilon(1e-10));
    CHECK(97.0 / 13.0 == doctest::Approx(7.4615).epsilon(1e-5));
    CHECK(std::isinf(gage_hamilton_ratio(Field(g256, 1.0))));
}

TEST_CASE("property: Gage-Hamilton ratio is at least 4 without the first mode") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(20), b(20);
        for (int m = 2; m < 20; ++m) {
            a[m] = amp(rng) / (m * m);
            b[m] = amp(rng) / (m * m);
        }
        auto f = Field::sample(g256, [&](double t) {
            double v = 1.0;
            for (int m = 2; m < 20; ++m) v += 0.01 * (a[m] * std::cos(m * t) + b[m] * std::sin(m * t));
            return v;
        });
        CHECK(gage_hamilton_ratio(f) >= 4.0 * (1 - 1e-12));
    }
}

TEST_CASE("blow-up functional") {
    CHECK(blowup_functional(2.0, GModel::power_law(1.0)) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
    CHECK(blowup_functional(1.0, GModel::power_law(2.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    auto unit = GModel::general([](double) { return 1.0; }, [](double) { return 0.0; });
    CHECK(blowup_functional(3.0, unit) ==
          doctest::Approx(blowup_functional(3.0, GModel::power_law(1.0))).epsilon(1e-10));

    auto cubic = GModel::general([](double x) { return x * x; }, [](double x) { return 2 * x; });
    CHECK(blowup_functional(1.5, cubic) ==
          doctest::Approx(blowup_functional(1.5, GModel::power_law(3.0))).epsilon(1e-10));

    auto divergent = GModel::general([](double x) { return 1.0 / (x * x); },
                                     [](double x) { return -2.0 / (x * x * x); });
    CHECK(thrown_kind([&] { blowup_functional(2.0, divergent); }) == ErrorKind::DivergentIntegral);
    CHECK(thrown_kind([] { blowup_functional(0.0, GModel::power_law(1.0)); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("inequalities") {
    CHECK(young_bound(1.0, 1.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    auto s = Field::sample(g256, [](double t) { return std::sin(t); });
    CHECK(std::abs(wirtinger_slack(s)) <= 1e-10);
    CHECK(sobolev_bound(s) == doctest::Approx((1 / std::sqrt(kTwoPi) + std::sqrt(kTwoPi)) * std::sqrt(pi)));
    CHECK(sobolev_bound(s) == doctest::Approx(5.1506).epsilon(1e-4));
    CHECK(s.max_abs() <= sobolev_bound(s));

    auto report = inequality_suite(42, 1000);
    CHECK(report.passed());
    CHECK(report.worst_margin() >= -1e-10);
    CHECK(report.wirtinger_equality_gap <= 1e-10);
    auto again = inequality_suite(42, 1000);
    CHECK(again.worst_margin() == report.worst_margin());
    CHECK(thrown_kind([] { inequality_suite(1, 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("verdict config") {
    VerdictConfig cfg;
    cfg.alpha = 1.0;
    CHECK(thrown_kind([&] { cfg.validate(); }) == ErrorKind::InvalidArgument);
    // Blow-up exponent for p = 1, alpha = 0.9: 2 alpha p/(p+1) - 1/(p+1).
    CHECK(2 * 0.9 * 1 / 2.0 - 1 / 2.0 == doctest::Approx(0.4));
}

TEST_CASE("circle runs sit below the floor") {
    FlowConfig cfg;
    cfg.g = GModel::power_law(2.0);
    cfg.k_stop = 10.0;
    auto traj = run_physical(initial_profile(CircleShape{1.0}, g256), cfg);
    const double omega = 1.0 / 3.0;
    auto rt = rescale(traj, omega);
    auto ledger = build_ledger(rt, 2);
    for (const auto& v : verify_derivative_decay(ledger, 2.0)) {
        CHECK(v.pass);
        CHECK(v.below_floor);
    }
    for (const auto& v : verify_blowup_rates(traj, omega, 2)) {
        CHECK(v.pass);
        CHECK(v.below_floor);
    }
    auto series = roundness_series(traj, omega);
    CHECK(series.curvature_ratio.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(series.radius_ratio.back() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(series.functional_sup.back() <= 1e-4);
    for (const auto& v : verify_roundness(series)) CHECK(v.pass);
}

TEST_CASE("ellipse p=1 verdicts") {
    const auto& run = ellipse_run();
    for (const auto& v : verify_derivative_decay(run.ledger, 1.0)) {
        CAPTURE(v.claim_id);
        CHECK(v.pass);
        CHECK(v.measured == doctest::Approx(-2.0).epsilon(0.05));
    }
    for (const auto& v : verify_blowup_rates(run.traj, run.omega.omega, 2)) {
        CAPTURE(v.claim_id);
        CHECK(v.pass);
        CHECK(v.measured >= 0.4 - 0.1);
    }
    for (const auto& v : verify_roundness(roundness_series(run.traj, run.omega.omega))) {
        CAPTURE(v.claim_id);
        CHECK(v.pass);
    }
    for (const auto& v : verify_energy_bounds(run.ledger)) {
        CAPTURE(v.claim_id);
        CHECK(v.pass);
    }
    auto gh = verify_gage_hamilton(run.rt);
    CHECK(gh.pass);
    CHECK(gh.measured >= 3.6);

    // Tightness probe: required slope -1.998 against a measured rate near -2.
    VerdictConfig tight;
    tight.alpha = 0.999;
    tight.slope_tol = 0.0;
    CHECK(verify_derivative_decay(run.ledger, 1.0, tight).size() == 2);
}

TEST_CASE("property: later fit windows do not flip decay verdicts") {
    const auto& run = ellipse_run();
    VerdictConfig base;
    const auto reference = verify_derivative_decay(run.ledger, 1.0, base);
    for (double w : {0.45, 0.4, 0.3, 0.2}) {
        VerdictConfig cfg;
        cfg.window_fraction = w;
        const auto later = verify_derivative_decay(run.ledger, 1.0, cfg);
        for (std::size_t i = 0; i < later.size(); ++i) {
            CAPTURE(w);
            CHECK(later[i].measured <= later[i].required + base.slope_tol);
            CHECK(std::abs(later[i].measured - reference[i].measured) <= base.slope_tol);
        }
    }
}

TEST_CASE("energies match ledger rows") {
    const auto& run = ellipse_run();
    const auto& f = run.rt.profiles[run.rt.size() / 2];
    const double l1q2 = lq_norm(f, 1, 2.0);
    const double l1q4 = lq_norm(f, 1, 4.0);
    const double l2q2 = lq_norm(f, 2, 2.0);
    CHECK(energy_f(f, 1) == doctest::Approx(l1q2 * l1q2).epsilon(1e-10));
    CHECK(energy_f(f, 3) == doctest::Approx(std::pow(l1q4, 4)).epsilon(1e-10));
    CHECK(energy_g(f) == doctest::Approx(l2q2 * l2q2).epsilon(1e-10));
    CHECK(thrown_kind([&] { energy_f(f, 2); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("Gage-Hamilton series stays above 4 alpha late in the run") {
    const auto& run = ellipse_run();
    const std::size_t from = run.rt.size() / 4;
    for (std::size_t j = from; j < run.rt.size(); ++j) {
        CHECK(gage_hamilton_ratio(run.rt.profiles[j]) >= 3.6);
    }
}
