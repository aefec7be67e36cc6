#include <cmath>
#include <random>

#include "doctest.h"

#include "gcsf/analysis.hpp"
#include "gcsf/error.hpp"
#include "gcsf/grid.hpp"
#include "support.hpp"

using namespace gcsf;
using gcsf::testing::thrown_kind;

namespace {

const PeriodicGrid g256(256);

double max_diff(const Field& a, const Field& b) {
    return (a - b).max_abs();
}

// 2 pi I0(1) from the power series sum (1/4)^k / (k!)^2.
double bessel_i0_integral() {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 30; ++k) {
        term *= 0.25 / (static_cast<double>(k) * k);
        sum += term;
    }
    return kTwoPi * sum;
}

Field random_trig(std::mt19937_64& rng, const PeriodicGrid& grid, int degree, bool zero_mean) {
    std::normal_distribution<double> gauss;
    std::vector<double> a(degree + 1), b(degree + 1);
    for (int m = 0; m <= degree; ++m) {
        a[m] = gauss(rng) / (1.0 + m);
        b[m] = gauss(rng) / (1.0 + m);
    }
    if (zero_mean) a[0] = 0.0;
    return Field::sample(grid, [&](double t) {
        double v = a[0];
        for (int m = 1; m <= degree; ++m) v += a[m] * std::cos(m * t) + b[m] * std::sin(m * t);
        return v;
    });
}

}  // namespace

TEST_CASE("grid rejects odd or small sizes") {
    CHECK(thrown_kind([] { PeriodicGrid(15); }) == ErrorKind::InvalidArgument);
    CHECK(thrown_kind([] { PeriodicGrid(8); }) == ErrorKind::InvalidArgument);
    PeriodicGrid g(16);
    CHECK(g.spacing() == doctest::Approx(kTwoPi / 16));
    CHECK(g.theta(3) == doctest::Approx(3 * kTwoPi / 16));
}

TEST_CASE("field rejects non-finite samples") {
    std::vector<double> v(16, 1.0);
    v[4] = std::nan("");
    CHECK(thrown_kind([&] { Field(PeriodicGrid(16), v); }) == ErrorKind::InvalidArgument);
    CHECK(thrown_kind([] { Field(PeriodicGrid(16), std::vector<double>(12, 1.0)); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("derivative of trig modes") {
    auto s = Field::sample(g256, [](double t) { return std::sin(t); });
    auto c = Field::sample(g256, [](double t) { return std::cos(t); });
    CHECK(max_diff(derivative(s, 1), c) <= 1e-12);

    Field k(g256, 3.5);
    for (int order = 1; order <= kMaxDerivativeOrder; ++order) {
        CHECK(derivative(k, order).max_abs() <= 1e-12);
    }

    auto s3 = Field::sample(g256, [](double t) { return std::sin(3 * t); });
    CHECK(max_diff(derivative(s3, 2), -9.0 * s3) <= 1e-11 * 9.0);

    auto s2 = Field::sample(g256, [](double t) { return std::sin(2 * t); });
    auto d6 = Field::sample(g256, [](double t) { return -64.0 * std::sin(2 * t); });
    // Sixth order amplifies roundoff by (n/2)^6; compare against that floor.
    CHECK(max_diff(derivative(s2, 6), d6) <= roundoff_floor(6, 256, 1.0));

    CHECK(thrown_kind([&] { derivative(s, 0); }) == ErrorKind::InvalidArgument);
    CHECK(thrown_kind([&] { derivative(s, 7); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("fourth-order differences agree with the spectral derivative") {
    auto f = Field::sample(g256, [](double t) { return std::exp(std::cos(t)); });
    for (int order = 1; order <= 4; ++order) {
        auto spec = derivative(f, order);
        auto fd = derivative(f, order, DiffMethod::FiniteDifference4);
        CHECK(max_diff(spec, fd) <= 1e-5 * std::max(1.0, spec.max_abs()));
    }
}

TEST_CASE("integrate") {
    CHECK(integrate(Field(g256, 1.0)) == doctest::Approx(kTwoPi).epsilon(1e-14));
    auto s2 = Field::sample(g256, [](double t) { return std::sin(t) * std::sin(t); });
    CHECK(integrate(s2) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
    auto e = Field::sample(g256, [](double t) { return std::exp(std::cos(t)); });
    CHECK(integrate(e) == doctest::Approx(bessel_i0_integral()).epsilon(1e-13));
    CHECK(bessel_i0_integral() == doctest::Approx(7.954926521).epsilon(1e-9));
}

TEST_CASE("lq norms") {
    auto s = Field::sample(g256, [](double t) { return std::sin(t); });
    CHECK(lq_norm(s, 0, 2.0) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK(lq_norm(s, 1, kInf) == doctest::Approx(1.0).epsilon(1e-12));
    auto f = Field::sample(g256, [](double t) { return 1.0 + 0.1 * std::cos(2 * t); });
    double expected = 0.2 * std::pow(3.0 * std::numbers::pi / 4.0, 0.25);
    CHECK(lq_norm(f, 1, 4.0) == doctest::Approx(expected).epsilon(1e-12));
    // Direct quadrature of (0.2 sin 2t)^4 on a fine grid.
    double fine = 0.0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) fine += std::pow(0.2 * std::sin(2.0 * kTwoPi * i / m), 4);
    CHECK(std::pow(fine * kTwoPi / m, 0.25) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("spectrum conjugate symmetry and round trip") {
    std::mt19937_64 rng(7);
    auto f = random_trig(rng, g256, 60, false);
    auto spec = forward(f);
    for (long m = 1; m < 60; ++m) {
        auto pos = spec.mode(m);
        auto neg = spec.mode(-m);
        CHECK(std::abs(neg - std::conj(pos)) <= 1e-15);
    }
    CHECK(max_diff(inverse(spec), f) <= 1e-12 * f.max_abs());
}

TEST_CASE("property: round trip through the antiderivative") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_trig(rng, g256, 64, true);
        CHECK(max_diff(derivative(antiderivative(f), 1), f) <= 1e-10 * f.max_abs());
    }
}

TEST_CASE("property: derivative is linear") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_trig(rng, g256, 40, false);
        auto g = random_trig(rng, g256, 40, false);
        double a = coef(rng);
        double b = coef(rng);
        for (int order = 1; order <= 3; ++order) {
            auto lhs = derivative(a * f + b * g, order);
            auto rhs = a * derivative(f, order) + b * derivative(g, order);
            double scale = std::max(1.0, lhs.max_abs());
            CHECK(max_diff(lhs, rhs) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("property: Parseval") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_trig(rng, g256, 100, false);
        auto spec = forward(f);
        double energy = 0.0;
        long half = static_cast<long>(g256.nyquist());
        for (long m = -half + 1; m < half; ++m) energy += std::norm(spec.mode(m));
        CHECK(integrate(f * f) == doctest::Approx(kTwoPi * energy).epsilon(1e-10));
    }
}

TEST_CASE("property: quadrature is exact below the Nyquist degree") {
    for (int m = 1; m < 128; ++m) {
        auto c = Field::sample(g256, [m](double t) { return std::cos(m * t); });
        auto s = Field::sample(g256, [m](double t) { return std::sin(m * t); });
        CHECK(std::abs(integrate(c)) <= 1e-12);
        CHECK(std::abs(integrate(s)) <= 1e-12);
    }
}

TEST_CASE("spectral tail and first mode") {
    auto smooth = Field::sample(g256, [](double t) { return 1.0 + 0.3 * std::cos(2 * t); });
    CHECK(spectral_tail_fraction(smooth) <= 1e-25);
    auto rough = Field::sample(g256, [](double t) { return std::cos(120 * t); });
    CHECK(spectral_tail_fraction(rough) == doctest::Approx(1.0));
    auto shifted = Field::sample(g256, [](double t) { return 1.0 + 0.3 * std::cos(t); });
    CHECK(first_mode_magnitude(shifted) == doctest::Approx(0.3).epsilon(1e-12));
}
