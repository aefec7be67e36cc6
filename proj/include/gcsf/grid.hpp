#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace gcsf {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform grid theta_i = 2*pi*i/n on the unit circle. n must be even and >= 16.
class PeriodicGrid {
public:
    explicit PeriodicGrid(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return kTwoPi / static_cast<double>(n_); }
    double theta(std::size_t i) const noexcept { return spacing() * static_cast<double>(i); }
    std::size_t nyquist() const noexcept { return n_ / 2; }

    friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

private:
    std::size_t n_;
};

/// Real samples of a 2*pi-periodic function on a PeriodicGrid.
class Field {
public:
    Field(PeriodicGrid grid, std::vector<double> values);
    Field(PeriodicGrid grid, double constant);

    static Field sample(PeriodicGrid grid, const std::function<double(double)>& f);

    const PeriodicGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    double min() const;
    double max() const;
    double max_abs() const;
    double mean() const;
    bool all_finite() const;

    template <class F>
    Field map(F&& f) const {
        Field out = *this;
        for (double& v : out.values_) v = f(v);
        return out;
    }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, double s);
Field operator*(double s, Field a);
/// Pointwise product.
Field operator*(const Field& a, const Field& b);

/// Fourier coefficients c_m = (1/n) sum_j f_j exp(-i m theta_j) for m = 0..n/2.
/// Negative modes follow from conjugate symmetry of real fields.
struct Spectrum {
    PeriodicGrid grid;
    std::vector<std::complex<double>> coeffs;

    std::complex<double> mode(long m) const;
};

Spectrum forward(const Field& f);
Field inverse(const Spectrum& s);

enum class DiffMethod { Spectral, FiniteDifference4 };

inline constexpr int kMaxDerivativeOrder = 6;

/// d^order f / dtheta^order. Spectral by default; the Nyquist mode is dropped for
/// odd orders. Throws InvalidArgument for order outside [1, 6].
Field derivative(const Field& f, int order, DiffMethod method = DiffMethod::Spectral);

/// Mean-zero antiderivative of the mean-zero part of f.
Field antiderivative(const Field& f);

/// Periodic trapezoid rule, (2*pi/n) * sum f_i.
double integrate(const Field& f);

/// [integral |d^l f|^q]^(1/q); q = kInf gives max |d^l f|. l = 0 uses f directly.
double lq_norm(const Field& f, int l, double q);

/// Fraction of the spectral energy (sum over |m| of |c_m|^2, both signs) carried by
/// modes with |m| > (1 - top_fraction) * n/2.
double spectral_tail_fraction(const Field& f, double top_fraction = 0.1);

/// Normalized first-mode magnitude max(|int cos f|, |int sin f|) / pi.
double first_mode_magnitude(const Field& f);

}  // namespace gcsf
