#include "gcsf/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

#include "gcsf/error.hpp"

namespace gcsf {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per size and live for the process lifetime.
struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [n, plans] : plans_) {
            fftw_destroy_plan(plans.r2c);
            fftw_destroy_plan(plans.c2r);
        }
    }

    PlanPair get(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> real(n);
        std::vector<std::complex<double>> cplx(n / 2 + 1);
        auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        PlanPair plans;
        plans.r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c, flags);
        plans.c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(), flags);
        plans_.emplace(n, plans);
        return plans;
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) {
        throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
    }
}

Field fd4_first(const Field& f) {
    const std::size_t n = f.size();
    const double h = f.grid().spacing();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fm2 = f[(i + n - 2) % n], fm1 = f[(i + n - 1) % n];
        const double fp1 = f[(i + 1) % n], fp2 = f[(i + 2) % n];
        out[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    }
    return Field(f.grid(), std::move(out));
}

Field fd4_second(const Field& f) {
    const std::size_t n = f.size();
    const double h = f.grid().spacing();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fm2 = f[(i + n - 2) % n], fm1 = f[(i + n - 1) % n];
        const double fp1 = f[(i + 1) % n], fp2 = f[(i + 2) % n];
        out[i] = (-fm2 + 16.0 * fm1 - 30.0 * f[i] + 16.0 * fp1 - fp2) / (12.0 * h * h);
    }
    return Field(f.grid(), std::move(out));
}

}  // namespace

PeriodicGrid::PeriodicGrid(std::size_t n) : n_(n) {
    if (n < 16 || n % 2 != 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "grid size must be even and >= 16, got " + std::to_string(n));
    }
}

Field::Field(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw Error(ErrorKind::InvalidArgument, "field length does not match grid size");
    }
    if (!all_finite()) throw Error(ErrorKind::InvalidArgument, "field has non-finite samples");
}

Field::Field(PeriodicGrid grid, double constant)
    : grid_(grid), values_(grid.size(), constant) {}

Field Field::sample(PeriodicGrid grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.theta(i));
    return Field(grid, std::move(v));
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) /
           static_cast<double>(values_.size());
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

Field operator*(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

std::complex<double> Spectrum::mode(long m) const {
    const long half = static_cast<long>(grid.nyquist());
    if (m > half || m < -half) return {0.0, 0.0};
    return m >= 0 ? coeffs[static_cast<std::size_t>(m)]
                  : std::conj(coeffs[static_cast<std::size_t>(-m)]);
}

Spectrum forward(const Field& f) {
    const std::size_t n = f.size();
    PlanPair plans = plan_cache().get(n);
    std::vector<double> in(f.values().begin(), f.values().end());
    Spectrum s{f.grid(), std::vector<std::complex<double>>(n / 2 + 1)};
    fftw_execute_dft_r2c(plans.r2c, in.data(), reinterpret_cast<fftw_complex*>(s.coeffs.data()));
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& c : s.coeffs) c *= scale;
    return s;
}

Field inverse(const Spectrum& s) {
    const std::size_t n = s.grid.size();
    PlanPair plans = plan_cache().get(n);
    std::vector<std::complex<double>> work = s.coeffs;
    std::vector<double> out(n);
    fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(work.data()), out.data());
    return Field(s.grid, std::move(out));
}

Field derivative(const Field& f, int order, DiffMethod method) {
    if (order < 1 || order > kMaxDerivativeOrder) {
        throw Error(ErrorKind::InvalidArgument,
                    "derivative order must be in [1, 6], got " + std::to_string(order));
    }
    if (method == DiffMethod::FiniteDifference4) {
        Field out = f;
        int remaining = order;
        while (remaining >= 2) {
            out = fd4_second(out);
            remaining -= 2;
        }
        if (remaining == 1) out = fd4_first(out);
        return out;
    }

    Spectrum s = forward(f);
    const std::size_t half = f.grid().nyquist();
    // i^order cycles through 1, i, -1, -i.
    static constexpr std::complex<double> kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const std::complex<double> phase = kIPow[order % 4];
    for (std::size_t m = 0; m <= half; ++m) {
        if (m == half && order % 2 == 1) {
            s.coeffs[m] = 0.0;
            continue;
        }
        double mag = 1.0;
        for (int j = 0; j < order; ++j) mag *= static_cast<double>(m);
        s.coeffs[m] *= phase * mag;
    }
    s.coeffs[half] = {s.coeffs[half].real(), 0.0};
    return inverse(s);
}

Field antiderivative(const Field& f) {
    Spectrum s = forward(f);
    const std::size_t half = f.grid().nyquist();
    s.coeffs[0] = 0.0;
    for (std::size_t m = 1; m < half; ++m) {
        s.coeffs[m] /= std::complex<double>(0.0, static_cast<double>(m));
    }
    s.coeffs[half] = 0.0;
    return inverse(s);
}

double integrate(const Field& f) {
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    return f.grid().spacing() * sum;
}

double lq_norm(const Field& f, int l, double q) {
    if (l < 0 || l > kMaxDerivativeOrder) {
        throw Error(ErrorKind::InvalidArgument, "norm derivative order must be in [0, 6]");
    }
    if (!(q >= 1.0)) throw Error(ErrorKind::InvalidArgument, "norm exponent must be >= 1");
    const Field d = l == 0 ? f : derivative(f, l);
    if (std::isinf(q)) return d.max_abs();
    double sum = 0.0;
    for (double v : d.values()) sum += std::pow(std::abs(v), q);
    return std::pow(d.grid().spacing() * sum, 1.0 / q);
}

double spectral_tail_fraction(const Field& f, double top_fraction) {
    const Spectrum s = forward(f);
    const std::size_t half = f.grid().nyquist();
    const double cutoff = (1.0 - top_fraction) * static_cast<double>(half);
    double total = 0.0, tail = 0.0;
    for (std::size_t m = 0; m <= half; ++m) {
        // Modes 1..n/2-1 appear twice (m and -m); the DC and Nyquist modes once.
        const double weight = (m == 0 || m == half) ? 1.0 : 2.0;
        const double e = weight * std::norm(s.coeffs[m]);
        total += e;
        if (static_cast<double>(m) > cutoff) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

double first_mode_magnitude(const Field& f) {
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double th = f.grid().theta(i);
        c += std::cos(th) * f[i];
        s += std::sin(th) * f[i];
    }
    const double h = f.grid().spacing();
    return std::max(std::abs(c * h), std::abs(s * h)) / std::numbers::pi;
}

}  // namespace gcsf
