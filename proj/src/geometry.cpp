#include "gcsf/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gcsf/error.hpp"

namespace gcsf {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

bool invert3(const Mat3& m, Mat3& inv) {
    const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    if (std::abs(det) < 1e-300) return false;
    const double id = 1.0 / det;
    inv[0][0] = c00 * id;
    inv[1][0] = c01 * id;
    inv[2][0] = c02 * id;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
    return true;
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Circle circle_from(Point2 a, Point2 b) {
    return {{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}, 0.5 * dist(a, b)};
}

Circle circle_from(Point2 a, Point2 b, Point2 c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    if (std::abs(d) < 1e-300) {
        // Collinear: the circle over the farthest pair.
        Circle best = circle_from(a, b);
        for (Circle cand : {circle_from(a, c), circle_from(b, c)}) {
            if (cand.radius > best.radius) best = cand;
        }
        return best;
    }
    const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    const Point2 center{a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
    return {center, dist(center, a)};
}

bool contains(const Circle& c, Point2 p) {
    return dist(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-300;
}

}  // namespace

CurvatureProfile::CurvatureProfile(Field k) : k_(std::move(k)) {
    if (k_.min() <= 0.0) {
        throw Error(ErrorKind::NonPositiveCurvature,
                    "curvature must be strictly positive, min = " + std::to_string(k_.min()));
    }
}

Field CurvatureProfile::radius() const {
    return k_.map([](double v) { return 1.0 / v; });
}

double CurveGeometry::isoperimetric_ratio() const {
    return length * length / (4.0 * std::numbers::pi * area);
}

double closure_residual(const CurvatureProfile& k) { return first_mode_magnitude(k.radius()); }

Field solve_support(const CurvatureProfile& k, double tol_closure) {
    const double residual = closure_residual(k);
    if (residual > tol_closure) {
        throw Error(ErrorKind::ClosureViolation,
                    "closure residual " + std::to_string(residual) + " exceeds tolerance");
    }
    Spectrum s = forward(k.radius());
    const std::size_t half = k.grid().nyquist();
    for (std::size_t m = 0; m <= half; ++m) {
        if (m == 1) {
            s.coeffs[m] = 0.0;
            continue;
        }
        const double md = static_cast<double>(m);
        s.coeffs[m] /= (1.0 - md * md);
    }
    return inverse(s);
}

Field radius_of_curvature(const Field& h) { return h + derivative(h, 2); }

std::vector<Point2> reconstruct_curve(const Field& h) {
    const Field rho = radius_of_curvature(h);
    if (rho.min() <= 0.0) {
        throw Error(ErrorKind::NotConvex,
                    "h + h'' must be positive, min = " + std::to_string(rho.min()));
    }
    const Field dh = derivative(h, 1);
    std::vector<Point2> pts(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double th = h.grid().theta(i);
        const double c = std::cos(th), s = std::sin(th);
        pts[i] = {h[i] * c - dh[i] * s, h[i] * s + dh[i] * c};
    }
    return pts;
}

double area(const Field& h, const CurvatureProfile& k) {
    return 0.5 * integrate(h * k.radius());
}

double area_from_support(const Field& h) {
    const Field dh = derivative(h, 1);
    return 0.5 * integrate(h * h - dh * dh);
}

double length(const CurvatureProfile& k) { return integrate(k.radius()); }

double shoelace_area(const std::vector<Point2>& polygon) {
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Point2 a = polygon[i], b = polygon[(i + 1) % polygon.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

double polygon_perimeter(const std::vector<Point2>& polygon) {
    double total = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        total += dist(polygon[i], polygon[(i + 1) % polygon.size()]);
    }
    return total;
}

Circle smallest_enclosing_circle(const std::vector<Point2>& points) {
    if (points.empty()) return {};
    std::vector<Point2> pts = points;
    // mt19937's output sequence is fixed by the standard; the index draw is done by
    // hand so the permutation is the same on every platform.
    std::mt19937 rng(0x5eedu);
    for (std::size_t i = pts.size() - 1; i > 0; --i) {
        std::swap(pts[i], pts[rng() % (i + 1)]);
    }

    Circle c{pts[0], 0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (contains(c, pts[i])) continue;
        c = {pts[i], 0.0};
        for (std::size_t j = 0; j < i; ++j) {
            if (contains(c, pts[j])) continue;
            c = circle_from(pts[i], pts[j]);
            for (std::size_t l = 0; l < j; ++l) {
                if (!contains(c, pts[l])) c = circle_from(pts[i], pts[j], pts[l]);
            }
        }
    }
    return c;
}

Circle chebyshev_circle(const Field& h) {
    // Dual of  max r  s.t.  c.u_i + r <= h_i :
    //   min sum h_i y_i  s.t.  sum y_i (cos_i, sin_i, 1) = (0, 0, 1),  y >= 0.
    // Revised simplex over a 3x3 basis; the optimal simplex multipliers are (c, r).
    const std::size_t n = h.size();
    std::vector<Vec3> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = h.grid().theta(i);
        cols[i] = {std::cos(th), std::sin(th), 1.0};
    }
    const Vec3 rhs{0.0, 0.0, 1.0};
    std::array<std::size_t, 3> basis{0, n / 3, (2 * n) / 3};

    double scale = h.max_abs();
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-13 * scale;

    Vec3 duals{};
    const std::size_t max_iter = 50 * n;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        Mat3 b{}, binv{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) b[r][c] = cols[basis[c]][r];
        }
        if (!invert3(b, binv)) throw Error(ErrorKind::InvalidArgument, "singular LP basis");

        Vec3 xb{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) xb[r] += binv[r][c] * rhs[c];
        }
        // duals^T = c_B^T B^{-1}
        for (int c = 0; c < 3; ++c) {
            duals[c] = 0.0;
            for (int r = 0; r < 3; ++r) duals[c] += h[basis[r]] * binv[r][c];
        }

        // Dantzig pricing, switching to Bland's rule late to rule out cycling.
        const bool bland = iter > 10 * n;
        std::size_t entering = n;
        double best = -tol;
        for (std::size_t j = 0; j < n; ++j) {
            const double reduced =
                h[j] - (duals[0] * cols[j][0] + duals[1] * cols[j][1] + duals[2] * cols[j][2]);
            if (reduced < best) {
                entering = j;
                if (bland) break;
                best = reduced;
            }
        }
        if (entering == n) return {{duals[0], duals[1]}, duals[2]};

        Vec3 w{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) w[r] += binv[r][c] * cols[entering][c];
        }
        int leaving = -1;
        double ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < 3; ++r) {
            if (w[r] > 1e-14) {
                const double t = std::max(xb[r], 0.0) / w[r];
                if (t < ratio || (t == ratio && leaving >= 0 && basis[r] < basis[leaving])) {
                    ratio = t;
                    leaving = r;
                }
            }
        }
        // The primal is bounded for a body with nonempty interior.
        if (leaving < 0) throw Error(ErrorKind::InvalidArgument, "unbounded inscribed-circle LP");
        basis[static_cast<std::size_t>(leaving)] = entering;
    }
    throw Error(ErrorKind::InvalidArgument, "inscribed-circle LP did not converge");
}

std::pair<double, double> inradius_circumradius(const Field& h) {
    const Circle inner = chebyshev_circle(h);
    const Circle outer = smallest_enclosing_circle(reconstruct_curve(h));
    return {inner.radius, outer.radius};
}

double normalized_deviation(const Field& h, double area) {
    if (!(area > 0.0)) throw Error(ErrorKind::InvalidArgument, "area must be positive");
    const Field dh = derivative(h, 1);
    const double scale = std::sqrt(std::numbers::pi / area);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double r = scale * std::hypot(h[i], dh[i]);
        worst = std::max(worst, std::abs(r - 1.0));
    }
    return worst;
}

CurveGeometry compute_geometry(const CurvatureProfile& k, double tol_closure) {
    Field h = solve_support(k, tol_closure);
    CurveGeometry g{h, reconstruct_curve(h), 0.0, 0.0, 0.0, 0.0, closure_residual(k)};
    g.area = area(h, k);
    g.length = length(k);
    const auto [r_in, r_out] = inradius_circumradius(h);
    g.r_in = r_in;
    g.r_out = r_out;
    return g;
}

}  // namespace gcsf
