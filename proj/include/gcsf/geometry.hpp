#pragma once

#include <utility>
#include <vector>

#include "gcsf/grid.hpp"

namespace gcsf {

inline constexpr double kDefaultClosureTolerance = 1e-8;

/// Curvature as a function of the normal angle. Strictly positive.
class CurvatureProfile {
public:
    explicit CurvatureProfile(Field k);

    const Field& field() const noexcept { return k_; }
    const PeriodicGrid& grid() const noexcept { return k_.grid(); }
    double min() const { return k_.min(); }
    double max() const { return k_.max(); }

    /// 1/k, the radius of curvature.
    Field radius() const;

private:
    Field k_;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Circle {
    Point2 center;
    double radius = 0.0;
};

struct CurveGeometry {
    Field support;
    std::vector<Point2> points;
    double area = 0.0;
    double length = 0.0;
    double r_in = 0.0;
    double r_out = 0.0;
    double closure_residual = 0.0;

    double isoperimetric_ratio() const;
};

/// max(|int cos/k|, |int sin/k|) / pi. Zero iff the curve closes.
double closure_residual(const CurvatureProfile& k);

/// Solves h + h'' = 1/k with the m = +-1 modes zeroed (Steiner point at the origin).
/// Throws ClosureViolation when closure_residual(k) > tol_closure.
Field solve_support(const CurvatureProfile& k, double tol_closure = kDefaultClosureTolerance);

/// h + h'' computed spectrally.
Field radius_of_curvature(const Field& h);

/// gamma(theta) = h u(theta) + h' u'(theta). Throws NotConvex if min(h + h'') <= 0.
std::vector<Point2> reconstruct_curve(const Field& h);

/// A = 1/2 int h/k.
double area(const Field& h, const CurvatureProfile& k);
/// A = 1/2 int (h^2 - h'^2); only needs the support function.
double area_from_support(const Field& h);
double length(const CurvatureProfile& k);

double shoelace_area(const std::vector<Point2>& polygon);
double polygon_perimeter(const std::vector<Point2>& polygon);

/// Smallest enclosing circle of a point set (randomized incremental, fixed seed).
Circle smallest_enclosing_circle(const std::vector<Point2>& points);

/// Largest inscribed circle of the body {x : x.u(theta_i) <= h_i for all i}.
Circle chebyshev_circle(const Field& h);

/// (r_in, r_out): Chebyshev radius of the support constraints and the radius of the
/// smallest circle enclosing the reconstructed vertices.
std::pair<double, double> inradius_circumradius(const Field& h);

/// max | |eta| - 1 | for eta = sqrt(pi/A) gamma, gamma in Steiner gauge.
double normalized_deviation(const Field& h, double area);

/// Full diagnostic bundle for one curvature snapshot.
CurveGeometry compute_geometry(const CurvatureProfile& k,
                               double tol_closure = kDefaultClosureTolerance);

}  // namespace gcsf
