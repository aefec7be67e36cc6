#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gcsf/geometry.hpp"
#include "gcsf/grid.hpp"

namespace gcsf {

/// Normal speed factor G in  d(gamma)/dt = G(k) k N.
class GModel {
public:
    using Fn = std::function<double(double)>;

    /// G(x) = x^(p-1), p >= 1.
    static GModel power_law(double p);
    /// Arbitrary G with its derivative. Only rhs evaluation, step control and the
    /// blow-up functional accept it.
    static GModel general(Fn g, Fn dg, std::string name = "general");

    bool is_power_law() const noexcept { return !g_; }
    /// Power-law exponent; NaN for a general model.
    double p() const noexcept { return p_; }
    const std::string& name() const noexcept { return name_; }

    double G(double x) const;
    double dG(double x) const;
    /// Diffusion coefficient k^2 (G'(k) k + G(k)) of the curvature equation.
    double diffusion(double k) const;

private:
    GModel() = default;

    double p_ = 1.0;
    Fn g_;
    Fn dg_;
    std::string name_;
};

/// Numeric sanity check of the structural hypotheses on G over [lo, hi]:
/// G > 0, G' >= 0, G(x) x^2 convex, and G'(x) x <= C0 G(x) for the sampled range.
struct HypothesisReport {
    bool positive = true;
    bool nondecreasing = true;
    bool convex_gx2 = true;
    double growth_constant = 0.0;  // max of G'(x) x / G(x) over the range
    bool ok() const { return positive && nondecreasing && convex_gx2; }
};

HypothesisReport validate_hypotheses(const GModel& g, double lo = 1.0, double hi = 1e6,
                                     int samples = 400);

struct CircleShape {
    double r = 1.0;
};
struct EllipseShape {
    double a = 1.0;
    double b = 1.0;
};
/// h = c0 + sum_m (a_m cos m theta + b_m sin m theta), m >= 2.
struct SupportShape {
    double c0 = 1.0;
    std::map<int, std::pair<double, double>> modes;
};
using ShapeSpec = std::variant<CircleShape, EllipseShape, SupportShape>;

/// `circle:r=<R>` | `ellipse:a=<a>,b=<b>` | `support:c0=<v>(;a<m>=<v>|;b<m>=<v>)*`.
/// Throws ConfigError on malformed input.
ShapeSpec parse_shape(std::string_view spec);
std::string format_shape(const ShapeSpec& shape);

/// Support function of the shape sampled on the grid.
Field support_function(const ShapeSpec& shape, const PeriodicGrid& grid);

/// k = 1/(h + h'') of the shape. Throws NotConvex if h + h'' <= 0 anywhere.
CurvatureProfile initial_profile(const ShapeSpec& shape, const PeriodicGrid& grid);

struct FlowConfig {
    GModel g = GModel::power_law(1.0);
    std::size_t n = 256;
    double sigma = 0.2;
    /// Absolute stopping threshold on k_max; <= 0 selects 50 x initial k_max.
    double k_stop = 0.0;
    /// Steps between snapshots; 0 picks a stride targeting about 400 snapshots.
    std::size_t snapshot_stride = 0;
    std::size_t max_steps = 50'000'000;
    double tol_closure = kDefaultClosureTolerance;
    double closure_drift_factor = 100.0;
    double tail_threshold = 1e-6;
    bool project_closure = false;
    DiffMethod diff = DiffMethod::Spectral;
};

enum class StopReason { KStop, StepCap, TauEnd };
std::string_view to_string(StopReason reason);

struct Trajectory {
    GModel g = GModel::power_law(1.0);
    std::vector<double> times;
    std::vector<CurvatureProfile> profiles;
    std::vector<std::size_t> steps;
    std::vector<double> closure;
    std::vector<double> tail;
    std::optional<double> omega_hat;
    std::optional<double> omega_fit_residual;
    StopReason stop_reason = StopReason::KStop;
    std::size_t total_steps = 0;

    double p() const { return g.p(); }
    std::size_t size() const { return times.size(); }
};

struct RescaledTrajectory {
    double p = 1.0;
    double omega = 0.0;  // NaN for direct rescaled runs
    std::vector<double> taus;
    std::vector<Field> profiles;
    std::vector<double> closure;
    std::size_t total_steps = 0;

    std::size_t size() const { return taus.size(); }
};

/// k^2 ((G(k) k)'' + G(k) k). Throws NonPositiveCurvature if min k <= 0.
Field rhs_physical(const Field& k, const GModel& g, DiffMethod diff = DiffMethod::Spectral);

/// sigma dtheta^2 / max D(k).
double stable_dt(const Field& k, const GModel& g, double dtheta, double sigma);

/// Classical four-stage explicit integration of the curvature equation up to k_stop.
Trajectory run_physical(const CurvatureProfile& k0, const FlowConfig& cfg);

/// Which theta-statistic of T(k) = k^-(p+1)/(p+1) is fitted against t.
enum class OmegaStatistic {
    /// T(k_max): the classic choice; biased at first order in the mode amplitude.
    KMax,
    /// Mean over theta of T(k): first-order mode content averages out.
    Mean,
};

struct OmegaFitOptions {
    OmegaStatistic statistic = OmegaStatistic::Mean;
    double window_fraction = 0.3;
    std::size_t min_points = 20;
    double min_growth = 5.0;
    double poor_fit_threshold = 1e-3;
    double area_cross_check = 1e-2;
};

struct OmegaFit {
    double omega = 0.0;
    double residual = 0.0;
    double slope = 0.0;
    std::size_t window_begin = 0;
    std::size_t points = 0;
    /// t_last + A(t_last)/(2 pi), available for p = 1 where dA/dt = -2 pi exactly.
    std::optional<double> omega_area;
};

/// Fits the chosen statistic of k^-(p+1)/(p+1) linearly in t over the trailing window and returns the root.
/// Throws PoorFit when the relative residual exceeds the threshold.
OmegaFit estimate_omega(const Trajectory& traj, const OmegaFitOptions& opts = {});

/// tau = -ln((omega - t)/omega)/(p+1),  k~ = k^p [(p+1)(omega - t)]^(p/(p+1)).
double rescaled_time(double t, double omega, double p);
Field rescale_profile(const Field& k, double t, double omega, double p);
RescaledTrajectory rescale(const Trajectory& traj, double omega);

/// p k~^(1+1/p) k~'' + p k~^(2+1/p) - p k~.
Field rhs_rescaled(const Field& kt, double p, DiffMethod diff = DiffMethod::Spectral);

struct RescaledConfig {
    double sigma = 0.2;
    std::size_t snapshot_stride = 50;
    /// Snapshots are taken exactly at these times when nonempty (steps are clipped).
    std::vector<double> output_taus;
    std::size_t max_steps = 50'000'000;
    double tol_closure = kDefaultClosureTolerance;
    double closure_drift_factor = 100.0;
    double gauge_low = 0.5;
    double gauge_high = 2.0;
    DiffMethod diff = DiffMethod::Spectral;
};

/// First-mode closure measure of k~^(-1/p).
double rescaled_closure_residual(const Field& kt, double p);

/// Direct integration of the rescaled equation on [0, tau_end].
RescaledTrajectory run_rescaled(const Field& kt0, double p, double tau_end,
                                const RescaledConfig& cfg = {});

}  // namespace gcsf
