#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcsf/flow.hpp"
#include "gcsf/grid.hpp"

namespace gcsf {

inline constexpr double kBelowFloor = 1e-12;

/// Level at which an order-l spectral derivative of a field of size `scale` on an
/// n-point grid is indistinguishable from roundoff: 100 eps (n/2)^l scale.
double roundoff_floor(int l, std::size_t n, double scale);

enum class TimeCoordinate { Physical, Rescaled };

struct NormRow {
    double time = 0.0;
    int l = 0;
    double q = 2.0;  // kInf for the sup norm
    double value = 0.0;
};

/// Derivative norms per snapshot, ordered by (l, q) and then time.
struct NormLedger {
    std::string run_id;
    TimeCoordinate coordinate = TimeCoordinate::Rescaled;
    int l_max = 0;
    std::size_t grid_size = 0;
    std::vector<NormRow> rows;

    struct Series {
        std::vector<double> times;
        std::vector<double> values;
    };
    Series series(int l, double q) const;
};

inline constexpr double kLedgerExponents[] = {2.0, 4.0, kInf};

/// Rows for every l <= l_max and q in {2, 4, inf} at every snapshot. Throws
/// ResolutionLoss if the l_max-th derivative carries more than `tail_limit` of its
/// energy in the top decade of modes (checked only above the roundoff floor).
NormLedger build_ledger(const RescaledTrajectory& rt, int l_max, double tail_limit = 1e-4);
NormLedger build_physical_ledger(const Trajectory& traj, int l_max);

struct RateFit {
    double slope = 0.0;
    double C = 0.0;  // exp(intercept)
    double window_begin = 0.0;
    double window_end = 0.0;
    double residual = 0.0;
    std::size_t points = 0;
    bool below_floor = false;
};

/// Least squares of ln(value) on time over the trailing `window_fraction` of the time
/// range. Values under `floor` are dropped; if that leaves fewer than `min_points`
/// the fit reports below_floor. Negative values throw NonPositive.
RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                       double window_fraction = 0.5, double floor = kBelowFloor,
                       std::size_t min_points = 10);

struct VerdictConfig {
    double alpha = 0.9;
    double slope_tol = 0.1;
    double window_fraction = 0.5;
    double ratio_tol = 0.98;
    double item3_tol = 0.05;
    double iso_tol = 1.001;
    double monotone_window = 0.3;
    double monotone_slack = 1e-6;
    double gh_start_fraction = 0.25;
    double floor = kBelowFloor;

    void validate() const;
};

struct Verdict {
    std::string claim_id;
    std::string statement;
    double measured = 0.0;
    double required = 0.0;
    bool pass = false;
    bool below_floor = false;
};

/// Sup norm of each rescaled derivative decays at least like exp(-2 alpha p tau).
std::vector<Verdict> verify_derivative_decay(const NormLedger& ledger, double p,
                                             const VerdictConfig& cfg = {});

/// Physical sup norms of d^l k grow no faster than (omega - t)^(2 alpha p/(p+1) - 1/(p+1)).
std::vector<Verdict> verify_blowup_rates(const Trajectory& traj, double omega, int l_max,
                                         const VerdictConfig& cfg = {});

/// int_k^inf dx / (G(x) x^3). Closed form for power laws, adaptive quadrature otherwise.
double blowup_functional(double k, const GModel& g);

struct RoundnessSeries {
    std::vector<double> times;
    std::vector<double> radius_ratio;     // r_in / r_out
    std::vector<double> curvature_ratio;  // k_min / k_max
    std::vector<double> functional_sup;   // sup |T(k)/(omega - t) - 1|
    std::vector<double> iso_ratio;        // L^2 / (4 pi A)
    std::vector<double> deviation;        // normalized-curve deviation from the unit circle
    std::vector<CurveGeometry> geometry;
};

RoundnessSeries roundness_series(const Trajectory& traj, double omega);

/// Radius ratio, curvature ratio, blow-up functional and isoperimetric verdicts.
std::vector<Verdict> verify_roundness(const RoundnessSeries& series,
                                      const VerdictConfig& cfg = {});

/// int k~''^2 / int k~'^2; +inf when k~' is below the roundoff floor.
double gage_hamilton_ratio(const Field& kt);

Verdict verify_gage_hamilton(const RescaledTrajectory& rt, const VerdictConfig& cfg = {});

/// Sup norm of k~' tends to zero, and the l = 1 (q = 2, 4) and l = 2 (q = 2) norms stay
/// bounded over the run.
std::vector<Verdict> verify_energy_bounds(const NormLedger& ledger, const VerdictConfig& cfg = {});

/// f = int k~'^(n+1) for odd n and g = int k~''^2.
double energy_f(const Field& kt, int n);
double energy_g(const Field& kt);

struct EnvelopeParams {
    double C = 1.0;
    double D = 1.0;
    double q = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
};

/// Bound on f^(1/q): C/(2q) + D exp(-2 tau).
double envelope_power_bound(const EnvelopeParams& params, double tau);
/// Bound for f' <= -alpha f + C exp(-beta tau): D e^{-alpha tau} + C/(alpha-beta) e^{-beta tau},
/// or D e^{-alpha tau} + C tau e^{-alpha tau} when alpha == beta.
double envelope_forced_decay(const EnvelopeParams& params, double tau);

/// eps^p a^p / p + b^q / (eps^q q) with q = p/(p-1); bounds ab from above.
double young_bound(double a, double b, double eps, double p);
/// int f'^2 - int (f - mean f)^2, which is never negative.
double wirtinger_slack(const Field& f);
/// (1/sqrt(2 pi) + sqrt(2 pi)) max(|f|_2, |f'|_2); bounds max |f| from above.
double sobolev_bound(const Field& f);

struct InequalityReport {
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::size_t violations = 0;
    double worst_young = kInf;
    double worst_wirtinger = kInf;
    double worst_sobolev = kInf;
    double wirtinger_equality_gap = 0.0;  // at f = sin(theta)

    bool passed() const { return violations == 0; }
    double worst_margin() const;
};

/// Young, Wirtinger and Sobolev checks on `count` seeded random trig polynomials of
/// degree <= n/4. Margins are (rhs - lhs)/max(1, |rhs|); below -margin is a violation.
InequalityReport inequality_suite(std::uint64_t seed, std::size_t count, std::size_t n = 256,
                                  double margin = 1e-10);

}  // namespace gcsf
