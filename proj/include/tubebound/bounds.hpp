// tubebound/bounds.hpp
//
// Right-hand sides of the radial moment, exponential moment, concentration
// and Feynman-Kac inequalities, as explicit functions of the Lyapunov pair
// (nu, lambda), the initial distance r0 and time t.
//
// Exponentials are evaluated in log space and saturate at kSaturation so that
// curves close to their explosion time can be tabulated.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "tubebound/errors.hpp"
#include "tubebound/modelspaces.hpp"
#include "tubebound/specfun.hpp"

namespace tubebound::bounds {

using modelspaces::LyapunovParams;

inline constexpr double kSaturation = 1e300;

namespace detail {

inline double saturating_exp(double log_value) {
    static const double log_cap = std::log(kSaturation);
    if (!(log_value < log_cap)) return kSaturation;
    return std::exp(log_value);
}

inline void require_time(double t) {
    if (!(t >= 0.0)) throw precondition_error("bounds: t must be non-negative");
}

}  // namespace detail

/// R(t) = (1 - e^{-lambda t}) / lambda, with R = t at lambda = 0.
inline double radial_R(double lambda, double t) {
    detail::require_time(t);
    const double x = lambda * t;
    if (std::abs(x) < 1e-6) return t * (1.0 - x / 2.0 + x * x / 6.0);
    return -std::expm1(-x) / lambda;
}

/// R(t) e^{lambda t} = (e^{lambda t} - 1) / lambda.
inline double radial_R_grown(double lambda, double t) {
    return radial_R(lambda, t) * std::exp(lambda * t);
}

inline double second_moment_bound(const LyapunovParams& p, double r0, double t) {
    detail::require_time(t);
    return (r0 * r0 + p.nu * radial_R(p.lambda, t)) * std::exp(p.lambda * t);
}

/// (2 R e^{lambda t})^ord ord! L^{nu/2 - 1}_ord(-r0^2 / (2 R)); r0^{2 ord} at t = 0.
inline double even_moment_bound(const LyapunovParams& p, double r0, double t, unsigned ord) {
    detail::require_time(t);
    if (ord == 0) return 1.0;
    const double R = radial_R(p.lambda, t);
    if (R == 0.0) return std::pow(r0, 2.0 * ord);
    const double lag = specfun::laguerre(ord, p.nu / 2.0 - 1.0, -r0 * r0 / (2.0 * R));
    const double log_value =
        ord * (std::log(2.0 * R) + p.lambda * t) + std::lgamma(ord + 1.0) + std::log(lag);
    return detail::saturating_exp(log_value);
}

/// The argument 12 theta^2 (r0^2 + 2 R(t)) e^{lambda t} of 1F1 in the
/// exp(theta r) bound.
inline double bold_R(const LyapunovParams& p, double r0, double t, double theta) {
    return 12.0 * theta * theta * (r0 * r0 + 2.0 * radial_R(p.lambda, t)) * std::exp(p.lambda * t);
}

/// Upper bound on E[exp(theta r_N(X_t))]; needs nu >= 2.
inline double exp_dist_bound(const LyapunovParams& p, double r0, double t, double theta) {
    if (p.nu < 2.0) throw precondition_error("exp_dist_bound: requires nu >= 2");
    detail::require_time(t);
    if (!(theta >= 0.0)) throw precondition_error("exp_dist_bound: theta must be non-negative");
    const double bR = bold_R(p, r0, t, theta);
    if (bR == 0.0) return 1.0;
    const auto f = specfun::kummer_series(p.nu / 2.0, 0.5, bR);
    if (!f.converged || !std::isfinite(f.tail)) return kSaturation;
    const double value = 1.0 + (1.0 + 1.0 / std::sqrt(bR)) * f.tail;
    return std::isfinite(value) && value < kSaturation ? value : kSaturation;
}

/// Upper bound on E[exp(theta r_N^2(X_t) / 2)], valid while
/// theta R(t) e^{lambda t} < 1.
inline double exp_sq_bound(const LyapunovParams& p, double r0, double t, double theta) {
    detail::require_time(t);
    if (!(theta >= 0.0)) throw precondition_error("exp_sq_bound: theta must be non-negative");
    const double growth = std::exp(p.lambda * t);
    const double x = theta * radial_R(p.lambda, t) * growth;
    if (x >= 1.0) throw domain_error("exp_sq_bound: theta R(t) e^{lambda t} >= 1", x);
    const double log_value = -p.nu / 2.0 * std::log1p(-x) + theta * r0 * r0 * growth / (2.0 * (1.0 - x));
    return detail::saturating_exp(log_value);
}

/// Time at which theta R(t) e^{lambda t} reaches 1, by bisection; nullopt
/// when the product stays below 1 for all t (lambda < 0, theta <= -lambda).
inline std::optional<double> explosion_time(const LyapunovParams& p, double theta) {
    if (!(theta > 0.0)) throw precondition_error("explosion_time: theta must be positive");
    if (p.lambda < 0.0 && theta / (-p.lambda) <= 1.0) return std::nullopt;
    const auto h = [&](double t) { return theta * radial_R_grown(p.lambda, t); };
    double lo = 0.0;
    double hi = 1.0;
    while (h(hi) < 1.0) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

enum class Mode { linear, quadratic };

/// C(t) = (e^{(m-1) C1^2 t} - 1) / ((m-1) C1^2), equal to t when (m-1) C1^2 = 0.
inline double logsob_C(int m, double C1, double t) {
    const double k = (m - 1) * C1 * C1;
    if (k == 0.0) return t;
    return std::expm1(k * t) / k;
}

/// Log-Sobolev route to exponential integrability under a Ricci lower bound
/// -(m-1) C1^2. `linear` bounds E e^{theta r}, `quadratic` bounds
/// E e^{theta r^2 / 2} and requires theta C(t) < 1.
inline double logsob_bound(Mode mode, int m, int n, double C1, double Lambda, double r0, double t,
                           double theta) {
    detail::require_time(t);
    if (!(theta >= 0.0)) throw precondition_error("logsob_bound: theta must be non-negative");
    const double C = logsob_C(m, C1, t);
    const double base = std::sqrt(r0 * r0 + (m - n) * t);
    const double c = n * Lambda + (m - 1) * C1;
    if (mode == Mode::linear) {
        return detail::saturating_exp(theta * base + c * theta * t / 2.0 + theta * theta * C / 2.0);
    }
    const double x = theta * C;
    if (x >= 1.0) throw domain_error("logsob_bound: theta C(t) >= 1", x);
    const double mean_sq = base + c * t / 2.0;
    return detail::saturating_exp(theta * mean_sq * mean_sq / (2.0 * (1.0 - x)));
}

namespace detail {

// Log of the concentration bound, parameterized by delta together with
// u = -log(1 - delta) so that 1 - delta keeps full precision near delta = 1.
inline double log_concentration(const LyapunovParams& p, double r0, double t, double r, double delta, double u) {
    const double R = radial_R(p.lambda, t);
    const double Rg = R * std::exp(p.lambda * t);
    return p.nu / 2.0 * u + r0 * r0 * delta * std::exp(u) / (2.0 * R) - delta * r * r / (2.0 * Rg);
}

}  // namespace detail

/// Markov-inequality tail bound on P{r_N(X_t) >= r} for a fixed delta in [0, 1).
inline double concentration_bound(const LyapunovParams& p, double r0, double t, double r, double delta) {
    if (!(t > 0.0)) throw precondition_error("concentration_bound: t must be positive");
    if (!(delta >= 0.0 && delta < 1.0)) throw precondition_error("concentration_bound: delta must lie in [0, 1)");
    return detail::saturating_exp(detail::log_concentration(p, r0, t, r, delta, -std::log1p(-delta)));
}

struct OptimizedBound {
    double delta = 0.0;
    double value = 1.0;
    double log_value = 0.0;  ///< log of value, kept when value underflows
};

/// Minimize the concentration bound over delta. The log of the bound is
/// convex in u = -log(1 - delta), so golden-section search on u is exact up
/// to its tolerance and resolves delta arbitrarily close to 1.
inline OptimizedBound concentration_bound_optimized(const LyapunovParams& p, double r0, double t, double r) {
    if (!(t > 0.0)) throw precondition_error("concentration_bound: t must be positive");
    const auto objective = [&](double u) {
        return detail::log_concentration(p, r0, t, r, -std::expm1(-u), u);
    };
    constexpr double inv_phi = 0.6180339887498949;
    double a = 0.0;
    double b = 60.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > 1e-8) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    const double u = 0.5 * (a + b);
    const double fu = objective(u);
    if (fu >= 0.0) return {0.0, 1.0, 0.0};
    return {-std::expm1(-u), detail::saturating_exp(fu), fu};
}

/// Bound on P{sup_{s <= t} r_N(X_s) >= r}; same expression as the
/// concentration bound, stated only for lambda >= 0 and delta in (0, 1).
inline double exit_time_bound(const LyapunovParams& p, double r0, double t, double r, double delta) {
    if (p.lambda < 0.0) throw precondition_error("exit_time_bound: requires lambda >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw precondition_error("exit_time_bound: delta must lie in (0, 1)");
    return concentration_bound(p, r0, t, r, delta);
}

/// Bounds on E exp(int_0^t V(X_s) ds) for V <= C (1 + r_N) (`linear`) or
/// V <= C (1 + r_N^2 / 2) (`quadratic`).
inline double feynman_kac_bound(Mode mode, const LyapunovParams& p, double r0, double t, double C) {
    detail::require_time(t);
    if (!(C >= 0.0)) throw precondition_error("feynman_kac_bound: C must be non-negative");
    if (mode == Mode::linear) {
        if (p.lambda < 0.0 || p.nu < 2.0)
            throw precondition_error("feynman_kac_bound: linear mode requires nu >= 2 and lambda >= 0");
        if (C == 0.0) return 1.0;
        const double inner = exp_dist_bound(p, r0, t, C * t);
        if (inner >= kSaturation) return kSaturation;
        return detail::saturating_exp(C * t + std::log(inner));
    }
    const double growth = std::exp(p.lambda * t);
    const double x = C * t * radial_R(p.lambda, t) * growth;
    if (x >= 1.0) throw domain_error("feynman_kac_bound: C t R(t) e^{lambda t} >= 1", x);
    return detail::saturating_exp(-p.nu / 2.0 * std::log1p(-x) + C * t +
                                  C * r0 * r0 * t * growth / (2.0 * (1.0 - x)));
}

// ---------------------------------------------------------------------------
// Curves

struct BoundCurve {
    std::vector<double> grid;
    std::vector<double> values;  ///< NaN where !valid
    std::vector<bool> valid;
    std::optional<double> explosion_point;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t steps) {
    std::vector<double> out;
    if (steps == 0) return out;
    out.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) out.push_back(lo + (hi - lo) * static_cast<double>(i) / steps);
    return out;
}

/// Evaluate `f` on the grid; points where it throws domain_error are marked
/// invalid.
inline BoundCurve evaluate_curve(const std::vector<double>& grid, const std::function<double(double)>& f) {
    BoundCurve curve;
    curve.grid = grid;
    curve.values.reserve(grid.size());
    curve.valid.reserve(grid.size());
    for (double x : grid) {
        try {
            curve.values.push_back(f(x));
            curve.valid.push_back(true);
        } catch (const domain_error&) {
            curve.values.push_back(std::numeric_limits<double>::quiet_NaN());
            curve.valid.push_back(false);
        }
    }
    return curve;
}

/// exp(theta r) bound as a function of t.
inline BoundCurve exp_dist_curve(const LyapunovParams& p, double r0, double theta, const std::vector<double>& times) {
    return evaluate_curve(times, [&](double t) { return exp_dist_bound(p, r0, t, theta); });
}

/// exp(theta r^2 / 2) bound as a function of t, with its explosion time.
inline BoundCurve exp_sq_curve(const LyapunovParams& p, double r0, double theta, const std::vector<double>& times) {
    BoundCurve curve = evaluate_curve(times, [&](double t) { return exp_sq_bound(p, r0, t, theta); });
    if (theta > 0.0) curve.explosion_point = explosion_time(p, theta);
    return curve;
}

/// CSV with header `param,value,valid`.
inline void write_curve_csv(std::ostream& out, const BoundCurve& curve) {
    out << "param,value,valid\n";
    char buf[96];
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        if (curve.valid[i])
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,1\n", curve.grid[i], curve.values[i]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,nan,0\n", curve.grid[i]);
        out << buf;
    }
}

}  // namespace tubebound::bounds
