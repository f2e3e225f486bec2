// tubebound/specfun.hpp
//
// Special and comparison functions used by the radial moment bounds:
// constant-curvature Jacobi solutions S_k, C_k and their log-derivatives,
// generalized Laguerre polynomials, Kummer's confluent hypergeometric 1F1 and
// the upper incomplete gamma function. Everything here is a pure function.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>

#include "tubebound/errors.hpp"

namespace tubebound::specfun {

struct ComparisonValues {
    double s = 0.0;  ///< S_kappa(t)
    double c = 0.0;  ///< C_kappa(t) = S'_kappa(t)
    double g = 0.0;  ///< d/dt log(S_kappa(t) / t)
    double f = 0.0;  ///< d/dt log(C_kappa(t) + lambda S_kappa(t))
};

namespace detail {

// coth(x) - 1/x, accurate as x -> 0.
inline double coth_minus_inv(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return x * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)));
    }
    return 1.0 / std::tanh(x) - 1.0 / x;
}

// cot(x) - 1/x, accurate as x -> 0.
inline double cot_minus_inv(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return -x * (1.0 / 3.0 + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 / 4725.0)));
    }
    return 1.0 / std::tan(x) - 1.0 / x;
}

inline bool is_nonpositive_integer(double v) {
    return v <= 0.0 && v == std::floor(v);
}

}  // namespace detail

/// S, C, G and F for curvature `kappa` and principal curvature `lambda` at
/// t > 0. G and F come from their closed-form derivatives. Throws
/// domain_error when S(t) <= 0 (kappa > 0 beyond the first conjugate point)
/// or C(t) + lambda S(t) <= 0.
inline ComparisonValues comparison(double kappa, double lambda, double t) {
    if (!(t > 0.0)) throw domain_error("comparison: t must be positive", t);

    ComparisonValues out;
    if (kappa == 0.0) {
        out.s = t;
        out.c = 1.0;
        out.g = 0.0;
        const double denom = 1.0 + lambda * t;
        if (!(denom > 0.0)) throw domain_error("comparison: C + lambda S <= 0", denom);
        out.f = lambda / denom;
        return out;
    }

    const double a = std::sqrt(std::abs(kappa));
    const double x = a * t;
    if (kappa < 0.0) {
        out.s = std::sinh(x) / a;
        out.c = std::cosh(x);
        out.g = a * detail::coth_minus_inv(x);
        // Work with tanh so that large t does not overflow.
        const double th = std::tanh(x);
        const double denom = 1.0 + (lambda / a) * th;
        if (!(denom > 0.0)) throw domain_error("comparison: C + lambda S <= 0", denom);
        out.f = (a * th + lambda) / denom;
        return out;
    }

    out.s = std::sin(x) / a;
    out.c = std::cos(x);
    if (!(out.s > 0.0)) throw domain_error("comparison: S_kappa(t) <= 0", out.s);
    out.g = a * detail::cot_minus_inv(x);
    const double denom = out.c + lambda * out.s;
    if (!(denom > 0.0)) throw domain_error("comparison: C + lambda S <= 0", denom);
    out.f = (-kappa * out.s + lambda * out.c) / denom;
    return out;
}

/// Generalized Laguerre polynomial L^alpha_p(z) by the three-term recurrence
/// in p.
inline double laguerre(unsigned p, double alpha, double z) {
    if (!(alpha > -1.0)) throw precondition_error("laguerre: alpha must exceed -1");
    double prev = 1.0;
    if (p == 0) return prev;
    double cur = 1.0 + alpha - z;
    for (unsigned k = 1; k < p; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - z) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

struct KummerResult {
    double value = 0.0;
    double tail = 0.0;  ///< value - 1, summed without the leading 1
    std::size_t terms = 0;
    bool converged = false;
};

inline constexpr std::size_t kKummerMaxTerms = 100000;

/// Term-ratio summation of 1F1(a; b; z). Never throws on non-convergence
/// or overflow; inspect `converged`. Negative z with a non-terminating series goes
/// through the Kummer transform e^z 1F1(b-a; b; -z).
inline KummerResult kummer_series(double a, double b, double z,
                                  std::size_t max_terms = kKummerMaxTerms) {
    if (detail::is_nonpositive_integer(b))
        throw precondition_error("kummer: b must not be a non-positive integer");

    if (z < 0.0 && !detail::is_nonpositive_integer(a)) {
        KummerResult r = kummer_series(b - a, b, -z, max_terms);
        r.tail = std::expm1(z) + std::exp(z) * r.tail;
        r.value *= std::exp(z);
        return r;
    }

    KummerResult r;
    double tail = 0.0;
    double term = 1.0;
    for (std::size_t k = 0; k < max_terms; ++k) {
        const double ratio = (a + k) * z / ((b + k) * (k + 1.0));
        term *= ratio;
        tail += term;
        r.terms = k + 1;
        if (!std::isfinite(tail)) break;  // overflow: reported as not converged
        if (term == 0.0 || (std::abs(term) < 1e-16 * std::abs(1.0 + tail) && std::abs(ratio) < 1.0)) {
            r.converged = true;
            break;
        }
    }
    r.tail = tail;
    r.value = 1.0 + tail;
    return r;
}

/// 1F1(a; b; z). Throws convergence_error when the series cap is reached.
inline double kummer(double a, double b, double z) {
    const KummerResult r = kummer_series(a, b, z);
    if (!r.converged) throw convergence_error("kummer: series did not converge", r.terms);
    return r.value;
}

namespace detail {

// Lower incomplete gamma gamma(a, x) by power series, a > 0.
inline double lower_gamma_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x));
}

// Upper incomplete gamma by modified Lentz continued fraction; valid for
// a >= 0 when x is comfortably beyond the series region.
inline double upper_gamma_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x)) * h;
}

// Ein(x) = sum_{k>=1} (-1)^{k+1} x^k / (k k!), the entire part of E1.
inline double ein(double x) {
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        const double add = -term / k;
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace detail

/// Gamma(a, x) = int_x^inf s^{a-1} e^{-s} ds for a, x >= 0.
inline double upper_gamma(double a, double x) {
    if (a < 0.0) throw domain_error("upper_gamma: a must be non-negative", a);
    if (x < 0.0) throw domain_error("upper_gamma: x must be non-negative", x);
    if (a == 0.0 && x == 0.0) throw domain_error("upper_gamma: Gamma(0, 0) diverges", x);
    if (x == 0.0) return std::tgamma(a);

    if (a == 0.0) {
        if (x >= 1.0) return detail::upper_gamma_cf(0.0, x);
        // E1(x) = E1(1) - Ein(1) - log x + Ein(x); the constant pair is
        // evaluated rather than hard-coded so that no literal Euler constant
        // enters the result.
        return detail::upper_gamma_cf(0.0, 1.0) - detail::ein(1.0) - std::log(x) + detail::ein(x);
    }

    if (x < a + 1.0) return std::tgamma(a) - detail::lower_gamma_series(a, x);
    return detail::upper_gamma_cf(a, x);
}

/// Log of Gamma(alpha + 1 + p) / Gamma(alpha + 1).
inline double log_gamma_ratio(double alpha, unsigned p) {
    return std::lgamma(alpha + 1.0 + p) - std::lgamma(alpha + 1.0);
}

/// Right-hand side of the crude Laguerre bound
/// p! L^alpha_p(-z) <= (12 (1 + z))^p Gamma(alpha + 1 + p) / Gamma(alpha + 1).
inline double lemma_laguerre_rhs(unsigned p, double alpha, double z) {
    if (p == 0) return 1.0;
    return std::exp(p * std::log(12.0 * (1.0 + z)) + log_gamma_ratio(alpha, p));
}

}  // namespace tubebound::specfun
