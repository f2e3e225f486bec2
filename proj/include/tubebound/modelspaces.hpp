// tubebound/modelspaces.hpp
//
// Model (M, N, start point) scenarios with closed-form geometry: Lyapunov
// pairs (nu, lambda) for the master inequality 1/2 Lap r_N^2 <= nu + lambda r_N^2,
// heat kernels, exact radial moments and moment generating functions, and the
// Revuz formula for the mean local time.

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tubebound/errors.hpp"
#include "tubebound/specfun.hpp"

namespace tubebound::modelspaces {

/// Affine n-plane in R^m; the start point sits at distance r0 from it.
struct EuclideanAffine {
    int m = 1;
    int n = 0;
};

/// A point N on the unit circle; the start point sits at arc distance r0.
struct CirclePoint {};

/// A point of the hyperbolic 3-space of curvature kappa < 0; the Brownian
/// motion starts at N (r0 = 0).
struct HyperbolicH3Point {
    double kappa = -1.0;
};

/// Round sphere of the given radius in R^m; the Brownian motion starts at
/// the centre, so r0 = radius.
struct SphereInEuclidean {
    int m = 2;
    double radius = 1.0;
};

using ScenarioKind = std::variant<EuclideanAffine, CirclePoint, HyperbolicH3Point, SphereInEuclidean>;

struct Scenario {
    ScenarioKind kind;
    double r0 = 0.0;

    template <class K>
    bool is() const { return std::holds_alternative<K>(kind); }

    template <class K>
    const K& as() const { return std::get<K>(kind); }
};

inline Scenario flat(int m, int n, double r0 = 0.0) {
    if (m < 1 || n < 0 || n > m - 1)
        throw precondition_error("flat scenario requires 0 <= n <= m - 1");
    if (!(r0 >= 0.0)) throw precondition_error("flat scenario requires r0 >= 0");
    return Scenario{EuclideanAffine{m, n}, r0};
}

inline Scenario circle(double r0 = 0.0) {
    if (!(r0 >= 0.0 && r0 <= std::numbers::pi))
        throw precondition_error("circle scenario requires r0 in [0, pi]");
    return Scenario{CirclePoint{}, r0};
}

inline Scenario h3(double kappa) {
    if (!(kappa < 0.0)) throw precondition_error("hyperbolic scenario requires kappa < 0");
    return Scenario{HyperbolicH3Point{kappa}, 0.0};
}

inline Scenario sphere(int m, double radius) {
    if (m < 2) throw precondition_error("sphere scenario requires m >= 2");
    if (!(radius > 0.0)) throw precondition_error("sphere scenario requires radius > 0");
    return Scenario{SphereInEuclidean{m, radius}, radius};
}

/// Ambient dimension of M.
inline int ambient_dim(const Scenario& s) {
    return std::visit(
        [](const auto& k) -> int {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EuclideanAffine>) return k.m;
            else if constexpr (std::is_same_v<K, CirclePoint>) return 1;
            else if constexpr (std::is_same_v<K, HyperbolicH3Point>) return 3;
            else return k.m;
        },
        s.kind);
}

inline std::string kind_name(const Scenario& s) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EuclideanAffine>) return "flat";
            else if constexpr (std::is_same_v<K, CirclePoint>) return "circle";
            else if constexpr (std::is_same_v<K, HyperbolicH3Point>) return "h3";
            else return "sphere";
        },
        s.kind);
}

// ---------------------------------------------------------------------------
// Lyapunov pairs

struct LyapunovParams {
    double nu = 1.0;
    double lambda = 0.0;
    bool exact = false;  ///< master inequality holds with equality

    LyapunovParams() = default;
    LyapunovParams(double nu_, double lambda_, bool exact_ = false)
        : nu(nu_), lambda(lambda_), exact(exact_) {
        if (!(nu >= 1.0)) throw precondition_error("LyapunovParams: nu must be >= 1");
        if (!std::isfinite(lambda)) throw precondition_error("LyapunovParams: lambda must be finite");
    }
};

/// Turn the curvature estimate
///   1/2 Lap r^2 <= (m - n) + (n Lambda + (m - 1) C1) r + (m - 1) C2 r^2
/// into a pure (nu, lambda) pair using c r <= c (1 + r^2) / 2.
inline LyapunovParams absorb_linear_term(int m, int n, double Lambda, double C1, double C2) {
    const double c = n * Lambda + (m - 1) * C1;
    return LyapunovParams((m - n) + c / 2.0, (m - 1) * C2 + c / 2.0, false);
}

inline LyapunovParams lyapunov_params(const Scenario& s) {
    return std::visit(
        [](const auto& k) -> LyapunovParams {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EuclideanAffine>) {
                return LyapunovParams(k.m - k.n, 0.0, true);
            } else if constexpr (std::is_same_v<K, CirclePoint>) {
                return LyapunovParams(1.0, 0.0, false);
            } else if constexpr (std::is_same_v<K, HyperbolicH3Point>) {
                // Ricci bound R = (m - 1) kappa with 1/2 Lap r^2 <= m - R r^2 / 3.
                const double ricci = 2.0 * k.kappa;
                return LyapunovParams(3.0, -ricci / 3.0, false);
            } else {
                return absorb_linear_term(k.m, k.m - 1, 1.0 / k.radius, 0.0, 0.0);
            }
        },
        s.kind);
}

/// Closed form of 1/2 Lap r_N^2 at distance r from N (off the cut locus).
/// For the sphere this is the outer side of the tube, which dominates the
/// inner side; use `sphere_half_laplacian_inside` for the other branch.
inline double half_laplacian_r2(const Scenario& s, double r) {
    return std::visit(
        [r](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EuclideanAffine>) {
                return k.m - k.n;
            } else if constexpr (std::is_same_v<K, CirclePoint>) {
                return 1.0;
            } else if constexpr (std::is_same_v<K, HyperbolicH3Point>) {
                const double a = std::sqrt(-k.kappa);
                if (r == 0.0) return 3.0;
                return 1.0 + 2.0 * a * r / std::tanh(a * r);
            } else {
                return 1.0 + (k.m - 1) * r / (k.radius + r);
            }
        },
        s.kind);
}

inline double sphere_half_laplacian_inside(const SphereInEuclidean& k, double r) {
    return 1.0 - (k.m - 1) * r / (k.radius - r);
}

// ---------------------------------------------------------------------------
// Closed forms

namespace detail {

inline double double_factorial_odd(int j) {  // (j - 1)!! for even j
    double v = 1.0;
    for (int i = j - 1; i > 1; i -= 2) v *= i;
    return v;
}

inline double binomial(int n, int k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

inline double log_sinh(double x) {
    if (x < 20.0) return std::log(std::sinh(x));
    return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

}  // namespace detail

/// E[r^{2p}] for the hyperbolic scenario started at N. The radial law is
/// that of |Y| under the size-biased measure y dN(mu, t)(y) / mu with
/// mu = sqrt(-kappa) t, so E r^{2p} = E[Y^{2p+1}] / mu, expanded in
/// Gaussian central moments.
inline double h3_even_moment(double kappa, unsigned p, double t) {
    const double mu = std::sqrt(-kappa) * t;
    const int q = 2 * static_cast<int>(p) + 1;
    double sum = 0.0;
    for (int j = 0; j < q; j += 2) {
        sum += detail::binomial(q, j) * std::pow(mu, q - 1 - j) * std::pow(t, j / 2) *
               detail::double_factorial_odd(j);
    }
    return sum;
}

/// Exact E[r_N^{2p}(X_t)] where a closed form exists. Passing
/// t = +infinity on the circle returns the stationary value pi^{2p} / (2p + 1).
inline std::optional<double> exact_moment(const Scenario& s, unsigned p, double t) {
    if (!(t > 0.0)) throw domain_error("exact_moment: t must be positive", t);
    if (p == 0) return 1.0;
    if (s.is<EuclideanAffine>()) {
        if (std::isinf(t)) return std::nullopt;
        const auto& k = s.as<EuclideanAffine>();
        const double alpha = (k.m - k.n) / 2.0 - 1.0;
        const double log_pref = p * std::log(2.0 * t) + std::lgamma(p + 1.0);
        return std::exp(log_pref) * specfun::laguerre(p, alpha, -s.r0 * s.r0 / (2.0 * t));
    }
    if (s.is<HyperbolicH3Point>()) {
        if (std::isinf(t)) return std::nullopt;
        return h3_even_moment(s.as<HyperbolicH3Point>().kappa, p, t);
    }
    if (s.is<CirclePoint>() && std::isinf(t)) {
        return std::pow(std::numbers::pi, 2.0 * p) / (2.0 * p + 1.0);
    }
    return std::nullopt;
}

/// Exact E[exp(theta r_N^2(X_t) / 2)] where a closed form exists.
inline std::optional<double> exact_exp_moment(const Scenario& s, double theta, double t) {
    if (!(t > 0.0)) throw domain_error("exact_exp_moment: t must be positive", t);
    if (theta == 0.0) return 1.0;
    const double x = theta * t;
    if (s.is<EuclideanAffine>()) {
        if (x >= 1.0) throw domain_error("exact_exp_moment: theta t must be < 1", x);
        const auto& k = s.as<EuclideanAffine>();
        return std::exp(-(k.m - k.n) / 2.0 * std::log1p(-x) + theta * s.r0 * s.r0 / (2.0 * (1.0 - x)));
    }
    if (s.is<HyperbolicH3Point>()) {
        if (x >= 1.0) throw domain_error("exact_exp_moment: theta t must be < 1", x);
        const double kappa = s.as<HyperbolicH3Point>().kappa;
        return std::exp(-1.5 * std::log1p(-x) - theta * kappa * t * t / (2.0 * (1.0 - x)));
    }
    return std::nullopt;
}

/// Number of wrapped images kept on each side for the circle heat kernel.
inline int circle_image_count(double t) {
    return static_cast<int>(std::ceil(6.0 * std::sqrt(t) / (2.0 * std::numbers::pi))) + 2;
}

/// Transition density p_t(x, y) as a function of d(x, y) = r.
inline std::optional<double> heat_kernel(const Scenario& s, double t, double r) {
    if (!(t > 0.0)) throw domain_error("heat_kernel: t must be positive", t);
    if (s.is<HyperbolicH3Point>()) {
        if (r < 0.0) throw domain_error("heat_kernel: r must be non-negative", r);
        const double kappa = s.as<HyperbolicH3Point>().kappa;
        const double a = std::sqrt(-kappa);
        const double x = a * r;
        const double log_theta_inv_sqrt = (x == 0.0) ? 0.0 : std::log(x) - detail::log_sinh(x);
        return std::exp(log_theta_inv_sqrt - 1.5 * std::log(2.0 * std::numbers::pi * t) -
                        r * r / (2.0 * t) + kappa * t / 2.0);
    }
    if (s.is<CirclePoint>()) {
        if (r < 0.0 || r > std::numbers::pi) throw domain_error("heat_kernel: circle r must lie in [0, pi]", r);
        const int images = circle_image_count(t);
        const double log_pref = -0.5 * std::log(2.0 * std::numbers::pi * t);
        double sum = 0.0;
        for (int k = -images; k <= images; ++k) {
            const double d = r + 2.0 * std::numbers::pi * k;
            sum += std::exp(log_pref - d * d / (2.0 * t));
        }
        return sum;
    }
    return std::nullopt;
}

/// Mean local time E[L^N_t] from the Revuz formula int_0^t int_N p_s ds.
inline std::optional<double> revuz_mean_local_time(const Scenario& s, double t) {
    if (!(t > 0.0)) throw domain_error("revuz_mean_local_time: t must be positive", t);
    if (s.is<SphereInEuclidean>()) {
        const auto& k = s.as<SphereInEuclidean>();
        const double r = k.radius;
        return r * specfun::upper_gamma(k.m / 2.0 - 1.0, r * r / (2.0 * t)) / std::tgamma(k.m / 2.0);
    }
    if (s.is<CirclePoint>()) {
        if (std::isinf(t)) throw domain_error("revuz_mean_local_time: circle needs finite t", t);
        boost::math::quadrature::tanh_sinh<double> integrator;
        const auto f = [&s](double u) {
            if (!(u > 0.0)) return 0.0;
            return *heat_kernel(s, u, s.r0);
        };
        return integrator.integrate(f, 0.0, t, 1e-12);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Flat key=value serialization

namespace detail {

inline std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("scenario: bad number for '" + key + "': " + v);
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    const double d = parse_real(key, v);
    if (d != std::floor(d)) throw config_error("scenario: '" + key + "' must be an integer");
    return static_cast<int>(d);
}

}  // namespace detail

/// Serialize as `key=value` lines. Keys: kind, m, n, kappa, radius, r0.
inline std::string format_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "kind=" << kind_name(s) << '\n';
    std::visit(
        [&out](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EuclideanAffine>) {
                out << "m=" << k.m << '\n' << "n=" << k.n << '\n';
            } else if constexpr (std::is_same_v<K, HyperbolicH3Point>) {
                out << "kappa=" << detail::fmt_real(k.kappa) << '\n';
            } else if constexpr (std::is_same_v<K, SphereInEuclidean>) {
                out << "m=" << k.m << '\n' << "radius=" << detail::fmt_real(k.radius) << '\n';
            }
        },
        s.kind);
    out << "r0=" << detail::fmt_real(s.r0) << '\n';
    return out.str();
}

/// Build a scenario from already-split fields. Unknown keys are errors;
/// missing keys take the defaults flat m=1 n=0, kappa=-1, radius=1, r0=0.
inline Scenario scenario_from_fields(const std::map<std::string, std::string>& fields) {
    static const char* known[] = {"kind", "m", "n", "kappa", "radius", "r0"};
    for (const auto& [key, _] : fields) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw config_error("scenario: unknown key '" + key + "'");
    }
    const auto get = [&fields](const char* key) -> std::optional<std::string> {
        auto it = fields.find(key);
        if (it == fields.end()) return std::nullopt;
        return it->second;
    };
    const std::string kind = get("kind").value_or("flat");
    const double r0 = get("r0") ? detail::parse_real("r0", *get("r0")) : 0.0;
    try {
        if (kind == "flat") {
            const int m = get("m") ? detail::parse_int("m", *get("m")) : 1;
            const int n = get("n") ? detail::parse_int("n", *get("n")) : 0;
            return flat(m, n, r0);
        }
        if (kind == "circle") return circle(r0);
        if (kind == "h3") {
            if (r0 != 0.0) throw config_error("scenario: h3 starts at N, r0 must be 0");
            return h3(get("kappa") ? detail::parse_real("kappa", *get("kappa")) : -1.0);
        }
        if (kind == "sphere") {
            const int m = get("m") ? detail::parse_int("m", *get("m")) : 2;
            const double radius = get("radius") ? detail::parse_real("radius", *get("radius")) : 1.0;
            if (get("r0") && r0 != radius) throw config_error("scenario: sphere starts at the centre, r0 must equal radius");
            return sphere(m, radius);
        }
    } catch (const precondition_error& e) {
        throw config_error(std::string("scenario: ") + e.what());
    }
    throw config_error("scenario: unknown kind '" + kind + "'");
}

/// Parse `key=value` lines; blank lines and lines starting with '#' are
/// skipped.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> fields;
    std::istringstream in{std::string(text)};
    std::string line;
    const auto trim = [](std::string v) {
        const auto b = v.find_first_not_of(" \t\r");
        const auto e = v.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("expected key=value, got '" + line + "'");
        fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return fields;
}

inline Scenario parse_scenario(std::string_view text) {
    return scenario_from_fields(parse_key_values(text));
}

}  // namespace tubebound::modelspaces
