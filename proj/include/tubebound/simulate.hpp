// tubebound/simulate.hpp
//
// Samplers for the distance process r_N(X_t): exact one-time draws where the
// law is known, and paths on a uniform grid for path functionals.

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <type_traits>
#include <vector>

#include "tubebound/errors.hpp"
#include "tubebound/modelspaces.hpp"

namespace tubebound::simulate {

using modelspaces::CirclePoint;
using modelspaces::EuclideanAffine;
using modelspaces::HyperbolicH3Point;
using modelspaces::Scenario;
using modelspaces::SphereInEuclidean;

struct PathSample {
    double dt = 0.0;
    std::vector<double> values;  ///< r_N(X_{k dt}), k = 0..K
    Scenario scenario;
    std::uint64_t seed = 0;

    std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
};

namespace detail {

// Signed angle in (-pi, pi].
inline double wrap_angle(double theta) {
    return std::remainder(theta, 2.0 * std::numbers::pi);
}

}  // namespace detail

/// One exact draw of r_N(X_t).
///
/// The hyperbolic radial law from the pole, density proportional to
/// r sinh(sqrt(-kappa) r) exp(-r^2 / 2t), is that of the norm of a 3-d
/// Gaussian with mean sqrt(-kappa) t e_1 and covariance t I.
template <class URBG>
double sample_distance(const Scenario& s, double t, URBG& rng) {
    if (!(t > 0.0)) throw domain_error("sample_distance: t must be positive", t);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(t);

    if (s.is<EuclideanAffine>()) {
        const auto& k = s.as<EuclideanAffine>();
        const double x = s.r0 + sd * normal(rng);
        double sq = x * x;
        for (int i = 1; i < k.m - k.n; ++i) {
            const double y = sd * normal(rng);
            sq += y * y;
        }
        return std::sqrt(sq);
    }
    if (s.is<CirclePoint>()) {
        return std::abs(detail::wrap_angle(s.r0 + sd * normal(rng)));
    }
    if (s.is<HyperbolicH3Point>()) {
        const double mu = std::sqrt(-s.as<HyperbolicH3Point>().kappa) * t;
        const double x = mu + sd * normal(rng);
        const double y = sd * normal(rng);
        const double z = sd * normal(rng);
        return std::sqrt(x * x + y * y + z * z);
    }
    const auto& k = s.as<SphereInEuclidean>();
    double sq = 0.0;
    for (int i = 0; i < k.m; ++i) {
        const double y = sd * normal(rng);
        sq += y * y;
    }
    return std::abs(std::sqrt(sq) - k.radius);
}

namespace detail {

// Geodesic random walk on the hyperboloid model of curvature -1 (time
// rescaled by -kappa). The state is a point of {-x0^2 + |xs|^2 = -1}; each
// step exponentiates an isotropic tangent Gaussian at the pole and carries it
// to the current point with the boost that maps the pole there.
template <class URBG>
void hyperbolic_walk(double kappa, double dt, std::size_t steps, URBG& rng, std::vector<double>& out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double a = std::sqrt(-kappa);
    const double sd = a * std::sqrt(dt);
    double x0 = 1.0;
    std::array<double, 3> xs{0.0, 0.0, 0.0};
    out.push_back(0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        std::array<double, 3> v{sd * normal(rng), sd * normal(rng), sd * normal(rng)};
        const double rho = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        const double y0 = std::cosh(rho);
        const double scale = rho > 0.0 ? std::sinh(rho) / rho : 1.0;
        std::array<double, 3> ys{scale * v[0], scale * v[1], scale * v[2]};
        const double dot = xs[0] * ys[0] + xs[1] * ys[1] + xs[2] * ys[2];
        const double coef = y0 + dot / (1.0 + x0);
        for (int i = 0; i < 3; ++i) xs[i] = xs[i] * coef + ys[i];
        x0 = std::sqrt(1.0 + xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]);
        out.push_back(std::acosh(x0) / a);
    }
}

}  // namespace detail

/// Fill `out` with r_N at times 0, dt, ..., steps * dt. `out` is cleared
/// first; its capacity is reused.
template <class URBG>
void fill_path(const Scenario& s, double dt, std::size_t steps, URBG& rng, std::vector<double>& out) {
    out.clear();
    out.reserve(steps + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(dt);

    if (s.is<CirclePoint>()) {
        double theta = s.r0;
        out.push_back(s.r0);
        for (std::size_t k = 0; k < steps; ++k) {
            theta = detail::wrap_angle(theta + sd * normal(rng));
            out.push_back(std::abs(theta));
        }
        return;
    }
    if (s.is<HyperbolicH3Point>()) {
        detail::hyperbolic_walk(s.as<HyperbolicH3Point>().kappa, dt, steps, rng, out);
        return;
    }

    // Euclidean ambient paths: the normal coordinates of an affine plane, or
    // all coordinates around the sphere centre.
    const bool is_sphere = s.is<SphereInEuclidean>();
    const int dim = is_sphere ? s.as<SphereInEuclidean>().m
                              : s.as<EuclideanAffine>().m - s.as<EuclideanAffine>().n;
    const double radius = is_sphere ? s.as<SphereInEuclidean>().radius : 0.0;
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    if (!is_sphere) x[0] = s.r0;
    const auto distance = [&] {
        double sq = 0.0;
        for (double v : x) sq += v * v;
        return is_sphere ? std::abs(std::sqrt(sq) - radius) : std::sqrt(sq);
    };
    out.push_back(distance());
    for (std::size_t k = 0; k < steps; ++k) {
        for (double& v : x) v += sd * normal(rng);
        out.push_back(distance());
    }
}

inline std::size_t step_count(double dt, double T) {
    if (!(dt > 0.0)) throw precondition_error("sample_path: dt must be positive");
    if (!(dt <= T)) throw precondition_error("sample_path: dt must not exceed T");
    return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

/// Discretized path of r_N(X) on [0, T]. Exact Gaussian increments for the
/// Euclidean and circle scenarios; the hyperbolic scenario uses a weak
/// order-1 geodesic random walk and is meant for cross-checks only.
template <class URBG>
PathSample sample_path(const Scenario& s, double dt, double T, URBG& rng, std::uint64_t seed = 0) {
    PathSample path;
    path.dt = dt;
    path.scenario = s;
    path.seed = seed;
    fill_path(s, dt, step_count(dt, T), rng, path.values);
    return path;
}

// ---------------------------------------------------------------------------
// Binary path dump: per path, a header {magic "TBND", version u32, K u64,
// dt f64} followed by K + 1 little-endian f64 values.

inline constexpr std::uint32_t kDumpVersion = 1;

namespace detail {

template <class T>
void write_le(std::ostream& out, T value) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U bits = std::bit_cast<U>(value);
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(buf, sizeof buf);
}

template <class T>
bool read_le(std::istream& in, T& value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) return false;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
    value = std::bit_cast<T>(bits);
    return true;
}

}  // namespace detail

inline void write_path_dump(std::ostream& out, const PathSample& path) {
    out.write("TBND", 4);
    detail::write_le<std::uint32_t>(out, kDumpVersion);
    detail::write_le<std::uint64_t>(out, path.steps());
    detail::write_le<double>(out, path.dt);
    for (double v : path.values) detail::write_le<double>(out, v);
}

struct DumpedPath {
    double dt = 0.0;
    std::vector<double> values;
};

/// Read every record of a dump stream. Throws config_error on a malformed
/// header.
inline std::vector<DumpedPath> read_path_dump(std::istream& in) {
    std::vector<DumpedPath> paths;
    char magic[4];
    while (in.read(magic, 4)) {
        if (std::memcmp(magic, "TBND", 4) != 0) throw config_error("path dump: bad magic");
        std::uint32_t version = 0;
        std::uint64_t steps = 0;
        DumpedPath p;
        if (!detail::read_le(in, version) || !detail::read_le(in, steps) || !detail::read_le(in, p.dt))
            throw config_error("path dump: truncated header");
        if (version != kDumpVersion) throw config_error("path dump: unsupported version");
        p.values.resize(steps + 1);
        for (auto& v : p.values)
            if (!detail::read_le(in, v)) throw config_error("path dump: truncated values");
        paths.push_back(std::move(p));
    }
    return paths;
}

}  // namespace tubebound::simulate
