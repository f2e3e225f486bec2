#include <catch_amalgamated.hpp>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "tubebound/modelspaces.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace tubebound;
using namespace tubebound::modelspaces;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E[X^p] for X = |r0 e_1 + sqrt(t) Z|^2 in R^k, by quadrature of the
// noncentral chi-square density of X / t.
double chi2_expectation(int k, double ncp, const std::function<double(double)>& g) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double upper = std::pow(std::sqrt(ncp) + 14.0, 2) + 10.0 * k;
    if (ncp == 0.0) {
        boost::math::chi_squared_distribution<double> chi(k);
        return integrator.integrate([&](double x) { return g(x) * boost::math::pdf(chi, x); }, 0.0, upper);
    }
    boost::math::non_central_chi_squared_distribution<double> chi(k, ncp);
    return integrator.integrate([&](double x) { return g(x) * boost::math::pdf(chi, x); }, 0.0, upper);
}

double flat_moment_quadrature(int k, double r0, double t, unsigned p) {
    return std::pow(t, p) * chi2_expectation(k, r0 * r0 / t, [p](double x) { return std::pow(x, p); });
}

// Moments of the unnormalized hyperbolic radial density r sinh(a r) e^{-r^2/2t}.
double h3_moment_quadrature(double kappa, double t, const std::function<double(double)>& g) {
    const double a = std::sqrt(-kappa);
    boost::math::quadrature::tanh_sinh<double> integrator;
    const auto w = [&](double r) { return r * -std::expm1(-2 * a * r) / 2 * std::exp(a * r - r * r / (2 * t)); };
    const double upper = 60.0;  // density below e^{-300} beyond, for the parameters used here
    const double mass = integrator.integrate(w, 0.0, upper);
    return integrator.integrate([&](double r) { return g(r) * w(r); }, 0.0, upper) / mass;
}

double circle_kernel_fourier(double t, double r) {
    double sum = 1.0;
    for (int k = 1; k < 400; ++k) sum += 2.0 * std::exp(-k * k * t / 2.0) * std::cos(k * r);
    return sum / (2.0 * std::numbers::pi);
}

// int_0^t of the Fourier series term by term, using
// sum_k cos(k r) / k^2 = pi^2 / 6 - pi r / 2 + r^2 / 4 on [0, 2 pi].
double circle_local_time_fourier(double t, double r) {
    const double pi = std::numbers::pi;
    double decaying = 0.0;
    for (double k = 1; k < 2000; ++k) decaying += std::exp(-k * k * t / 2.0) * std::cos(k * r) / (k * k);
    return t / (2.0 * pi) + 2.0 / pi * (pi * pi / 6.0 - pi * r / 2.0 + r * r / 4.0 - decaying);
}

}  // namespace

TEST_CASE("scenario factories validate", "[modelspaces]") {
    CHECK_THROWS_AS(flat(3, 3), precondition_error);
    CHECK_THROWS_AS(flat(3, 0, -1.0), precondition_error);
    CHECK_THROWS_AS(circle(4.0), precondition_error);
    CHECK_THROWS_AS(h3(0.0), precondition_error);
    CHECK_THROWS_AS(sphere(1, 1.0), precondition_error);
    CHECK_THROWS_AS(sphere(2, 0.0), precondition_error);
    CHECK(sphere(3, 2.0).r0 == 2.0);
    CHECK(ambient_dim(h3(-1.0)) == 3);
    CHECK(kind_name(circle()) == "circle");
}

TEST_CASE("Lyapunov pairs per scenario", "[modelspaces]") {
    const auto f = lyapunov_params(flat(5, 2));
    CHECK(f.nu == 3.0);
    CHECK(f.lambda == 0.0);
    CHECK(f.exact);
    const auto h = lyapunov_params(h3(-1.0));
    CHECK(h.nu == 3.0);
    CHECK_THAT(h.lambda, WithinRel(2.0 / 3.0, 1e-15));
    const auto s = lyapunov_params(sphere(3, 2.0));
    CHECK_THAT(s.nu, WithinRel(1.0 + 2.0 * 0.5 / 2.0, 1e-15));
    CHECK_THAT(s.lambda, WithinRel(0.5, 1e-15));
    CHECK_THROWS_AS(LyapunovParams(0.5, 0.0), precondition_error);
    CHECK_THROWS_AS(LyapunovParams(1.0, std::nan("")), precondition_error);
}

TEST_CASE("half Laplacian of r^2 against the volume density", "[modelspaces]") {
    // 1/2 Lap f = (1 / 2J) (J f')' for radial f with area density J.
    const auto fd_half_lap = [](auto J, double r) {
        const double h = 1e-4;
        const auto flux = [&](double x) { return J(x) * 2.0 * x; };
        return (flux(r + h) - flux(r - h)) / (2 * h) / (2.0 * J(r));
    };
    const double kappa = -2.0, a = std::sqrt(2.0);
    for (double r : {0.1, 0.7, 2.0}) {
        CHECK_THAT(half_laplacian_r2(h3(kappa), r),
                   WithinRel(fd_half_lap([a](double x) { return std::pow(std::sinh(a * x), 2); }, r), 1e-6));
        // sphere of radius 1.5 in R^4, outside: J = (R + r)^{m-1}
        CHECK_THAT(half_laplacian_r2(sphere(4, 1.5), r),
                   WithinRel(fd_half_lap([](double x) { return std::pow(1.5 + x, 3); }, r), 1e-6));
    }
    CHECK(half_laplacian_r2(flat(4, 1), 3.0) == 3.0);
    CHECK(half_laplacian_r2(h3(-1.0), 0.0) == 3.0);
}

TEST_CASE("master inequality holds on a radial grid", "[modelspaces][property]") {
    for (double kappa : {-0.3, -1.0, -4.0}) {
        const auto s = h3(kappa);
        const auto lp = lyapunov_params(s);
        for (int i = 0; i <= 1000; ++i) {
            const double r = i * 0.01;
            REQUIRE(half_laplacian_r2(s, r) <= lp.nu + lp.lambda * r * r + 1e-12);
        }
    }
    for (int m : {2, 3, 5}) {
        const auto s = sphere(m, 1.3);
        const auto lp = lyapunov_params(s);
        for (int i = 0; i <= 1000; ++i) {
            const double r = i * 0.01;
            REQUIRE(half_laplacian_r2(s, r) <= lp.nu + lp.lambda * r * r + 1e-12);
            if (r < 1.3) REQUIRE(sphere_half_laplacian_inside(s.as<SphereInEuclidean>(), r) <= half_laplacian_r2(s, r));
        }
    }
}

TEST_CASE("flat moments match the noncentral chi-square law", "[modelspaces]") {
    for (int k : {1, 2, 3, 5})
        for (double r0 : {0.0, 0.8, 2.0})
            for (double t : {0.3, 1.0, 2.5})
                for (unsigned p : {1u, 2u, 4u}) {
                    const int m = k + 1;
                    const auto s = flat(m, 1, r0);
                    CHECK_THAT(*exact_moment(s, p, t), WithinRel(flat_moment_quadrature(k, r0, t, p), 1e-8));
                }
    CHECK_THAT(*exact_moment(flat(3, 0), 2, 1.0), WithinRel(15.0, 1e-14));
    CHECK_THAT(*exact_moment(flat(1, 0, 1.0), 2, 1.0), WithinRel(10.0, 1e-14));
}

TEST_CASE("hyperbolic moments match quadrature of the radial law", "[modelspaces]") {
    for (double kappa : {-0.5, -1.0, -3.0})
        for (double t : {0.5, 1.0, 2.0}) {
            CHECK_THAT(*exact_moment(h3(kappa), 1, t), WithinRel(3 * t - kappa * t * t, 1e-13));
            for (unsigned p : {2u, 3u})
                CHECK_THAT(*exact_moment(h3(kappa), p, t),
                           WithinRel(h3_moment_quadrature(kappa, t, [p](double r) { return std::pow(r, 2.0 * p); }),
                                     1e-9));
        }
    CHECK_THAT(*exact_moment(h3(-1.0), 1, 1.0), WithinRel(4.0, 1e-15));
}

TEST_CASE("hyperbolic exponential moment", "[modelspaces]") {
    CHECK_THAT(*exact_exp_moment(h3(-1.0), 0.1, 1.0), WithinRel(1.2381227597035097, 1e-13));
    for (double kappa : {-0.5, -2.0})
        for (double theta : {0.05, 0.3})
            for (double t : {0.5, 1.5}) {
                const double q = h3_moment_quadrature(kappa, t, [theta](double r) { return std::exp(theta * r * r / 2); });
                CHECK_THAT(*exact_exp_moment(h3(kappa), theta, t), WithinRel(q, 1e-9));
            }
    CHECK(*exact_exp_moment(h3(-1.0), 0.0, 1.0) == 1.0);
    CHECK_THROWS_AS(exact_exp_moment(h3(-1.0), 1.0, 1.0), domain_error);
}

TEST_CASE("flat exponential moment against quadrature", "[modelspaces]") {
    for (double r0 : {0.0, 1.2})
        for (double theta : {0.2, 0.7}) {
            const double t = 1.0;
            const double q = chi2_expectation(2, r0 * r0 / t, [&](double x) { return std::exp(theta * t * x / 2); });
            CHECK_THAT(*exact_exp_moment(flat(3, 1, r0), theta, t), WithinRel(q, 1e-8));
        }
    CHECK_THAT(*exact_exp_moment(flat(1, 0), 0.5, 1.0), WithinRel(std::sqrt(2.0), 1e-15));
}

TEST_CASE("circle stationary moments", "[modelspaces]") {
    CHECK_THAT(*exact_moment(circle(), 1, kInf), WithinRel(std::numbers::pi * std::numbers::pi / 3, 1e-15));
    CHECK_FALSE(exact_moment(circle(), 1, 1.0).has_value());
    CHECK_FALSE(exact_moment(sphere(2, 1.0), 1, 1.0).has_value());
}

TEST_CASE("heat kernels", "[modelspaces]") {
    for (double t : {0.05, 0.5, 3.0, 40.0})
        for (double r : {0.0, 1.0, std::numbers::pi})
            CHECK_THAT(*heat_kernel(circle(), t, r), WithinAbs(circle_kernel_fourier(t, r), 1e-13 + 1e-12 * circle_kernel_fourier(t, r)));

    // total mass of the hyperbolic kernel: int p_t(r) 4 pi sinh^2(a r) / a^2 dr = 1
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (double kappa : {-1.0, -2.5})
        for (double t : {0.3, 2.0}) {
            const double a = std::sqrt(-kappa);
            const auto s = h3(kappa);
            const double mass = integrator.integrate(
                [&](double r) {
                    return *heat_kernel(s, t, r) * 4 * std::numbers::pi * std::pow(std::sinh(a * r) / a, 2);
                },
                0.0, 40.0);
            CHECK_THAT(mass, WithinRel(1.0, 1e-10));
        }
    CHECK_FALSE(heat_kernel(flat(2, 0), 1.0, 0.5).has_value());
    CHECK_THROWS_AS(heat_kernel(circle(), 0.0, 0.5), domain_error);
}

TEST_CASE("Revuz mean local time", "[modelspaces]") {
    for (double r0 : {0.0, 1.0, std::numbers::pi})
        for (double t : {1.0, 20.0, 50.0})
            CHECK_THAT(*revuz_mean_local_time(circle(r0), t), WithinRel(circle_local_time_fourier(t, r0), 1e-8));

    // sphere of radius R in R^m from the centre: |S_R| int_0^t (2 pi s)^{-m/2} e^{-R^2/2s} ds
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (int m : {2, 3, 4})
        for (double R : {0.5, 1.0, 2.0}) {
            const double t = 1.0;
            const double area = 2 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0) * std::pow(R, m - 1);
            const double q = integrator.integrate(
                [&](double s) {
                    return s <= 0 ? 0.0 : std::exp(-m / 2.0 * std::log(2 * std::numbers::pi * s) - R * R / (2 * s));
                },
                0.0, t);
            CHECK_THAT(*revuz_mean_local_time(sphere(m, R), t), WithinRel(area * q, 1e-9));
        }
    CHECK_THAT(*revuz_mean_local_time(sphere(2, 1.0), 1.0), WithinRel(0.5597735947761608, 1e-12));
    CHECK_FALSE(revuz_mean_local_time(h3(-1.0), 1.0).has_value());
}

TEST_CASE("scenario serialization round trip", "[modelspaces]") {
    for (const auto& s : {flat(4, 1, 0.25), circle(1.0), h3(-2.0), sphere(3, 1.7)}) {
        const auto back = parse_scenario(format_scenario(s));
        CHECK(format_scenario(back) == format_scenario(s));
        CHECK(back.r0 == s.r0);
        CHECK(back.kind.index() == s.kind.index());
    }
    CHECK(parse_scenario("# comment\nkind = circle\n\nr0=0.5\n").r0 == 0.5);
}

TEST_CASE("scenario parsing errors", "[modelspaces]") {
    CHECK_THROWS_AS(parse_scenario("kind=flat\nfoo=1\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("kind=torus\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("kind=flat\nm=abc\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("kind=flat\nm=2.5\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("kind=h3\nr0=1\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("kind=sphere\nradius=2\nr0=1\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("kind=circle\nr0=9\n"), config_error);
    CHECK_THROWS_AS(parse_scenario("no equals sign\n"), config_error);
}
