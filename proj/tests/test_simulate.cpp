#include <catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tubebound/modelspaces.hpp"
#include "tubebound/rng.hpp"
#include "tubebound/simulate.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace tubebound;
using namespace tubebound::simulate;

namespace {

rng::Accumulator mean_of(std::uint64_t n, std::uint64_t seed, const auto& f) {
    rng::Accumulator acc;
    auto e = rng::stream(seed, 0);
    for (std::uint64_t i = 0; i < n; ++i) acc.push(f(e));
    return acc;
}

// sup |F1 - F2| over two sorted samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("exact samplers match known moments", "[simulate]") {
    const auto flat3 = modelspaces::flat(3, 0);
    auto acc = mean_of(100000, 1, [&](auto& e) { const double r = sample_distance(flat3, 1.0, e); return r * r; });
    CHECK_THAT(acc.mean, WithinAbs(3.0, 4 * acc.stderr_of_mean()));

    const auto shifted = modelspaces::flat(2, 1, 1.5);
    acc = mean_of(100000, 2, [&](auto& e) { const double r = sample_distance(shifted, 0.5, e); return r * r; });
    CHECK_THAT(acc.mean, WithinAbs(2.25 + 0.5, 4 * acc.stderr_of_mean()));

    // sphere of radius 1 in R^2: |B_t| - 1 with |B_t| Rayleigh, E |B_t|^2 = 2t
    const auto sph = modelspaces::sphere(2, 1.0);
    acc = mean_of(100000, 3, [&](auto& e) { const double r = sample_distance(sph, 1.0, e); return r * r; });
    CHECK_THAT(acc.mean, WithinAbs(2.0 - 2.0 * std::sqrt(std::numbers::pi / 2) + 1.0, 4 * acc.stderr_of_mean()));

    rng::Engine e;
    CHECK_THROWS_AS(sample_distance(flat3, 0.0, e), domain_error);
}

TEST_CASE("circle distance approaches the uniform law", "[simulate]") {
    const auto c = modelspaces::circle(0.0);
    auto acc = mean_of(20000, 4, [&](auto& e) {
        const double r = sample_distance(c, 100.0, e);
        REQUIRE(r >= 0.0);
        REQUIRE(r <= std::numbers::pi);
        return r > std::numbers::pi / 2 ? 1.0 : 0.0;
    });
    CHECK_THAT(acc.mean, WithinAbs(0.5, 3 * acc.stderr_of_mean()));
}

TEST_CASE("one-sample KS against the chi-square law", "[simulate]") {
    const auto flat3 = modelspaces::flat(3, 0);
    auto e = rng::stream(5, 0);
    std::vector<double> x(10000);
    for (auto& v : x) v = sample_distance(flat3, 2.0, e);
    std::sort(x.begin(), x.end());
    boost::math::chi_squared_distribution<double> chi3(3);
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = boost::math::cdf(chi3, x[i] * x[i] / 2.0);
        d = std::max({d, std::abs(f - double(i) / x.size()), std::abs(f - double(i + 1) / x.size())});
    }
    CHECK(d < 1.628 / std::sqrt(10000.0));
}

TEST_CASE("endpoints of paths agree with exact draws", "[simulate]") {
    for (const auto& s : {modelspaces::flat(3, 0), modelspaces::flat(2, 1, 0.7)}) {
        const std::size_t n = 10000;
        std::vector<double> exact(n), ends(n);
        auto e1 = rng::stream(6, 0);
        for (auto& v : exact) v = sample_distance(s, 1.0, e1);
        for (std::size_t i = 0; i < n; ++i) {
            auto e2 = rng::stream(7, i);
            ends[i] = sample_path(s, 0.02, 1.0, e2).values.back();
        }
        CHECK(ks_two_sample(exact, ends) < 1.628 * std::sqrt(2.0 / n));
    }
}

TEST_CASE("hyperbolic sampler reproduces the exact moments", "[simulate]") {
    for (double kappa : {-1.0, -0.25})
        for (double t : {0.5, 2.0}) {
            const auto s = modelspaces::h3(kappa);
            rng::Accumulator m2, m4;
            auto e = rng::stream(8, 0);
            for (int i = 0; i < 100000; ++i) {
                const double r2 = std::pow(sample_distance(s, t, e), 2);
                m2.push(r2);
                m4.push(r2 * r2);
            }
            const double want2 = 3 * t - kappa * t * t;
            const double want4 = 15 * t * t - 10 * kappa * t * t * t + kappa * kappa * t * t * t * t;
            CHECK_THAT(m2.mean, WithinAbs(want2, 4 * m2.stderr_of_mean()));
            CHECK_THAT(m4.mean, WithinAbs(want4, 4 * m4.stderr_of_mean()));
        }
}

TEST_CASE("hyperbolic random walk agrees with the exact sampler", "[simulate]") {
    const auto s = modelspaces::h3(-1.0);
    rng::Accumulator walk;
    for (int i = 0; i < 4000; ++i) {
        auto e = rng::stream(9, i);
        const double r = sample_path(s, 0.01, 1.0, e).values.back();
        walk.push(r * r);
    }
    // weak order 1: allow an O(dt) bias on top of the noise
    CHECK_THAT(walk.mean, WithinAbs(4.0, 4 * walk.stderr_of_mean() + 0.1));
}

TEST_CASE("first exit time from (-1, 1)", "[simulate]") {
    const double dt = 1e-4;
    rng::Accumulator tau;
    for (int i = 0; i < 10000; ++i) {
        auto e = rng::stream(10, i);
        std::normal_distribution<double> normal;
        double x = 0.0, t = 0.0;
        while (std::abs(x) < 1.0) {
            x += std::sqrt(dt) * normal(e);
            t += dt;
        }
        tau.push(t);
    }
    CHECK_THAT(tau.mean, WithinRel(1.0, 0.05));
}

TEST_CASE("circle paths stay in [0, pi]", "[simulate][property]") {
    for (double r0 : {0.0, 1.0, std::numbers::pi}) {
        auto e = rng::stream(11, 0);
        const auto p = sample_path(modelspaces::circle(r0), 0.05, 50.0, e);
        REQUIRE(p.values.front() == r0);
        REQUIRE(p.steps() == 1000);
        for (double v : p.values) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= std::numbers::pi);
        }
    }
}

TEST_CASE("paths are deterministic per stream", "[simulate]") {
    const auto s = modelspaces::sphere(3, 2.0);
    auto e1 = rng::stream(12, 3), e2 = rng::stream(12, 3), e3 = rng::stream(12, 4);
    const auto a = sample_path(s, 0.01, 1.0, e1), b = sample_path(s, 0.01, 1.0, e2), c = sample_path(s, 0.01, 1.0, e3);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.values.front() == 2.0);  // starts at the centre
    CHECK_THROWS_AS(sample_path(s, 0.0, 1.0, e1), precondition_error);
    CHECK_THROWS_AS(sample_path(s, 2.0, 1.0, e1), precondition_error);
    CHECK(step_count(0.1, 1.0) == 10);
}

TEST_CASE("path dump round trip", "[simulate]") {
    std::stringstream buf;
    std::vector<PathSample> written;
    for (int i = 0; i < 3; ++i) {
        auto e = rng::stream(13, i);
        written.push_back(sample_path(modelspaces::circle(0.5), 0.1, 1.0 + i, e));
        write_path_dump(buf, written.back());
    }
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "TBND");
    // header: magic, u32 version = 1 little-endian, u64 K = 10
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 10);
    CHECK(bytes.size() == 3 * 24 + 8 * (11 + 21 + 31));

    std::istringstream in(bytes);
    const auto read = read_path_dump(in);
    REQUIRE(read.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(read[i].dt == 0.1);
        CHECK(read[i].values == written[i].values);
    }
}

TEST_CASE("path dump rejects malformed input", "[simulate]") {
    std::stringstream buf;
    auto e = rng::stream(14, 0);
    write_path_dump(buf, sample_path(modelspaces::flat(1, 0), 0.5, 1.0, e));
    const std::string good = buf.str();

    std::string bad = good;
    bad[0] = 'X';
    std::istringstream in1(bad);
    CHECK_THROWS_AS(read_path_dump(in1), config_error);

    bad = good;
    bad[4] = 2;
    std::istringstream in2(bad);
    CHECK_THROWS_AS(read_path_dump(in2), config_error);

    std::istringstream in3(good.substr(0, good.size() - 3));
    CHECK_THROWS_AS(read_path_dump(in3), config_error);

    std::istringstream in4(good.substr(0, 10));
    CHECK_THROWS_AS(read_path_dump(in4), config_error);

    std::istringstream empty("");
    CHECK(read_path_dump(empty).empty());
}
