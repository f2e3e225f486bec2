// tubebound/acceptance.hpp
//
// The fourteen end-to-end acceptance checks, shared by `tubebound verify` and
// the acceptance test binary. Each check compares a library value against a
// closed form or Monte Carlo truth with a pinned tolerance.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tubebound/bounds.hpp"
#include "tubebound/estimate.hpp"
#include "tubebound/modelspaces.hpp"
#include "tubebound/specfun.hpp"

namespace tubebound::acceptance {

struct Options {
    bool quick = false;  ///< n = 1e4 draws, fewer and coarser paths
    std::uint64_t seed = 12345;
    unsigned partitions = 8;
    unsigned threads = 0;
};

struct Result {
    int id = 0;
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double expected = 0.0;
    std::string detail;
};

namespace detail {

inline std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

inline estimate::RunOptions run_options(const Options& o, int id) {
    return {o.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(id)), o.partitions, o.threads};
}

inline std::uint64_t draws(const Options& o) { return o.quick ? 10000 : 100000; }

struct PathPlan {
    std::uint64_t paths;
    double dt;
};

inline PathPlan path_plan(const Options& o, double full_dt) {
    return o.quick ? PathPlan{2000, std::max(full_dt, 1e-3)} : PathPlan{10000, full_dt};
}

inline bool within_stderr(const estimate::MCEstimate& e, double truth, double k = 3.0) {
    return std::abs(e.mean - truth) <= k * e.std_error;
}

inline bool within_rel(double v, double truth, double tol) { return std::abs(v - truth) <= tol * std::abs(truth); }

// E[(X / t)^p] for X / t noncentral chi-square with k degrees of freedom and
// noncentrality ncp, from the cumulants 2^{j-1} (j-1)! (k + j ncp).
inline double noncentral_chi2_moment(int k, double ncp, unsigned p) {
    std::vector<double> kappa(p + 1), mu(p + 1);
    double fact = 1.0;
    for (unsigned j = 1; j <= p; ++j) {
        if (j > 1) fact *= j - 1;
        kappa[j] = std::ldexp(fact, static_cast<int>(j) - 1) * (k + j * ncp);
    }
    mu[0] = 1.0;
    for (unsigned n = 1; n <= p; ++n) {
        double s = 0.0;
        double binom = 1.0;  // C(n-1, j-1)
        for (unsigned j = 1; j <= n; ++j) {
            s += binom * kappa[j] * mu[n - j];
            binom = binom * (n - j) / j;
        }
        mu[n] = s;
    }
    return mu[p];
}

// P{|Z| >= r} for a standard Gaussian in R^3.
inline double chi3_tail(double r) {
    return std::erfc(r / std::numbers::sqrt2) + std::sqrt(2.0 / std::numbers::pi) * r * std::exp(-r * r / 2.0);
}

}  // namespace detail

inline Result explosion_times(const Options&) {
    const auto t1 = *bounds::explosion_time({3.0, 1.0 / 3.0}, 1.0 / 6.0);
    const auto t2 = *bounds::explosion_time({3.0, 0.0}, 1.0 / 6.0);
    const double e1 = 3.0 * std::log(3.0);
    const double err = std::max(std::abs(t1 - e1), std::abs(t2 - 6.0));
    return {1, "explosion times", err <= 1e-8, t1, e1,
            detail::fmt("t*(lambda=1/3)=%.12f vs %.12f, t*(lambda=0)=%.12f vs 6", t1, e1, t2)};
}

inline Result h3_second_moment(const Options& o) {
    const auto s = modelspaces::h3(-1.0);
    const modelspaces::LyapunovParams lp(3.0, 2.0 / 3.0);
    Result r{2, "H3 second moment", true, 0, 0, ""};
    for (double t : {0.5, 1.0, 2.0}) {
        const auto e = estimate::mc_moment(s, 1, t, detail::draws(o), detail::run_options(o, 2));
        const double truth = 3.0 * t + t * t;
        const double bound = bounds::second_moment_bound(lp, 0.0, t);
        const bool ok = detail::within_stderr(e, truth) && e.mean <= bound && truth <= bound;
        if (!ok || t == 2.0) {
            r.observed = e.mean;
            r.expected = truth;
            r.detail = detail::fmt("t=%g: mc %.5f +- %.5f vs exact %.5f, bound %.5f", t, e.mean, e.std_error, truth,
                                   bound);
        }
        if (!ok) {
            r.pass = false;
            break;
        }
    }
    return r;
}

inline Result flat_equality(const Options&) {
    Result r{3, "flat equality", true, 0, 0, ""};
    double worst = 0.0;
    for (int k : {1, 2, 3})
        for (double r0 : {0.0, 1.0})
            for (double t : {0.5, 1.0, 2.0}) {
                const modelspaces::LyapunovParams lp(k, 0.0, true);
                for (unsigned p : {1u, 2u, 3u}) {
                    const double truth = std::pow(t, p) * detail::noncentral_chi2_moment(k, r0 * r0 / t, p);
                    const double got = bounds::even_moment_bound(lp, r0, t, p);
                    const double rel = std::abs(got - truth) / truth;
                    if (rel > worst) {
                        worst = rel;
                        r.observed = got;
                        r.expected = truth;
                        r.detail = detail::fmt("worst: k=%d r0=%g t=%g p=%u moment %.15g vs %.15g", k, r0, t, p, got,
                                               truth);
                    }
                }
                for (double x : {0.1, 0.5, 0.9}) {
                    const double theta = x / t;
                    // noncentral chi-square MGF at s = theta t / 2
                    const double s = theta * t / 2.0;
                    const double ncp = r0 * r0 / t;
                    const double truth = std::pow(1.0 - 2.0 * s, -k / 2.0) * std::exp(ncp * s / (1.0 - 2.0 * s));
                    const double got = bounds::exp_sq_bound(lp, r0, t, theta);
                    const double rel = std::abs(got - truth) / truth;
                    if (rel > worst) {
                        worst = rel;
                        r.observed = got;
                        r.expected = truth;
                        r.detail = detail::fmt("worst: k=%d r0=%g t=%g theta*t=%g mgf %.15g vs %.15g", k, r0, t, x,
                                               got, truth);
                    }
                }
            }
    r.pass = worst <= 1e-10;
    if (r.detail.empty()) r.detail = "all grid points exact";
    r.detail += detail::fmt(" (max rel err %.2e)", worst);
    return r;
}

inline Result h3_exp_moment(const Options& o) {
    const auto s = modelspaces::h3(-1.0);
    const modelspaces::LyapunovParams lp(3.0, 2.0 / 3.0);
    const auto mgf = [](double theta, double t) {
        return std::pow(1.0 - theta * t, -1.5) * std::exp(theta * t * t / (2.0 * (1.0 - theta * t)));
    };
    const auto e = estimate::mc_exp_moment(s, 0.1, 1.0, true, detail::draws(o), detail::run_options(o, 4));
    const double truth = std::pow(0.9, -1.5) * std::exp(0.1 / 1.8);
    Result r{4, "H3 exponential moment", detail::within_stderr(e, truth), e.mean, truth,
             detail::fmt("mc %.6f +- %.6f vs exact %.6f", e.mean, e.std_error, truth)};
    for (double theta : {0.05, 0.1})
        for (double t : {0.5, 1.0}) {
            const double b = bounds::exp_sq_bound(lp, 0.0, t, theta);
            if (!(b >= mgf(theta, t))) {
                r.pass = false;
                r.observed = b;
                r.expected = mgf(theta, t);
                r.detail = detail::fmt("theta=%g t=%g: bound %.6f below exact %.6f", theta, t, b, mgf(theta, t));
            }
        }
    return r;
}

inline Result circle_cut_locus(const Options& o) {
    const auto plan = detail::path_plan(o, 1e-4);
    const double t = 20.0;
    const auto lt = estimate::mc_local_time(modelspaces::circle(0.0), estimate::Target::cut_locus, t, plan.dt, 0.05,
                                            plan.paths, detail::run_options(o, 5));
    const double truth = t / (2.0 * std::numbers::pi) - std::numbers::pi / 6.0;
    const double got = lt.extrapolated.mean;
    return {5, "circle cut-locus local time", detail::within_rel(got, truth, 0.05), got, truth,
            detail::fmt("%llu paths dt=%g: %.5f +- %.5f vs %.5f (eps=0.05: %.5f, 0.025: %.5f)",
                        static_cast<unsigned long long>(plan.paths), plan.dt, got, lt.extrapolated.std_error, truth,
                        lt.coarse.mean, lt.fine.mean)};
}

inline Result sphere_local_time(const Options& o) {
    const auto plan = detail::path_plan(o, 1e-4);
    const double radius = 1.0;
    const auto lt = estimate::mc_local_time(modelspaces::sphere(2, radius), estimate::Target::submanifold, 1.0,
                                            plan.dt, 0.05, plan.paths, detail::run_options(o, 6));
    const double truth = specfun::upper_gamma(0.0, radius * radius / 2.0);
    const double got = lt.extrapolated.mean / radius;
    return {6, "sphere local time", detail::within_rel(got, truth, 0.10), got, truth,
            detail::fmt("%llu paths dt=%g: %.5f +- %.5f vs Gamma(0, 1/2) = %.5f",
                        static_cast<unsigned long long>(plan.paths), plan.dt, got, lt.extrapolated.std_error, truth)};
}

inline Result euler_mascheroni(const Options&) {
    const double got = std::log(2e6 + 1.0) - specfun::upper_gamma(0.0, 5e-7);
    const double target = 0.5772157;
    return {7, "Euler-Mascheroni limit", std::abs(got - target) <= 1e-3, got, target,
            detail::fmt("log(2e6+1) - Gamma(0, 5e-7) = %.10f vs %.7f", got, target)};
}

inline Result revuz_slope(const Options&) {
    const double t = 50.0;
    const double got = *modelspaces::revuz_mean_local_time(modelspaces::circle(0.0), t) / t;
    const double truth = 1.0 / (2.0 * std::numbers::pi);
    return {8, "Revuz slope", detail::within_rel(got, truth, 0.02), got, truth,
            detail::fmt("(1/t) E L_t at t=50 = %.6f vs 1/(2 pi) = %.6f (rel %.3f)", got, truth,
                        std::abs(got - truth) / truth)};
}

inline Result laguerre_lemma(const Options& o) {
    std::mt19937_64 gen(o.seed ^ 9u);
    std::uniform_int_distribution<unsigned> pd(0, 20);
    std::uniform_real_distribution<double> ad(0.0, 10.0), zd(0.0, 50.0);
    int violations = 0;
    double worst = 0.0, lhs_w = 0.0, rhs_w = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const unsigned p = pd(gen);
        const double alpha = ad(gen), z = zd(gen);
        const double lhs = std::tgamma(p + 1.0) * specfun::laguerre(p, alpha, -z);
        const double rhs = specfun::lemma_laguerre_rhs(p, alpha, z);
        if (!(lhs <= rhs)) ++violations;
        if (p > 0 && lhs / rhs > worst) {
            worst = lhs / rhs;
            lhs_w = lhs;
            rhs_w = rhs;
        }
    }
    return {9, "Laguerre lemma", violations == 0, lhs_w, rhs_w,
            detail::fmt("%d violations in 1000; tightest ratio for p >= 1 %.3e (%.4g vs %.4g)", violations, worst, lhs_w, rhs_w)};
}

inline Result generating_identity(const Options&) {
    double worst = 0.0, got_w = 0.0, want_w = 0.0;
    for (double g : {0.3, 0.5})
        for (double alpha : {0.5, 2.0})
            for (double z : {0.5, 1.0}) {
                double sum = 0.0;
                double gp = 1.0;
                for (unsigned p = 0; p <= 60; ++p, gp *= g) sum += specfun::laguerre(p, alpha, -z) * gp;
                const double closed = std::pow(1.0 - g, -alpha - 1.0) * std::exp(z * g / (1.0 - g));
                const double rel = std::abs(sum - closed) / closed;
                if (rel >= worst) {
                    worst = rel;
                    got_w = sum;
                    want_w = closed;
                }
            }
    return {10, "Laguerre generating function", worst <= 1e-8, got_w, want_w,
            detail::fmt("worst partial sum %.15g vs %.15g (rel %.2e)", got_w, want_w, worst)};
}

inline Result concentration_rate(const Options&) {
    const modelspaces::LyapunovParams lp(3.0, 0.0, true);
    const auto big = bounds::concentration_bound_optimized(lp, 0.0, 1.0, 1e3);
    const double rate = big.log_value / 1e6;
    Result r{11, "concentration rate", std::abs(rate + 0.5) <= 1e-3, rate, -0.5,
             detail::fmt("(1/r^2) log bound at r=1e3 = %.8f vs -0.5", rate)};
    for (double rr : {2.0, 4.0, 6.0}) {
        const double b = bounds::concentration_bound_optimized(lp, 0.0, 1.0, rr).value;
        const double tail = detail::chi3_tail(rr);
        r.detail += detail::fmt("; r=%g bound %.4g >= %.4g", rr, b, tail);
        if (!(b >= tail)) {
            r.pass = false;
            r.observed = b;
            r.expected = tail;
        }
    }
    return r;
}

inline Result comparison_properties(const Options& o) {
    std::mt19937_64 gen(o.seed ^ 12u);
    std::uniform_real_distribution<double> kd(-4.0, -0.01), ld(-5.0, 5.0), ud(1e-3, 3.0);
    int violations = 0, evaluated = 0, redrawn = 0;
    std::string first;
    while (evaluated < 1000) {
        const double kappa = kd(gen);
        const double a = std::sqrt(-kappa);
        const double lambda = ld(gen);
        const double t = ud(gen) / a;
        specfun::ComparisonValues v, w;
        try {
            v = specfun::comparison(kappa, lambda, t);
            w = specfun::comparison(kappa, lambda, t * (1.0 + 1e-4));
        } catch (const domain_error&) {
            // lambda < -sqrt(-kappa) past the blow-up of F
            ++redrawn;
            continue;
        }
        ++evaluated;
        bool ok = v.g <= a && v.f <= std::max(lambda, a);
        const double df = w.f - v.f;
        if (std::abs(std::abs(lambda) - a) > 1e-9) {
            if (std::abs(lambda) < a) ok = ok && df >= 0.0;
            else ok = ok && df <= 0.0;
        }
        if (!ok) {
            ++violations;
            if (first.empty())
                first = detail::fmt("; first: kappa=%g lambda=%g t=%g G=%g F=%g dF=%g", kappa, lambda, t, v.g, v.f,
                                    df);
        }
    }
    return {12, "comparison function properties", violations == 0, double(violations), 0.0,
            detail::fmt("%d violations in %d samples (%d redrawn outside the domain)", violations, evaluated, redrawn) + first};
}

inline Result feynman_kac_quadratic(const Options& o) {
    const auto plan = detail::path_plan(o, 1e-3);
    const double theta = 0.25, t = 1.0;
    const auto s = modelspaces::flat(1, 0, 0.0);
    const auto e = estimate::mc_paths(s, plan.dt, t, plan.paths, detail::run_options(o, 13),
                                      [theta](const simulate::PathSample& path) {
                                          return std::exp(theta / 2.0 * estimate::integrated_square(path));
                                      });
    const double truth = 1.0 / std::sqrt(std::cos(std::sqrt(theta) * t));
    const double bound = bounds::feynman_kac_bound(bounds::Mode::quadratic, {1.0, 0.0, true}, 0.0, t, theta);
    return {13, "Feynman-Kac quadratic", detail::within_stderr(e, truth) && e.mean <= bound, e.mean, truth,
            detail::fmt("mc %.5f +- %.5f vs (cos 0.5)^-1/2 = %.5f, bound %.5f", e.mean, e.std_error, truth, bound)};
}

inline Result logsob_domination(const Options&) {
    Result r{14, "log-Sobolev domination", true, 0, 0, ""};
    double tightest = std::numeric_limits<double>::infinity();
    for (int m : {1, 3})
        for (int i = 1; i <= 9; ++i) {
            const double t = 1.0;
            const double theta = i / 10.0;  // theta C(t) with C(t) = t
            const double b = bounds::logsob_bound(bounds::Mode::quadratic, m, 0, 0.0, 0.0, 0.0, t, theta);
            const double exact = std::pow(1.0 - theta * t, -m / 2.0);
            if (b / exact < tightest) {
                tightest = b / exact;
                r.observed = b;
                r.expected = exact;
                r.detail = detail::fmt("tightest: m=%d theta*C=%.1f bound %.6f vs exact %.6f", m, theta, b, exact);
            }
            if (!(b > exact)) r.pass = false;
        }
    return r;
}

inline const std::vector<std::function<Result(const Options&)>>& checks() {
    static const std::vector<std::function<Result(const Options&)>> all = {
        explosion_times,   h3_second_moment,  flat_equality,       h3_exp_moment,      circle_cut_locus,
        sphere_local_time, euler_mascheroni,  revuz_slope,         laguerre_lemma,     generating_identity,
        concentration_rate, comparison_properties, feynman_kac_quadratic, logsob_domination};
    return all;
}

/// Run one check, turning library exceptions into a FAIL line.
inline Result run_check(int id, const Options& o) {
    try {
        return checks().at(static_cast<std::size_t>(id - 1))(o);
    } catch (const std::exception& ex) {
        return {id, "criterion " + std::to_string(id), false, 0, 0, std::string("exception: ") + ex.what()};
    }
}

inline std::string format(const Result& r) {
    return detail::fmt("%s %2d %s: %s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
}

/// Run every check, printing one line each as it finishes. Returns the
/// results in criterion order.
inline std::vector<Result> run_all(const Options& o, std::ostream* log = nullptr) {
    std::vector<Result> out;
    for (int id = 1; id <= static_cast<int>(checks().size()); ++id) {
        out.push_back(run_check(id, o));
        if (log) *log << format(out.back()) << std::endl;
    }
    return out;
}

}  // namespace tubebound::acceptance
