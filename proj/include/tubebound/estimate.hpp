// tubebound/estimate.hpp
//
// Monte Carlo functionals over the samplers: radial moments, exponential
// moments, tail and exit probabilities, and occupation-time estimates of
// local time.
//
// Reproducibility: draws for exact one-time samplers come from one stream per
// partition, paths from one stream per path index. Partition results are
// merged in partition order, so (inputs, n, seed, partitions) determines an
// estimate bit for bit regardless of the thread count.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tubebound/errors.hpp"
#include "tubebound/modelspaces.hpp"
#include "tubebound/rng.hpp"
#include "tubebound/simulate.hpp"

namespace tubebound::estimate {

using modelspaces::Scenario;
using simulate::PathSample;

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    unsigned partitions = 1;
    std::uint64_t heavy_tail_rejections = 0;  ///< draws dropped by the overflow guard
};

struct RunOptions {
    std::uint64_t seed = 0;
    unsigned partitions = 1;
    unsigned threads = 0;  ///< 0 = min(partitions, hardware threads)
};

namespace detail {

inline MCEstimate finish(const rng::Accumulator& acc, std::uint64_t n, const RunOptions& opt,
                         std::uint64_t rejected = 0) {
    MCEstimate e;
    e.mean = acc.mean;
    e.std_error = acc.stderr_of_mean();
    e.n = n;
    e.seed = opt.seed;
    e.partitions = opt.partitions;
    e.heavy_tail_rejections = rejected;
    return e;
}

struct Partial {
    rng::Accumulator acc;
    std::uint64_t rejected = 0;
};

// f(rng) -> pair<double value, bool keep>
template <class Draw>
MCEstimate run_draws(std::uint64_t n, const RunOptions& opt, Draw draw) {
    const auto parts = rng::run_partitions(n, opt.partitions, opt.threads, [&](rng::PartitionRange r) {
        auto engine = rng::stream(opt.seed, r.index);
        Partial part;
        for (std::uint64_t i = r.begin; i < r.end; ++i) {
            const auto [value, keep] = draw(engine);
            if (keep) part.acc.push(value);
            else ++part.rejected;
        }
        return part;
    });
    Partial total;
    for (const auto& p : parts) {
        total.acc.merge(p.acc);
        total.rejected += p.rejected;
    }
    return finish(total.acc, n, opt, total.rejected);
}

}  // namespace detail

/// Monte Carlo mean of `functional(path)` over n independent paths on
/// [0, T] with step dt. Path i uses rng::stream(seed, i).
template <class Functional>
MCEstimate mc_paths(const Scenario& s, double dt, double T, std::uint64_t n, const RunOptions& opt,
                    Functional functional) {
    const std::size_t steps = simulate::step_count(dt, T);
    const auto parts = rng::run_partitions(n, opt.partitions, opt.threads, [&](rng::PartitionRange r) {
        rng::Accumulator acc;
        PathSample path;
        path.dt = dt;
        path.scenario = s;
        for (std::uint64_t i = r.begin; i < r.end; ++i) {
            auto engine = rng::stream(opt.seed, i);
            path.seed = i;
            simulate::fill_path(s, dt, steps, engine, path.values);
            acc.push(functional(path));
        }
        return acc;
    });
    rng::Accumulator total;
    for (const auto& p : parts) total.merge(p);
    return detail::finish(total, n, opt);
}

/// Mean of r_N^{2p}(X_t) over n exact draws.
inline MCEstimate mc_moment(const Scenario& s, unsigned p, double t, std::uint64_t n, const RunOptions& opt) {
    if (n < 100) throw precondition_error("mc_moment: n must be at least 100");
    return detail::run_draws(n, opt, [&](rng::Engine& e) {
        const double r = simulate::sample_distance(s, t, e);
        return std::pair{std::pow(r * r, static_cast<double>(p)), true};
    });
}

/// Mean of exp(theta r) or, with `square`, exp(theta r^2 / 2). Draws whose
/// exponent exceeds 700 are dropped and counted in heavy_tail_rejections.
inline MCEstimate mc_exp_moment(const Scenario& s, double theta, double t, bool square, std::uint64_t n,
                                const RunOptions& opt) {
    if (!(theta >= 0.0)) throw precondition_error("mc_exp_moment: theta must be non-negative");
    if (theta == 0.0) {
        rng::Accumulator acc;
        for (std::uint64_t i = 0; i < n; ++i) acc.push(1.0);
        return detail::finish(acc, n, opt);
    }
    return detail::run_draws(n, opt, [&](rng::Engine& e) {
        const double r = simulate::sample_distance(s, t, e);
        const double exponent = square ? theta * r * r / 2.0 : theta * r;
        if (exponent > 700.0) return std::pair{0.0, false};
        return std::pair{std::exp(exponent), true};
    });
}

enum class Target { submanifold, cut_locus };

/// (1 / 2 eps) * dt * #{k < K : distance at step k < eps}, where the
/// distance is r_N for `submanifold` and pi - r_N (distance to the antipode
/// of N) for `cut_locus`, which exists only on the circle.
inline double occupation_local_time(const PathSample& path, Target target, double eps) {
    if (!(eps > 0.0)) throw precondition_error("occupation_local_time: eps must be positive");
    if (target == Target::cut_locus && !path.scenario.is<modelspaces::CirclePoint>())
        throw precondition_error("occupation_local_time: cut_locus target needs the circle scenario");
    std::uint64_t hits = 0;
    const std::size_t K = path.steps();
    if (target == Target::submanifold) {
        for (std::size_t k = 0; k < K; ++k) hits += path.values[k] < eps;
    } else {
        for (std::size_t k = 0; k < K; ++k) hits += std::numbers::pi - path.values[k] < eps;
    }
    return path.dt * static_cast<double>(hits) / (2.0 * eps);
}

/// Richardson combination 2 L(eps / 2) - L(eps).
inline double occupation_local_time_extrapolated(const PathSample& path, Target target, double eps) {
    return 2.0 * occupation_local_time(path, target, eps / 2.0) - occupation_local_time(path, target, eps);
}

struct LocalTimeEstimate {
    MCEstimate coarse;        ///< eps
    MCEstimate fine;          ///< eps / 2
    MCEstimate extrapolated;  ///< 2 L(eps / 2) - L(eps)
};

/// Local time on N (or at the circle's cut locus) at time T from n paths,
/// reporting both occupation widths and the extrapolated value.
inline LocalTimeEstimate mc_local_time(const Scenario& s, Target target, double T, double dt, double eps,
                                       std::uint64_t n, const RunOptions& opt) {
    if (target == Target::cut_locus && !s.is<modelspaces::CirclePoint>())
        throw precondition_error("mc_local_time: cut_locus target needs the circle scenario");
    const std::size_t steps = simulate::step_count(dt, T);
    struct Triple {
        rng::Accumulator coarse, fine, extra;
    };
    const auto parts = rng::run_partitions(n, opt.partitions, opt.threads, [&](rng::PartitionRange r) {
        Triple acc;
        PathSample path;
        path.dt = dt;
        path.scenario = s;
        for (std::uint64_t i = r.begin; i < r.end; ++i) {
            auto engine = rng::stream(opt.seed, i);
            simulate::fill_path(s, dt, steps, engine, path.values);
            const double lc = occupation_local_time(path, target, eps);
            const double lf = occupation_local_time(path, target, eps / 2.0);
            acc.coarse.push(lc);
            acc.fine.push(lf);
            acc.extra.push(2.0 * lf - lc);
        }
        return acc;
    });
    Triple total;
    for (const auto& p : parts) {
        total.coarse.merge(p.coarse);
        total.fine.merge(p.fine);
        total.extra.merge(p.extra);
    }
    return {detail::finish(total.coarse, n, opt), detail::finish(total.fine, n, opt),
            detail::finish(total.extra, n, opt)};
}

/// Binomial standard error; below p = 0.05 the Wilson score half-width at
/// z = 1 is used so that rare events never report zero uncertainty.
inline double binomial_stderr(double p_hat, std::uint64_t n) {
    const double nn = static_cast<double>(n);
    if (p_hat >= 0.05) return std::sqrt(p_hat * (1.0 - p_hat) / nn);
    return std::sqrt(p_hat * (1.0 - p_hat) / nn + 1.0 / (4.0 * nn * nn)) / (1.0 + 1.0 / nn);
}

/// Frequency of {r_N(X_t) >= r}, or of {sup_{s <= t} r_N(X_s) >= r} when
/// `sup_mode` is set (paths with step dt).
inline MCEstimate tail_prob(const Scenario& s, double r, double t, bool sup_mode, std::uint64_t n, double dt,
                            const RunOptions& opt) {
    MCEstimate e;
    if (sup_mode) {
        e = mc_paths(s, dt, t, n, opt, [r](const PathSample& path) {
            for (double v : path.values)
                if (v >= r) return 1.0;
            return 0.0;
        });
    } else {
        e = detail::run_draws(n, opt, [&](rng::Engine& eng) {
            return std::pair{simulate::sample_distance(s, t, eng) >= r ? 1.0 : 0.0, true};
        });
    }
    e.std_error = binomial_stderr(e.mean, n);
    return e;
}

/// Trapezoidal int_0^T r_N^2(X_s) ds along a path.
inline double integrated_square(const PathSample& path) {
    const auto& v = path.values;
    if (v.size() < 2) return 0.0;
    double sum = 0.5 * (v.front() * v.front() + v.back() * v.back());
    for (std::size_t k = 1; k + 1 < v.size(); ++k) sum += v[k] * v[k];
    return sum * path.dt;
}

/// CSV with header `quantity,mean,stderr,n,seed,partitions`.
inline void write_estimates_csv(std::ostream& out, const std::vector<std::pair<std::string, MCEstimate>>& rows) {
    out << "quantity,mean,stderr,n,seed,partitions\n";
    char buf[160];
    for (const auto& [name, e] : rows) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%llu,%llu,%u\n", e.mean, e.std_error,
                      static_cast<unsigned long long>(e.n), static_cast<unsigned long long>(e.seed), e.partitions);
        out << name << buf;
    }
}

}  // namespace tubebound::estimate
