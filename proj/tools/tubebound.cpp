// tubebound: experiment runner.
//
//   tubebound verify [--quick]
//   tubebound curves [--theta 1/6] [--m 3] [--R -1] [--t-min 0 --t-max 8 --steps 400]
//   tubebound mc --scenario h3 --kappa -1 --t 1 --p 1 --n 100000 [--theta ..] [--r ..]
//   tubebound localtime [--scenario circle|sphere|flat] [--t ..] [--dt ..] [--eps ..]
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad configuration.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tubebound/tubebound.hpp"

namespace fs = std::filesystem;
using namespace tubebound;

namespace {

struct Config {
    std::optional<std::string> scenario;  // per-command default
    int m = 0;  // 0: scenario default
    int n_dim = 0;
    double kappa = -1.0;
    double radius = 1.0;
    double r0 = 0.0;
    std::optional<double> t;
    std::optional<double> theta;
    unsigned p = 1;
    std::optional<double> r;
    std::uint64_t n = 0;  // 0: command default
    std::optional<double> dt;
    double eps = 0.05;
    std::uint64_t seed = 12345;
    unsigned partitions = 8;
    std::string out = "out";
    bool dump_paths = false;
    bool quick = false;
    std::vector<double> R;
    double t_min = 0.0;
    double t_max = 8.0;
    std::size_t steps = 400;
};

constexpr std::size_t kDumpCount = 16;

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

modelspaces::Scenario make_scenario(const Config& c, const std::string& fallback) {
    const std::string kind = c.scenario.value_or(fallback);
    if (kind == "flat") return modelspaces::flat(c.m ? c.m : 3, c.n_dim, c.r0);
    if (kind == "circle") return modelspaces::circle(c.r0);
    if (kind == "h3") {
        if (c.r0 != 0.0) throw config_error("h3 scenario starts at the pole: r0 must be 0");
        return modelspaces::h3(c.kappa);
    }
    if (kind == "sphere") return modelspaces::sphere(c.m ? c.m : 2, c.radius);
    throw config_error("unknown scenario '" + kind + "'");
}

estimate::RunOptions run_options(const Config& c) { return {c.seed, c.partitions, 0}; }

std::string one_line(const modelspaces::Scenario& s) {
    std::string text = modelspaces::format_scenario(s);
    while (!text.empty() && text.back() == '\n') text.pop_back();
    for (char& ch : text)
        if (ch == '\n') ch = ' ';
    return text;
}

std::ofstream open_out(const Config& c, const std::string& name) {
    fs::create_directories(c.out);
    const auto path = fs::path(c.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot write " + path.string());
    return f;
}

// Regenerate the first paths of a run from their per-path streams.
void dump_paths(const Config& c, const modelspaces::Scenario& s, double dt, double T, std::uint64_t n) {
    auto f = open_out(c, "paths.tbnd");
    const std::uint64_t count = std::min<std::uint64_t>(n, kDumpCount);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto engine = rng::stream(c.seed, i);
        simulate::write_path_dump(f, simulate::sample_path(s, dt, T, engine, i));
    }
    std::cout << "dumped " << count << " paths to " << (fs::path(c.out) / "paths.tbnd").string() << "\n";
}

int cmd_verify(const Config& c) {
    acceptance::Options o;
    o.quick = c.quick;
    o.seed = c.seed;
    o.partitions = c.partitions;
    const auto results = acceptance::run_all(o, &std::cout);
    std::ostringstream csv;
    csv << "criterion,name,pass,observed,expected\n";
    int failed = 0;
    for (const auto& r : results) {
        failed += !r.pass;
        csv << r.id << "," << r.name << "," << (r.pass ? 1 : 0) << fmt(",%.17g,%.17g\n", r.observed, r.expected);
    }
    open_out(c, "acceptance.csv") << csv.str();
    std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
    return failed ? 1 : 0;
}

int cmd_curves(const Config& c) {
    const double theta = c.theta.value_or(1.0 / 6.0);
    const int m = c.m ? c.m : 3;
    if (!(theta > 0.0)) throw config_error("curves: --theta must be positive");
    if (m < 2) throw config_error("curves: --m must be at least 2");
    if (!(c.t_max > c.t_min) || c.t_min < 0.0 || c.steps == 0) throw config_error("curves: bad time grid");
    const std::vector<double> Rs = c.R.empty() ? std::vector<double>{-1.0, 0.0, 1.0} : c.R;
    const auto grid = bounds::linspace(c.t_min, c.t_max, c.steps);
    std::vector<std::pair<std::string, std::string>> files;

    svg::Plot sq{fmt("exp(theta r^2/2) bound, theta=%g, m=%d", theta, m), "t", "bound", true, 1e12, {}, {}};
    svg::Plot dist{fmt("exp(theta r) bound, theta=%g, m=%d", theta, m), "t", "bound", true, 1e12, {}, {}};
    for (double R : Rs) {
        const modelspaces::LyapunovParams lp(m, R == 0.0 ? 0.0 : -R / 3.0);
        const auto csq = bounds::exp_sq_curve(lp, c.r0, theta, grid);
        const auto cdist = bounds::exp_dist_curve(lp, c.r0, theta, grid);
        const std::string tag = fmt("R%g", R);
        std::ostringstream f1, f2;
        bounds::write_curve_csv(f1, csq);
        bounds::write_curve_csv(f2, cdist);
        files.emplace_back("exp_sq_" + tag + ".csv", f1.str());
        files.emplace_back("exp_dist_" + tag + ".csv", f2.str());

        double last_valid = std::nan("");
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (csq.valid[i]) last_valid = grid[i];
        std::cout << fmt("R=%g (nu=%d, lambda=%.6g): explosion ", R, m, lp.lambda)
                  << (csq.explosion_point ? fmt("%.10f", *csq.explosion_point) : std::string("never"))
                  << fmt(", last valid t %.6g\n", last_valid);

        sq.series.push_back({"R=" + fmt("%g", R), csq.grid, csq.values});
        dist.series.push_back({"R=" + fmt("%g", R), cdist.grid, cdist.values});
        if (csq.explosion_point) sq.markers.push_back(*csq.explosion_point);
    }
    std::ostringstream f1, f2;
    svg::write_svg(f1, sq);
    svg::write_svg(f2, dist);
    files.emplace_back("exp_sq.svg", f1.str());
    files.emplace_back("exp_dist.svg", f2.str());
    for (const auto& [name, body] : files) open_out(c, name) << body;
    return 0;
}

struct Comparison {
    std::string quantity;
    estimate::MCEstimate mc;
    std::optional<double> bound;
    std::optional<double> exact;
    bool pass = true;
};

int cmd_mc(const Config& c) {
    const auto s = make_scenario(c, "flat");
    const auto lp = modelspaces::lyapunov_params(s);
    const double t = c.t.value_or(1.0);
    if (!(t > 0.0)) throw config_error("mc: --t must be positive");
    std::uint64_t n = c.n ? c.n : 100000;
    if (c.quick) n = std::min<std::uint64_t>(n, 10000);
    if (n < 100) throw config_error("mc: --n must be at least 100");
    const auto opt = run_options(c);
    std::vector<Comparison> rows;

    const auto finish_row = [](Comparison& row) {
        if (row.bound) row.pass = row.mc.mean - 3.0 * row.mc.std_error <= *row.bound;
        if (row.exact) row.pass = row.pass && std::abs(row.mc.mean - *row.exact) <= 3.0 * row.mc.std_error;
    };

    {
        Comparison row{fmt("moment_p%u", c.p), estimate::mc_moment(s, c.p, t, n, opt), {}, {}};
        row.bound = bounds::even_moment_bound(lp, s.r0, t, c.p);
        row.exact = modelspaces::exact_moment(s, c.p, t);
        finish_row(row);
        rows.push_back(row);
    }
    if (c.theta) {
        const double theta = *c.theta;
        if (!(theta >= 0.0)) throw config_error("mc: --theta must be non-negative");
        Comparison sq{fmt("exp_sq_theta%g", theta), estimate::mc_exp_moment(s, theta, t, true, n, opt), {}, {}};
        try {
            sq.bound = bounds::exp_sq_bound(lp, s.r0, t, theta);
        } catch (const domain_error& e) {
            std::cout << "exp_sq bound outside its domain: " << e.what() << "\n";
        }
        try {
            sq.exact = modelspaces::exact_exp_moment(s, theta, t);
        } catch (const domain_error&) {
        }
        finish_row(sq);
        rows.push_back(sq);
        if (lp.nu >= 2.0) {
            Comparison lin{fmt("exp_dist_theta%g", theta), estimate::mc_exp_moment(s, theta, t, false, n, opt), {}, {}};
            lin.bound = bounds::exp_dist_bound(lp, s.r0, t, theta);
            finish_row(lin);
            rows.push_back(lin);
        }
    }
    if (c.r) {
        if (!(*c.r > 0.0)) throw config_error("mc: --r must be positive");
        Comparison tail{fmt("tail_r%g", *c.r), estimate::tail_prob(s, *c.r, t, false, n, 0.0, opt), {}, {}};
        tail.bound = bounds::concentration_bound_optimized(lp, s.r0, t, *c.r).value;
        finish_row(tail);
        rows.push_back(tail);
    }
    if (c.dump_paths) dump_paths(c, s, c.dt.value_or(1e-3), t, n);

    std::cout << "scenario " << one_line(s) << fmt(" nu=%g lambda=%g t=%g n=%llu seed=%llu\n",
                                                                       lp.nu, lp.lambda, t,
                                                                       static_cast<unsigned long long>(n),
                                                                       static_cast<unsigned long long>(c.seed));
    std::vector<std::pair<std::string, estimate::MCEstimate>> est;
    std::ostringstream cmp;
    cmp << "quantity,mean,stderr,bound,exact,pass\n";
    bool all = true;
    for (const auto& row : rows) {
        all = all && row.pass;
        est.emplace_back(row.quantity, row.mc);
        const auto opt_str = [](const std::optional<double>& v) { return v ? fmt("%.17g", *v) : std::string("nan"); };
        cmp << row.quantity << fmt(",%.17g,%.17g,", row.mc.mean, row.mc.std_error) << opt_str(row.bound) << ","
            << opt_str(row.exact) << "," << (row.pass ? 1 : 0) << "\n";
        std::cout << fmt("%s %-18s mean %.6g +- %.3g", row.pass ? "PASS" : "FAIL", row.quantity.c_str(),
                         row.mc.mean, row.mc.std_error)
                  << (row.bound ? fmt("  bound %.6g", *row.bound) : std::string())
                  << (row.exact ? fmt("  exact %.6g", *row.exact) : std::string())
                  << (row.mc.heavy_tail_rejections
                          ? fmt("  (%llu draws dropped by the overflow guard)",
                                static_cast<unsigned long long>(row.mc.heavy_tail_rejections))
                          : std::string())
                  << "\n";
    }
    std::ostringstream estf;
    estimate::write_estimates_csv(estf, est);
    open_out(c, "mc_estimates.csv") << estf.str();
    open_out(c, "mc_comparison.csv") << cmp.str();
    return all ? 0 : 1;
}

int cmd_localtime(const Config& c) {
    const auto s = make_scenario(c, "circle");
    std::uint64_t n = c.n ? c.n : 10000;
    double dt = c.dt.value_or(1e-4);
    if (c.quick) {
        n = std::min<std::uint64_t>(n, 2000);
        dt = std::max(dt, 1e-3);
    }
    if (!(c.eps > 0.0)) throw config_error("localtime: --eps must be positive");

    estimate::Target target = estimate::Target::submanifold;
    double t = 1.0, truth = 0.0, tol = 0.10;
    std::string what;
    if (s.is<modelspaces::CirclePoint>()) {
        target = estimate::Target::cut_locus;
        t = c.t.value_or(20.0);
        truth = t / (2.0 * std::numbers::pi) - std::numbers::pi / 6.0;
        tol = 0.05;
        what = "cut-locus local time vs t/(2 pi) - pi/6";
        if (s.r0 != 0.0) throw config_error("localtime: the circle experiment starts at N (r0 = 0)");
    } else if (s.is<modelspaces::SphereInEuclidean>()) {
        t = c.t.value_or(1.0);
        truth = *modelspaces::revuz_mean_local_time(s, t);
        what = "local time on the sphere vs r Gamma(m/2-1, r^2/2t) / Gamma(m/2)";
    } else if (s.is<modelspaces::EuclideanAffine>() &&
               s.as<modelspaces::EuclideanAffine>().m - s.as<modelspaces::EuclideanAffine>().n == 1) {
        t = c.t.value_or(1.0);
        // E|r0 + B_t| - r0
        const double sd = std::sqrt(t);
        const double z = s.r0 / sd;
        truth = s.r0 * std::erf(z / std::numbers::sqrt2) + sd * std::sqrt(2.0 / std::numbers::pi) * std::exp(-z * z / 2.0) -
                s.r0;
        tol = 0.05;
        what = "local time on a hyperplane vs E|r0 + B_t| - r0";
    } else {
        throw config_error("localtime: supported scenarios are circle, sphere and flat with codimension 1");
    }
    if (!(t > 0.0) || dt > t) throw config_error("localtime: need 0 < dt <= t");

    const auto lt = estimate::mc_local_time(s, target, t, dt, c.eps, n, run_options(c));
    if (c.dump_paths) dump_paths(c, s, dt, t, n);
    const double got = lt.extrapolated.mean;
    const bool pass = std::abs(got - truth) <= tol * std::abs(truth);
    std::cout << "scenario " << one_line(s)
              << fmt(" t=%g dt=%g paths=%llu seed=%llu\n", t, dt, static_cast<unsigned long long>(n),
                     static_cast<unsigned long long>(c.seed))
              << fmt("eps=%g: %.6f +- %.3g\n", c.eps, lt.coarse.mean, lt.coarse.std_error)
              << fmt("eps=%g: %.6f +- %.3g\n", c.eps / 2, lt.fine.mean, lt.fine.std_error)
              << fmt("%s %s: extrapolated %.6f vs %.6f (tolerance %g%%)\n", pass ? "PASS" : "FAIL", what.c_str(), got,
                     truth, tol * 100);
    std::ostringstream f;
    estimate::write_estimates_csv(f, {{fmt("local_time_eps%g", c.eps), lt.coarse},
                                      {fmt("local_time_eps%g", c.eps / 2), lt.fine},
                                      {"local_time_extrapolated", lt.extrapolated}});
    open_out(c, "localtime.csv") << f.str();
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial moment bounds for Brownian motion relative to a submanifold"};
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");

    Config c;
    if (const char* env = std::getenv("TUBEBOUND_SEED")) {
        try {
            c.seed = std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "config error: TUBEBOUND_SEED is not an unsigned integer\n";
            return 2;
        }
    }

    app.add_option("--scenario", c.scenario, "flat | circle | h3 | sphere")
        ->check(CLI::IsMember({"flat", "circle", "h3", "sphere"}));
    app.add_option("--m", c.m, "ambient dimension");
    app.add_option("--n-dim", c.n_dim, "dimension of the affine submanifold (flat)");
    app.add_option("--kappa", c.kappa, "curvature (h3)");
    app.add_option("--radius", c.radius, "sphere radius");
    app.add_option("--r0", c.r0, "initial distance to N");
    app.add_option("--t", c.t, "time");
    app.add_option("--theta", c.theta, "exponential moment parameter");
    app.add_option("--p", c.p, "moment order (E r^2p)");
    app.add_option("--r", c.r, "tail radius");
    app.add_option("--n", c.n, "samples or paths");
    app.add_option("--dt", c.dt, "path step");
    app.add_option("--eps", c.eps, "occupation width");
    app.add_option("--seed", c.seed, "master seed (default $TUBEBOUND_SEED or 12345)");
    app.add_option("--partitions", c.partitions, "fixed reduction partitions")->check(CLI::PositiveNumber);
    app.add_option("--out", c.out, "output directory");
    app.add_flag("--dump-paths", c.dump_paths, "write the first paths as a binary dump");
    app.add_flag("--quick", c.quick, "reduced sample sizes");
    app.add_option("--R", c.R, "Ricci lower bounds for curves")->allow_extra_args(false);
    app.add_option("--t-min", c.t_min, "curve grid start");
    app.add_option("--t-max", c.t_max, "curve grid end");
    app.add_option("--steps", c.steps, "curve grid intervals");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite")->fallthrough();
    auto* curves = app.add_subcommand("curves", "tabulate the exponential moment bounds against t")->fallthrough();
    auto* mc = app.add_subcommand("mc", "Monte Carlo against the bounds for one scenario")->fallthrough();
    auto* localtime = app.add_subcommand("localtime", "local time experiments")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify) return cmd_verify(c);
        if (*curves) return cmd_curves(c);
        if (*mc) return cmd_mc(c);
        if (*localtime) return cmd_localtime(c);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const precondition_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
