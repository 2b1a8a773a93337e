// Command-line experiment runner for the tent-map shadowing library.
#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tentshadow/error.hpp"
#include "tentshadow/maps.hpp"
#include "tentshadow/measures.hpp"
#include "tentshadow/parallel.hpp"
#include "tentshadow/perturbation.hpp"
#include "tentshadow/report_io.hpp"
#include "tentshadow/shadowing.hpp"
#include "tentshadow/stochshadow.hpp"
#include "tentshadow/transfer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tentshadow;

namespace {

enum ExitCode { ok = 0, validation_exit = 2, numerical_exit = 3, io_exit = 4 };

struct Context {
    fs::path out = "tentshadow_out";
    std::size_t threads = 0;
    std::optional<std::uint64_t> seed;  // recorded in the manifest when the command uses one

    fs::path file(const std::string& name) const { return out / name; }
};

void write_json(const json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

// Shared option helpers. Help strings name the mathematical symbol each flag sets.
CLI::Option* add_slope(CLI::App* app, double& s) {
    return app->add_option("--s", s, "slope s of the tent map f_s, in [sqrt 2, 2]")->capture_default_str();
}
CLI::Option* add_eps(CLI::App* app, double& eps) {
    return app->add_option("--eps", eps, "noise radius eps of the uniform kernel")->capture_default_str();
}
CLI::Option* add_seed(CLI::App* app, std::uint64_t& seed) {
    return app->add_option("--seed", seed, "Philox key word 0 (seed)")->capture_default_str();
}
CLI::Option* add_phi(CLI::App* app, std::string& phi) {
    return app->add_option("--phi", phi, "observable phi: x, x2, cos2pi, hat, step")->capture_default_str();
}
CLI::Option* add_bins_rule(CLI::App* app, BinsRule& rule) {
    app->add_option("--bins-factor", rule.factor, "Ulam grid size ceil(factor / eps)")->capture_default_str();
    return app->add_option("--bins-cap", rule.cap, "upper bound on the Ulam grid size")->capture_default_str();
}

using Runner = std::function<void(Context&)>;

void register_orbit(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0, x0 = TentMap::critical_point;
        std::size_t n = 100;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("orbit", "true orbit x_k = f_s^k(x_0)");
    add_slope(cmd, o->s);
    cmd->add_option("--x0", o->x0, "initial point x_0")->capture_default_str();
    cmd->add_option("--n", o->n, "number of steps n")->capture_default_str();
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            auto pts = orbit(TentMap(o->s), o->x0, o->n);
            CsvWriter csv(ctx.file("orbit.csv"), {"k", "x"});
            for (std::size_t k = 0; k < pts.size(); ++k) csv.row(k, pts[k]);
        };
    });
}

void register_pseudo(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0, eps = 1e-3, x0 = 0.3;
        std::size_t n = 1000;
        std::uint64_t seed = 0, stream = 0;
        bool adversarial = false;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("pseudo", "eps-pseudotrajectory: a chain realization or the adversarial sequence");
    add_slope(cmd, o->s);
    add_eps(cmd, o->eps);
    cmd->add_option("--x0", o->x0, "initial point x_0 of the realization")->capture_default_str();
    cmd->add_option("--n", o->n, "number of steps n")->capture_default_str();
    add_seed(cmd, o->seed);
    cmd->add_option("--stream", o->stream, "Philox key word 1 (stream)")->capture_default_str();
    cmd->add_flag("--adversarial", o->adversarial, "x_0 = c, x_1 = f(c) +/- eps, then the true orbit of x_1");
    cmd->callback([&run, o] {
        run = [o](Context& ctx) {
            TentMap f(o->s);
            Pseudotrajectory traj;
            if (o->adversarial) {
                traj = adversarial_pseudotrajectory(f, o->eps, o->n);
            } else {
                traj = gen_realization(f, UniformKernel(o->eps), o->x0, o->n, o->seed, o->stream);
                ctx.seed = o->seed;
            }
            write_trajectory_text(traj, ctx.file("trajectory.csv"));
            write_trajectory_binary(traj, ctx.file("trajectory.bin"));
            auto adm = check_admissible(traj.points, f, o->eps);
            json summary{{"steps", traj.steps()},
                         {"direction", traj.direction},
                         {"admissible", adm.admissible},
                         {"first_violation", optional_json(adm.first_violation)}};
            write_json(summary, ctx.file("summary.json"));
        };
    });
}

void register_ulam(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0;
        std::size_t bins = 256;
        std::optional<double> eps;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("ulam", "Ulam matrix P of f_s, or of the noisy chain when eps is given");
    add_slope(cmd, o->s);
    cmd->add_option("--bins", o->bins, "number of Ulam cells")->capture_default_str();
    cmd->add_option("--eps", o->eps, "noise radius eps; omit for the unperturbed operator");
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            TentMap f(o->s);
            auto op = o->eps ? perturbed_operator(f, o->bins, *o->eps) : ulam_matrix(f, o->bins);
            write_operator_binary(op, ctx.file("operator.bin"));
            CsvWriter csv(ctx.file("operator.csv"), {"row", "col", "value"});
            for (Eigen::Index i = 0; i < op.matrix.outerSize(); ++i)
                for (SparseMatrix::InnerIterator it(op.matrix, i); it; ++it)
                    csv.row(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), it.value());
            json summary{{"bins", op.bins},
                         {"nonzeros", static_cast<std::size_t>(op.matrix.nonZeros())},
                         {"row_sum_defect", op.row_sum_defect()}};
            write_json(summary, ctx.file("summary.json"));
        };
    });
}

void register_stationary(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0, tol = 1e-12;
        std::size_t bins = 1024, max_iter = 200000;
        std::optional<double> eps;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("stationary", "stationary density rho (eps omitted) or rho_eps");
    add_slope(cmd, o->s);
    cmd->add_option("--bins", o->bins, "number of Ulam cells")->capture_default_str();
    cmd->add_option("--eps", o->eps, "noise radius eps; omit for the invariant density rho");
    cmd->add_option("--tol", o->tol, "L1 change between iterates at exit")->capture_default_str();
    cmd->add_option("--max-iter", o->max_iter, "iteration cap")->capture_default_str();
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            TentMap f(o->s);
            auto op = o->eps ? perturbed_operator(f, o->bins, *o->eps) : ulam_matrix(f, o->bins);
            auto res = stationary_density(op, o->tol, o->max_iter);
            write_density_csv(res.density, ctx.file("density.csv"));
            json summary{{"bins", o->bins},
                         {"residual", res.residual},
                         {"iterations", res.iterations},
                         {"l1_to_uniform", l1_distance(res.density, DensityVector::uniform(o->bins))}};
            write_json(summary, ctx.file("summary.json"));
        };
    });
}

std::vector<double> default_stability_grid() {
    std::vector<double> grid;
    for (int k = 10; k >= 4; --k) grid.push_back(std::ldexp(1.0, -k));
    return grid;
}

void register_stability(CLI::App& app, Runner& run) {
    struct Opts {
        std::vector<double> s{std::sqrt(2.0), 1.8, 2.0};
        std::vector<double> eps = default_stability_grid();
        BinsRule rule{};
        double tol = 1e-12;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("stability", "||rho - rho_eps||_L1 over a geometric eps grid and its log-log slope");
    cmd->add_option("--s", o->s, "slopes s of f_s")->delimiter(',')->capture_default_str();
    cmd->add_option("--eps", o->eps, "geometric grid of noise radii eps")->delimiter(',')->capture_default_str();
    add_bins_rule(cmd, o->rule);
    cmd->add_option("--tol", o->tol, "stationary iteration tolerance")->capture_default_str();
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            std::vector<StabilityFit> fits(o->s.size());
            parallel_for(o->s.size(), ctx.threads,
                         [&](std::size_t i) { fits[i] = stability_speed_fit(TentMap(o->s[i]), o->eps, o->rule, o->tol); });
            CsvWriter csv(ctx.file("stability.csv"), {"s", "eps", "bins", "l1_distance"});
            json doc = json::array();
            for (std::size_t i = 0; i < fits.size(); ++i) {
                for (const auto& e : fits[i].entries) csv.row(o->s[i], e.eps, e.bins, e.distance);
                doc.push_back({{"s", o->s[i]},
                               {"slope", fits[i].slope},
                               {"intercept", fits[i].intercept},
                               {"r_squared", fits[i].r_squared}});
            }
            write_json(doc, ctx.file("fits.json"));
        };
    });
}

void register_correlations(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0, eps = 1e-2;
        std::string phi = "x", psi = "x";
        std::size_t n_max = 30;
        std::optional<std::size_t> bins;
        BinsRule rule{};
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("correlations", "corr_n(phi, psi) under rho_eps and an exponential fit C r^n");
    add_slope(cmd, o->s);
    add_eps(cmd, o->eps);
    add_phi(cmd, o->phi);
    cmd->add_option("--psi", o->psi, "second observable psi")->capture_default_str();
    cmd->add_option("--n-max", o->n_max, "largest lag n")->capture_default_str();
    cmd->add_option("--bins", o->bins, "Ulam cells; default ceil(factor / eps)");
    add_bins_rule(cmd, o->rule);
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            auto op = perturbed_operator(TentMap(o->s), o->bins.value_or(o->rule.bins_for(o->eps)), o->eps);
            auto rho = stationary_density(op).density;
            auto seq = correlation_sequence(op, rho, observable(o->phi), observable(o->psi), o->n_max);
            CsvWriter csv(ctx.file("correlations.csv"), {"n", "corr"});
            for (std::size_t n = 0; n < seq.size(); ++n) csv.row(n, seq[n]);
            // Lag 0 is the covariance itself, not part of the decay.
            auto fit = fit_exponential_rate(std::span<const double>(seq).subspan(1), 1);
            json summary{{"bins", op.bins},
                         {"amplitude", fit.amplitude},
                         {"rate", fit.rate},
                         {"r_squared", fit.r_squared},
                         {"points_used", fit.points_used}};
            write_json(summary, ctx.file("fit.json"));
        };
    });
}

void register_shadow(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 1.9, eps = 1e-4, x0 = 0.3;
        std::optional<double> accuracy;
        std::size_t n = 1000;
        std::uint64_t seed = 0, stream = 0;
        bool adversarial = false;
        std::optional<std::string> traj;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("shadow", "search a true orbit staying within sigma of an eps-pseudotrajectory");
    add_slope(cmd, o->s);
    add_eps(cmd, o->eps);
    cmd->add_option("--x0", o->x0, "initial point x_0 of the realization")->capture_default_str();
    cmd->add_option("--n", o->n, "horizon n")->capture_default_str();
    add_seed(cmd, o->seed);
    cmd->add_option("--stream", o->stream, "Philox key word 1 (stream)")->capture_default_str();
    cmd->add_option("--accuracy", o->accuracy, "shadowing accuracy sigma; default the CKY bound for m = 2");
    cmd->add_flag("--adversarial", o->adversarial, "shadow the adversarial sequence instead of a realization");
    cmd->add_option("--traj", o->traj, "read the pseudotrajectory from a binary trajectory file");
    cmd->callback([&run, o] {
        run = [o](Context& ctx) {
            TentMap f(o->s);
            Pseudotrajectory traj;
            if (o->traj) {
                traj = read_trajectory_binary(*o->traj);
                require(traj.slope == o->s, "trajectory file was generated for a different slope");
            } else if (o->adversarial) {
                traj = adversarial_pseudotrajectory(f, o->eps, o->n);
            } else {
                traj = gen_realization(f, UniformKernel(o->eps), o->x0, o->n, o->seed, o->stream);
                ctx.seed = o->seed;
            }
            const double accuracy = o->accuracy.value_or(cky_constant(o->s, 2) * o->eps);
            const std::size_t horizon = std::min(o->n, traj.steps());
            auto res = shadow_search(f, traj.points, accuracy, horizon);
            write_shadow_csv(std::span<const double>(traj.points).first(horizon + 1), res, ctx.file("shadow.csv"));
            json summary{{"accuracy", accuracy},
                         {"horizon", res.horizon},
                         {"found", res.point.has_value()},
                         {"point", res.point ? json(*res.point) : json(nullptr)},
                         {"achieved", res.achieved},
                         {"failed_at", optional_json(res.failed_at)},
                         {"verified", verify_shadow(f, traj.points, res, accuracy)}};
            write_json(summary, ctx.file("summary.json"));
        };
    });
}

void register_lowerbound(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 1.9;
        std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("lowerbound", "separation time n(eps) and the bound s^(n(eps)-1) eps");
    add_slope(cmd, o->s);
    cmd->add_option("--eps", o->eps, "noise radii eps")->delimiter(',')->capture_default_str();
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            TentMap f(o->s);
            CsvWriter csv(ctx.file("lowerbound.csv"), {"eps", "n_eps", "bound", "direction", "sqrt_eps_ratio",
                                                       "half_bound_shadow_found"});
            for (double eps : o->eps) {
                auto r = lower_bound_demo(f, eps);
                auto adv = adversarial_pseudotrajectory(f, eps, r.n_eps);
                auto res = shadow_search(f, adv.points, r.bound / 2, r.n_eps);
                csv.row(eps, r.n_eps, r.bound, r.direction, r.bound / std::sqrt(eps), res.point.has_value());
            }
        };
    });
}

void register_periodic(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0;
        std::size_t n = 4;
        bool primitive = false;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("periodic", "fixed points of f_s^n via itineraries");
    add_slope(cmd, o->s);
    cmd->add_option("--n", o->n, "period n (1..20)")->capture_default_str();
    cmd->add_flag("--primitive", o->primitive, "keep points of minimal period n only");
    cmd->callback([&run, o] {
        run = [o](const Context& ctx) {
            TentMap f(o->s);
            auto pts = periodic_points(f, o->n, o->primitive);
            write_periodic_csv(f, pts, ctx.file("periodic.csv"));
            write_json(json{{"period", o->n}, {"count", pts.size()}}, ctx.file("summary.json"));
        };
    });
}

void add_shadow_options(CLI::App* cmd, StochShadowOptions& opts, std::string& route) {
    cmd->add_option("--burn-in", opts.burn_in, "steps discarded before recording")->capture_default_str();
    cmd->add_option("--threshold-factor", opts.threshold_factor, "C in the membership test d <= C eps")
        ->capture_default_str();
    cmd->add_option("--route", route, "comparison point p: periodic or shadow")
        ->check(CLI::IsMember({"periodic", "shadow"}))
        ->capture_default_str();
    cmd->add_option("--period-min", opts.period_min, "smallest period tried for p")->capture_default_str();
    cmd->add_option("--period-cap", opts.period_cap, "largest period tried for p")->capture_default_str();
    cmd->add_option("--shadow-accuracy", opts.shadow_accuracy, "sigma for the shadow route");
    cmd->add_option("--ladder-start", opts.ladder_start, "first n of the doubling ladder")->capture_default_str();
    add_bins_rule(cmd, opts.bins_rule);
}

ComparisonRoute parse_route(const std::string& route) {
    return route == "shadow" ? ComparisonRoute::shadow : ComparisonRoute::periodic;
}

void register_stochshadow(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0, eps = 1e-3;
        std::string phi = "x", route = "periodic";
        std::size_t n = 100000, trials = 100;
        std::uint64_t seed = 7;
        StochShadowOptions shadow{};
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("stochshadow", "deviation triple for seeded realizations against mu_eps and mu");
    add_slope(cmd, o->s);
    add_eps(cmd, o->eps);
    add_phi(cmd, o->phi);
    cmd->add_option("--n", o->n, "horizon n of the empirical measure S_n")->capture_default_str();
    cmd->add_option("--trials", o->trials, "number of realizations")->capture_default_str();
    add_seed(cmd, o->seed);
    add_shadow_options(cmd, o->shadow, o->route);
    cmd->callback([&run, o] {
        run = [o](Context& ctx) {
            ctx.seed = o->seed;
            auto opts = o->shadow;
            opts.route = parse_route(o->route);
            opts.threads = ctx.threads;
            auto rep = stochastic_shadowing_trial(TentMap(o->s), o->eps, observable(o->phi), o->n, o->trials, o->seed,
                                                  opts);
            write_report_json(rep, ctx.file("report.json"));
            write_report_csv(rep, ctx.file("trials.csv"));
        };
    });
}

void register_property_a(CLI::App& app, Runner& run) {
    struct Opts {
        double s = 2.0, eps = 1e-3, delta = 0.01;
        std::string phi = "x";
        std::size_t n0 = 100, n_max = 100000, trials = 100, burn_in = 10000;
        std::uint64_t seed = 7;
        BinsRule rule{};
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("propertyA", "share of realizations with |S_n phi - mu_eps phi| < delta for all n > N");
    add_slope(cmd, o->s);
    add_eps(cmd, o->eps);
    add_phi(cmd, o->phi);
    cmd->add_option("--delta", o->delta, "tolerance delta")->capture_default_str();
    cmd->add_option("--n0", o->n0, "first cutoff N; later cutoffs double")->capture_default_str();
    cmd->add_option("--n-max", o->n_max, "horizon")->capture_default_str();
    cmd->add_option("--trials", o->trials, "number of realizations")->capture_default_str();
    cmd->add_option("--burn-in", o->burn_in, "steps discarded before recording")->capture_default_str();
    add_seed(cmd, o->seed);
    add_bins_rule(cmd, o->rule);
    cmd->callback([&run, o] {
        run = [o](Context& ctx) {
            ctx.seed = o->seed;
            StochShadowOptions opts;
            opts.burn_in = o->burn_in;
            opts.bins_rule = o->rule;
            opts.threads = ctx.threads;
            auto rungs = property_a_fraction(TentMap(o->s), o->eps, observable(o->phi), o->delta, o->n0, o->n_max,
                                             o->trials, o->seed, opts);
            CsvWriter csv(ctx.file("propertyA.csv"), {"cutoff", "fraction"});
            for (const auto& r : rungs) csv.row(r.cutoff, r.fraction);
        };
    });
}

void register_sweep(CLI::App& app, Runner& run) {
    struct Opts {
        std::vector<double> s{std::sqrt(2.0), 1.6, 1.8, 2.0};
        std::vector<double> eps{4e-3, 2e-3, 1e-3};
        std::vector<std::string> phi{"x", "hat"};
        std::size_t trials = 20;
        std::uint64_t seed = 7;
        std::string route = "periodic";
        std::vector<std::size_t> cky_periods{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
        SweepOptions sweep{};
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("sweep", "uniformity of C(phi) across the family f_s and noise radii eps");
    cmd->add_option("--s", o->s, "slopes s")->delimiter(',')->capture_default_str();
    cmd->add_option("--eps", o->eps, "noise radii eps")->delimiter(',')->capture_default_str();
    cmd->add_option("--phi", o->phi, "observables phi")->delimiter(',')->capture_default_str();
    cmd->add_option("--n", o->sweep.n, "horizon n per realization")->capture_default_str();
    cmd->add_option("--trials", o->trials, "realizations per cell")->capture_default_str();
    add_seed(cmd, o->seed);
    cmd->add_option("--cky-periods", o->cky_periods, "periods N for the CKY constant ladder")
        ->delimiter(',')
        ->capture_default_str();
    add_shadow_options(cmd, o->sweep.shadow, o->route);
    cmd->callback([&run, o] {
        run = [o](Context& ctx) {
            ctx.seed = o->seed;
            auto opts = o->sweep;
            opts.shadow.route = parse_route(o->route);
            opts.shadow.threads = ctx.threads;
            opts.cky_periods = o->cky_periods;
            auto rep = uniform_family_sweep(o->s, o->eps, o->phi, o->trials, o->seed, opts);
            write_sweep_json(rep, ctx.file("sweep.json"));
            write_sweep_csv(rep, ctx.file("sweep.csv"));
        };
    });
}

// Every option value after parsing, keyed by long name. Output location and the
// config path are kept out so manifests of identical runs differ only in wall time.
json collect_config(const CLI::App& app) {
    json cfg = json::object();
    for (const auto* opt : app.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "out" || name == "config") continue;
        auto results = opt->results();
        if (results.empty()) {
            if (opt->get_type_size() == 0) {
                cfg[name] = false;
                continue;
            }
            std::string def = opt->get_default_str();
            cfg[name] = def.empty() ? json(nullptr) : json(def);
        } else if (opt->get_type_size() == 0) {
            cfg[name] = true;
        } else if (results.size() == 1) {
            cfg[name] = results.front();
        } else {
            cfg[name] = results;
        }
    }
    return cfg;
}

std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

void emit_error(ErrorKind kind, const std::string& message, int code) {
    json record{{"error", {{"kind", to_string(kind)}, {"message", message}, {"exit_code", code}}}};
    std::cerr << record.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tent-map shadowing experiments"};
    app.set_version_flag("--version", std::string(TENTSHADOW_VERSION));
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");

    Context ctx;
    std::string out = ctx.out.string();
    app.add_option("--out", out, "output directory; nothing is written outside it")->capture_default_str();
    app.add_option("--threads", ctx.threads, "worker threads for trials and grid cells (0 = all cores)")
        ->capture_default_str();

    Runner run;
    register_orbit(app, run);
    register_pseudo(app, run);
    register_ulam(app, run);
    register_stationary(app, run);
    register_stability(app, run);
    register_correlations(app, run);
    register_shadow(app, run);
    register_lowerbound(app, run);
    register_periodic(app, run);
    register_stochshadow(app, run);
    register_property_a(app, run);
    register_sweep(app, run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error(ErrorKind::validation, e.what(), validation_exit);
        return validation_exit;
    }

    const auto* sub = app.get_subcommands().front();
    const auto start = std::chrono::steady_clock::now();
    try {
        ctx.out = out;
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec || !fs::is_directory(ctx.out)) throw IoError("cannot create output directory " + out);
        run(ctx);

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json manifest;
        manifest["command"] = sub->get_name();
        manifest["config"] = collect_config(*sub);
        manifest["global"] = {{"threads", ctx.threads}};
        manifest["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
        manifest["versions"] = {{"tentshadow", TENTSHADOW_VERSION},
                                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                              std::to_string(EIGEN_MINOR_VERSION)},
                                {"cli11", CLI11_VERSION},
                                {"compiler", compiler_id()}};
        manifest["out_dir"] = ctx.out.string();
        manifest["wall_time_seconds"] = wall;
        write_json(manifest, ctx.file("run_manifest.json"));
    } catch (const ValidationError& e) {
        emit_error(e.kind(), e.what(), validation_exit);
        return validation_exit;
    } catch (const IoError& e) {
        emit_error(e.kind(), e.what(), io_exit);
        return io_exit;
    } catch (const Error& e) {
        emit_error(e.kind(), e.what(), numerical_exit);
        return numerical_exit;
    }
    return ok;
}
