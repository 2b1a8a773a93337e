// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime limit.
// Exit status is 0 once every criterion has been evaluated; pass --strict to make
// any FAIL line turn into a nonzero exit.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "tentshadow/error.hpp"
#include "tentshadow/maps.hpp"
#include "tentshadow/measures.hpp"
#include "tentshadow/perturbation.hpp"
#include "tentshadow/rng.hpp"
#include "tentshadow/shadowing.hpp"
#include "tentshadow/stochshadow.hpp"
#include "tentshadow/transfer.hpp"

using namespace tentshadow;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

const double golden_bracket_lo = 1.5, golden_bracket_hi = 1.7;

double golden_parameter() { return find_periodic_parameter(3, Interval(golden_bracket_lo, golden_bracket_hi)); }

Verdict periodic_capture_times() {
    const double s = golden_parameter();
    TentMap f(s);
    const auto report = detect_periodic_parameter(f, 3, 1e-10);
    if (!report.period || *report.period != 3) return {false, "detect oracle does not confirm period 3"};
    const double threshold = *report.xi * std::pow(s, -3.0) / 2;
    const double fractions[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    int good = 0;
    for (double fd : fractions)
        for (double fe : fractions) {
            const double delta = fd * threshold, eps = fe * threshold;
            auto n = capture_time(f, delta, eps);
            auto m = tube_return_time(f, delta);
            if (n == std::optional<std::size_t>(2) && m == std::optional<std::size_t>(2)) ++good;
        }
    return {good == 25, fmt("s=%.15f threshold=%.12g; n_s=m=2 in %d/25 cells", s, threshold, good)};
}

Verdict full_tent_stationarity() {
    auto res = stationary_density(ulam_matrix(TentMap(2.0), 1024));
    const double d = l1_distance(res.density, DensityVector::uniform(1024));
    return {d <= 1e-6, fmt("||rho - 1||_L1 = %.3g after %zu iterations", d, res.iterations)};
}

Verdict stability_speed() {
    std::vector<double> grid;
    for (int k = 10; k >= 4; --k) grid.push_back(std::ldexp(1.0, -k));
    bool pass = true;
    std::string detail;
    for (double s : {std::sqrt(2.0), 1.8, 2.0}) {
        auto fit = stability_speed_fit(TentMap(s), grid, BinsRule{8.0, std::size_t{1} << 16});
        pass = pass && fit.slope >= 0.7;
        detail += fmt("s=%.4f slope=%.5f r2=%.4f; ", s, fit.slope, fit.r_squared);
    }
    detail += "required slope >= 0.7";
    return {pass, detail};
}

Verdict holder_failure() {
    TentMap f(1.9);
    const double eps_list[] = {1e-2, 1e-3, 1e-4, 1e-5};
    bool increasing = true, all_fail = true;
    std::size_t prev = 0;
    double last_bound = 0.0;
    std::string detail;
    for (double eps : eps_list) {
        auto r = lower_bound_demo(f, eps);
        if (r.n_eps <= prev) increasing = false;
        prev = r.n_eps;
        last_bound = r.bound;
        auto adv = adversarial_pseudotrajectory(f, eps, r.n_eps);
        auto res = shadow_search(f, adv.points, r.bound / 2, r.n_eps);
        if (res.point) all_fail = false;
        detail += fmt("eps=%.0e n=%zu bound=%.4g half-bound shadow %s; ", eps, r.n_eps, r.bound,
                      res.point ? "FOUND" : "none");
    }
    const bool exceeds = last_bound > 10 * std::sqrt(1e-5);
    detail += fmt("increasing=%s, final bound %.4g vs 10 sqrt(eps)=%.4g", increasing ? "yes" : "no", last_bound,
                  10 * std::sqrt(1e-5));
    return {increasing && exceeds && all_fail, detail};
}

Verdict cky_positive() {
    const double s = golden_parameter();
    TentMap f(s);
    const double delta = 0.02;
    auto m = tube_return_time(f, delta);
    if (!m) return {false, "m(delta) undefined"};
    const double eps = 5e-4;
    auto bounds = cky_bounds(f, *m, delta, eps);
    const double accuracy = cky_constant(s, 3) * eps;  // (m+1) s^(m+1) with the period N = 3
    const double tight = cky_constant(s, *m) * eps;
    int shadowed = 0, shadowed_tight = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        auto traj = gen_stationary_realization(f, UniformKernel(eps), 1000, 1000, 11, t);
        auto res = shadow_search(f, traj.points, accuracy, 1000);
        if (res.point && verify_shadow(f, traj.points, res, accuracy)) ++shadowed;
        auto res_tight = shadow_search(f, traj.points, tight, 1000);
        if (res_tight.point && verify_shadow(f, traj.points, res_tight, tight)) ++shadowed_tight;
    }
    const bool pass = bounds.eps_admissible && shadowed == 100;
    return {pass, fmt("m(delta)=%zu, eps=%.1e < threshold %.4g: %s; within %.4g (=%.1f eps): %d/100; "
                      "within %.4g (=%.1f eps, m=2 form): %d/100",
                      *m, eps, bounds.eps_threshold, bounds.eps_admissible ? "yes" : "no", accuracy, accuracy / eps,
                      shadowed, tight, tight / eps, shadowed_tight)};
}

Verdict stochastic_triple() {
    StochShadowOptions opts;
    auto rep = stochastic_shadowing_trial(TentMap(2.0), 1e-3, observable("x"), 100000, 100, 7, opts);
    int within = 0, chain = 0;
    double worst = 0.0;
    for (const auto& r : rep.records) {
        const auto& d = r.triple;
        if (d.d_pseudo_stat <= 0.01 && d.d_true_inv <= 0.01 && d.d_pseudo_true <= 0.01) ++within;
        if (r.chain_holds) ++chain;
        worst = std::max(worst, d.max());
    }
    return {within >= 90 && chain == 100,
            fmt("%d/100 trials with all deviations <= 0.01 (need 90); chain inequality %d/100; worst %.4g; "
                "periodic p of period %zu",
                within, chain, worst, rep.comparison_orbit ? rep.comparison_orbit->period : std::size_t{0})};
}

Verdict correlation_decay() {
    const double eps = 1e-2;
    auto op = perturbed_operator(TentMap(2.0), BinsRule{}.bins_for(eps), eps);
    auto rho = stationary_density(op).density;
    auto seq = correlation_sequence(op, rho, observable("x"), observable("x"), 30);
    auto fit = fit_exponential_rate(std::span<const double>(seq).subspan(1), 1);
    const bool pass = fit.rate > 0.0 && fit.rate < 1.0 && fit.r_squared >= 0.9;
    return {pass, fmt("rate=%.4f r2=%.4f C=%.4g over %zu lags", fit.rate, fit.r_squared, fit.amplitude,
                      fit.points_used)};
}

Verdict partial_period() {
    TentMap f(2.0);
    auto phi = observable("x");
    Philox rng(2024, 8);
    auto pick = [&](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.uniform() * (hi - lo + 1)); };
    int ok = 0;
    double worst_ratio = 0.0;
    for (int c = 0; c < 100; ++c) {
        const std::size_t n = pick(2, 10);
        auto orbits = periodic_points(f, n, true);
        const auto& orb = orbits[pick(0, orbits.size() - 1)];
        auto pts = orbit_points(f, orb);
        const std::size_t k = pick(1, 50), m = pick(1, n - 1);
        const double dev = partial_period_deviation(pts, phi, k, m);
        const double bound = partial_period_bound(n, k, m, phi.sup_abs);
        if (dev <= bound && bound <= 2.0 / static_cast<double>(k)) ++ok;
        worst_ratio = std::max(worst_ratio, dev / bound);
    }
    return {ok == 100, fmt("%d/100 cases within the bound; max deviation/bound = %.4f", ok, worst_ratio)};
}

std::size_t sign_change_count(const TentMap& f, std::size_t n) {
    const std::size_t grid = std::size_t{1} << 20;
    auto g = [&](double x) {
        for (std::size_t k = 0; k < n; ++k) x = f.apply(x);
        return x;
    };
    std::size_t count = 1;  // x = 0
    double prev = g(1.0 / grid) - 1.0 / grid;
    for (std::size_t k = 2; k <= grid; ++k) {
        const double x = static_cast<double>(k) / grid;
        const double cur = g(x) - x;
        if ((prev < 0) != (cur < 0) || cur == 0.0) ++count;
        prev = cur;
    }
    return count;
}

Verdict periodic_oracle() {
    TentMap f(2.0);
    int ok = 0;
    std::string mismatches;
    for (std::size_t n = 1; n <= 10; ++n) {
        const std::size_t expected = std::size_t{1} << n;
        const std::size_t found = periodic_points(f, n).size();
        const std::size_t oracle = sign_change_count(f, n);
        if (found == expected && oracle == expected) ++ok;
        else mismatches += fmt(" n=%zu: %zu vs oracle %zu;", n, found, oracle);
    }
    return {ok == 10, fmt("%d/10 periods match 2^n and the sign-change oracle%s", ok, mismatches.c_str())};
}

#ifdef TENTSHADOW_CLI_PATH
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Manifest minus the wall time and output path lines.
std::string stable_manifest(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line, kept;
    while (std::getline(in, line))
        if (line.find("\"wall_time_seconds\"") == std::string::npos && line.find("\"out_dir\"") == std::string::npos)
            kept += line + '\n';
    return kept;
}

Verdict cli_determinism() {
    const fs::path work = fs::path(TENTSHADOW_ACCEPTANCE_WORK) / "determinism";
    fs::remove_all(work);
    const std::vector<std::string> commands = {
        "orbit --s 1.9 --n 1000",
        "pseudo --s 1.9 --eps 1e-3 --n 10000 --seed 3",
        "ulam --s 1.8 --bins 512 --eps 0.01",
        "stationary --s 2 --bins 1024",
        "stability --eps 0.0009765625,0.001953125,0.00390625,0.0078125,0.015625,0.03125,0.0625",
        "correlations --s 2 --eps 0.01",
        "shadow --s 1.9 --eps 1e-4 --n 1000 --seed 5",
        "lowerbound --s 1.9 --eps 1e-2,1e-3,1e-4",
        "periodic --s 2 --n 10",
        "stochshadow --s 2 --eps 1e-3 --phi x --n 100000 --trials 100 --seed 7",
        "propertyA --s 2 --eps 1e-3 --phi x --delta 0.01 --n0 100 --n-max 100000 --trials 100 --seed 7",
        "sweep --trials 10 --n 10000",
    };
    int identical = 0;
    std::string problems;
    for (const auto& cmd : commands) {
        const std::string name = cmd.substr(0, cmd.find(' '));
        bool ok = true;
        for (const char* run : {"a", "b"}) {
            const std::string line = std::string("\"") + TENTSHADOW_CLI_PATH + "\" --out \"" +
                                     (work / run / name).string() + "\" " + cmd + " 2>&1 >/dev/null";
            if (std::system(line.c_str()) != 0) {
                ok = false;
                problems += " " + name + " exited nonzero;";
            }
        }
        std::size_t files = 0;
        if (ok) {
            for (const auto& entry : fs::directory_iterator(work / "a" / name)) {
                const auto rel = entry.path().filename();
                const auto other = work / "b" / name / rel;
                ++files;
                const bool same = rel == "run_manifest.json"
                                      ? stable_manifest(entry.path()) == stable_manifest(other)
                                      : fs::exists(other) && slurp(entry.path()) == slurp(other);
                if (!same) {
                    ok = false;
                    problems += " " + name + "/" + rel.string() + " differs;";
                }
            }
        }
        if (ok && files >= 2) ++identical;
    }
    return {identical == static_cast<int>(commands.size()),
            fmt("%d/%zu subcommands byte-identical across two runs%s", identical, commands.size(), problems.c_str())};
}
#else
Verdict cli_determinism() { return {false, "command-line runner was not built"}; }
#endif

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    Verdict (*check)();
};

} // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const Criterion criteria[] = {
        {1, "exact capture and return times", 1.0, periodic_capture_times},
        {2, "full-tent stationarity", 5.0, full_tent_stationarity},
        {3, "stability speed", 300.0, stability_speed},
        {4, "Hoelder-shadowing failure", 60.0, holder_failure},
        {5, "CKY positive direction", 120.0, cky_positive},
        {6, "stochastic shadowing triple", 300.0, stochastic_triple},
        {7, "correlation decay", 60.0, correlation_decay},
        {8, "partial-period bound", 10.0, partial_period},
        {9, "periodic-point oracle equivalence", 30.0, periodic_oracle},
        {10, "CLI determinism", 600.0, cli_determinism},
    };
    int passed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = v.pass && in_time;
        passed += pass;
        std::printf("%s [%2d] %s (%.2f s, limit %.0f s%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.title, secs,
                    c.limit_seconds, in_time ? "" : ", TOO SLOW", v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/10 criteria passed\n", passed);
    return strict && passed != 10 ? 1 : 0;
}
