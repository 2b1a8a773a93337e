#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "tentshadow/error.hpp"
#include "tentshadow/perturbation.hpp"
#include "tentshadow/stochshadow.hpp"

using namespace tentshadow;
namespace fs = std::filesystem;

TEST_CASE("stationary pair") {
    auto pair = compute_stationary_pair(TentMap(1.9), 0.02);
    CHECK(pair.bins == 400);
    CHECK(pair.perturbed.density.bins() == 400);
    CHECK(pair.unperturbed.density.bins() == 400);
    CHECK(pair.perturbed.residual <= 1e-12);
    CHECK(l1_distance(pair.perturbed.density, pair.unperturbed.density) > 0.0);
}

TEST_CASE("periodic-route trial records") {
    TentMap f(1.9);
    const double eps = 0.01;
    StochShadowOptions opts;
    opts.burn_in = 500;
    opts.ladder_start = 250;
    opts.threads = 1;
    auto rep = stochastic_shadowing_trial(f, eps, observable("x"), 2000, 12, 4, opts);
    REQUIRE(rep.records.size() == 12);
    REQUIRE(rep.comparison_orbit);
    CHECK(rep.comparison_deviation <= eps);
    CHECK(rep.route == "periodic");
    std::size_t inside = 0;
    double worst = 0.0;
    for (const auto& r : rep.records) {
        CHECK(r.chain_holds);
        CHECK(r.mirrored_chain_holds);
        CHECK_FALSE(r.shadow_failed);
        CHECK(r.in_b == (r.triple.max() <= 10 * eps));
        REQUIRE(r.ladder.size() == 4);  // 250, 500, 1000, 2000
        CHECK(r.ladder.front().n == 250);
        CHECK(r.ladder.back().n == 2000);
        CHECK(r.triple.d_true_inv == r.ladder.back().triple.d_true_inv);
        inside += r.in_b;
        worst = std::max(worst, r.triple.max() / eps);
    }
    CHECK(rep.fraction_in_b == doctest::Approx(inside / 12.0));
    CHECK(rep.c_phi_estimate == doctest::Approx(worst));

    // Per-trial streams make the result independent of the worker count.
    opts.threads = 4;
    auto again = stochastic_shadowing_trial(f, eps, observable("x"), 2000, 12, 4, opts);
    for (std::size_t t = 0; t < 12; ++t) {
        CHECK(again.records[t].triple.d_pseudo_stat == rep.records[t].triple.d_pseudo_stat);
        CHECK(again.records[t].triple.d_pseudo_true == rep.records[t].triple.d_pseudo_true);
    }
}

TEST_CASE("shadow-route trial") {
    TentMap f(1.8);
    StochShadowOptions opts;
    opts.route = ComparisonRoute::shadow;
    opts.burn_in = 200;
    opts.ladder_start = 100;
    auto rep = stochastic_shadowing_trial(f, 1e-3, observable("cos2pi"), 400, 6, 9, opts);
    CHECK(rep.route == "shadow");
    CHECK_FALSE(rep.comparison_orbit);
    for (const auto& r : rep.records) {
        if (r.shadow_failed) {
            CHECK_FALSE(r.in_b);
            continue;
        }
        // A shadow within 10 eps moves a 2 pi-Lipschitz observable by at most 20 pi eps.
        CHECK(r.triple.d_pseudo_true <= 2 * M_PI * 10 * 1e-3 + 1e-12);
        CHECK(r.chain_holds);
    }
}

TEST_CASE("property A fractions match a direct recount") {
    TentMap f(1.7);
    const double eps = 0.02, delta = 0.01;
    auto phi = observable("x");
    StochShadowOptions opts;
    opts.burn_in = 100;
    auto rungs = property_a_fraction(f, eps, phi, delta, 50, 1000, 10, 21, opts);
    REQUIRE(rungs.size() == 5);  // 50, 100, 200, 400, 800
    CHECK(rungs.back().cutoff == 800);

    auto op = perturbed_operator(f, opts.bins_rule.bins_for(eps), eps);
    const double target = integrate(phi, stationary_density(op).density);
    for (const auto& rung : rungs) {
        std::size_t inside = 0;
        for (std::uint64_t t = 0; t < 10; ++t) {
            auto traj = gen_stationary_realization(f, UniformKernel(eps), 1000, 100, 21, t);
            double sum = 0.0, worst = 0.0;
            for (std::size_t k = 0; k <= 1000; ++k) {
                sum += traj.points[k];
                if (k > rung.cutoff) worst = std::max(worst, std::abs(sum / (k + 1) - target));
            }
            inside += worst < delta;
        }
        CHECK(rung.fraction == doctest::Approx(inside / 10.0));
    }
    for (std::size_t r = 1; r < rungs.size(); ++r) CHECK(rungs[r].fraction >= rungs[r - 1].fraction);
    CHECK(property_a_fraction(f, eps, phi, delta, 50, 1000, 0, 21, opts).empty());
    CHECK_THROWS_AS(property_a_fraction(f, eps, phi, delta, 1000, 1000, 3, 21, opts), ValidationError);
}

TEST_CASE("stability fit") {
    std::vector<StabilityEntry> entries;
    for (double e : {1e-2, 1e-3, 1e-4}) entries.push_back({e, 0, 2.0 * std::pow(e, 0.8)});
    auto fit = fit_stability(entries);
    CHECK(fit.slope == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    entries.pop_back();
    CHECK_THROWS_AS(fit_stability(entries), ValidationError);

    std::vector<double> ragged{0.04, 0.02, 0.005};
    CHECK_THROWS_AS(stability_speed_fit(TentMap(2.0), ragged), ValidationError);
    std::vector<double> grid{0.04, 0.02, 0.01};
    auto real = stability_speed_fit(TentMap(2.0), grid);
    REQUIRE(real.entries.size() == 3);
    CHECK(real.entries[0].bins == 200);
    CHECK(real.slope > 0.0);
}

TEST_CASE("family sweep and serialization") {
    std::vector<double> s_grid{1.7, 1.9}, eps_grid{0.04, 0.02, 0.01};
    std::vector<std::string> phis{"x", "hat"};
    SweepOptions opts;
    opts.n = 500;
    opts.shadow.burn_in = 100;
    opts.shadow.ladder_start = 500;
    opts.cky_periods = {3, 4};
    auto sweep = uniform_family_sweep(s_grid, eps_grid, phis, 3, 2, opts);
    CHECK(sweep.cells.size() == 6);
    CHECK(sweep.fits.size() == 2);
    for (const auto& [s, fit] : sweep.fits) CHECK(fit.has_value());
    CHECK(sweep.summary.size() == 2);
    for (const auto& sum : sweep.summary) CHECK(sum.single_constant == (sum.max_c_phi <= 10.0));
    CHECK(sweep.cky_ladder.size() == 2);

    auto dir = fs::temp_directory_path() / "tentshadow_sweep_test";
    fs::create_directories(dir);
    write_sweep_json(sweep, dir / "sweep.json");
    write_sweep_csv(sweep, dir / "sweep.csv");
    auto doc = nlohmann::json::parse(std::ifstream(dir / "sweep.json"));
    CHECK(doc["cells"].size() == 6);

    const auto& report = sweep.cells.front().reports.front();
    write_report_json(report, dir / "r.json");
    write_report_csv(report, dir / "r.csv");
    auto rdoc = nlohmann::json::parse(std::ifstream(dir / "r.json"));
    CHECK(rdoc["records"].size() == 3);
    CHECK_THROWS_AS(write_report_json(report, dir / "missing" / "r.json"), IoError);
    fs::remove_all(dir);
}
