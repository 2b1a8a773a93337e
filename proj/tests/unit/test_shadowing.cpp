#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tentshadow/error.hpp"
#include "tentshadow/perturbation.hpp"
#include "tentshadow/shadowing.hpp"

using namespace tentshadow;

namespace {
const double golden = (1.0 + std::sqrt(5.0)) / 2.0;

// Count sign changes of f^n(x) - x over (0, 1] on the grid k / 2^20, plus the
// fixed point at 0. For s = 2 every grid value is exact.
std::size_t sign_change_count(const TentMap& f, std::size_t n) {
    const std::size_t grid = std::size_t{1} << 20;
    auto g = [&](double x) {
        double y = x;
        for (std::size_t k = 0; k < n; ++k) y = f.apply(y);
        return y - x;
    };
    std::size_t count = 1;
    double prev = g(1.0 / grid);
    for (std::size_t k = 2; k <= grid; ++k) {
        double cur = g(static_cast<double>(k) / grid);
        if ((prev < 0) != (cur < 0) || cur == 0.0) ++count;
        prev = cur;
    }
    return count;
}
} // namespace

TEST_CASE("shadows of chain realizations are sound") {
    TentMap f(1.9);
    std::size_t found = 0;
    for (std::uint64_t stream = 0; stream < 20; ++stream) {
        auto traj = gen_realization(f, UniformKernel(1e-3), 0.37, 1000, 17, stream);
        auto res = shadow_search(f, traj.points, 0.05, 1000);
        if (!res.point) {
            CHECK(res.failed_at);
            continue;
        }
        ++found;
        CHECK(verify_shadow(f, traj.points, res, 0.05));
        REQUIRE(res.orbit.size() == 1001);
        CHECK(res.orbit[0] == *res.point);
        CHECK(res.achieved <= 0.05);
        for (std::size_t k = 0; k < 1000; ++k) {
            CHECK(std::abs(traj.points[k] - res.orbit[k]) <= 0.05);
            CHECK(std::abs(f.apply(res.orbit[k]) - res.orbit[k + 1]) <= 1e-12);
        }
    }
    CHECK(found > 0);
}

TEST_CASE("planted near-orbits are recovered") {
    TentMap f(1.7);
    Philox rng(8, 0);
    auto truth = orbit(f, 0.3141, 30);
    std::vector<double> noisy(truth);
    for (auto& x : noisy) x = std::clamp(x + 1e-7 * (2 * rng.uniform() - 1), 0.0, 1.0);
    auto res = shadow_search(f, noisy, 1e-5, 30);
    REQUIRE(res.point);
    CHECK(std::abs(*res.point - 0.3141) < 1e-5);
    CHECK(verify_shadow(f, noisy, res, 1e-5));
    // Forward replay agrees over this short horizon.
    auto replay = orbit(f, *res.point, 30);
    for (std::size_t k = 0; k <= 30; ++k) CHECK(std::abs(replay[k] - noisy[k]) <= 1e-5 + 1e-9);
}

TEST_CASE("shadow search fails when no orbit tracks the sequence") {
    TentMap f(golden);
    auto adv = adversarial_pseudotrajectory(f, 0.01, 40);
    auto res = shadow_search(f, adv.points, 0.005, 40);
    CHECK_FALSE(res.point);
    REQUIRE(res.failed_at);
    CHECK(*res.failed_at <= 40);
    CHECK(res.orbit.empty());
    CHECK_FALSE(verify_shadow(f, adv.points, res, 0.005));
    CHECK_THROWS_AS(shadow_search(f, adv.points, 0.005, 41), ValidationError);
}

TEST_CASE("verification rejects a tampered orbit") {
    TentMap f(1.8);
    auto traj = gen_realization(f, UniformKernel(1e-3), 0.2, 200, 1, 0);
    auto res = shadow_search(f, traj.points, 0.05, 200);
    REQUIRE(res.point);
    auto bad = res;
    bad.orbit[100] += 1e-6;
    CHECK_FALSE(verify_shadow(f, traj.points, bad, 0.05));
}

TEST_CASE("CKY constants and bounds") {
    CHECK(cky_constant(golden, 2) == doctest::Approx(107.665631459994953).epsilon(1e-13));
    CHECK(cky_constant(golden, 3) == doctest::Approx(232.275534829989064).epsilon(1e-13));
    auto b = cky_bounds(TentMap(golden), 2, 0.1, 1e-4);
    CHECK(b.eps_threshold == doctest::Approx(0.1 * (golden - 1) / 3 / std::pow(golden, 3)).epsilon(1e-13));
    CHECK(b.accuracy == doctest::Approx(107.665631459994953e-4).epsilon(1e-13));
    CHECK(b.eps_admissible);
    CHECK_FALSE(cky_bounds(TentMap(golden), 2, 0.1, 0.01).eps_admissible);
}

TEST_CASE("CKY ladder picks the smallest periodic parameter") {
    std::vector<std::size_t> periods{3, 4, 5};
    auto ladder = cky_constant_ladder(periods, Interval(TentMap::min_slope, TentMap::max_slope));
    REQUIRE(ladder.size() == 3);
    CHECK(ladder[0].period == 3);
    CHECK(ladder[0].slope == doctest::Approx(golden).epsilon(1e-12));
    CHECK(ladder[0].constant == doctest::Approx(232.275534829989064).epsilon(1e-10));
    for (const auto& e : ladder) CHECK(e.constant == doctest::Approx(cky_constant(e.slope, e.period)));
}

TEST_CASE("lower bound demo") {
    TentMap f(1.9);
    const std::size_t expected[] = {5, 7, 12, 16};
    double eps = 1e-2;
    for (std::size_t n : expected) {
        auto r = lower_bound_demo(f, eps);
        CAPTURE(eps);
        CHECK(r.n_eps == n);
        CHECK(r.bound == doctest::Approx(std::pow(1.9, static_cast<double>(n - 1)) * eps));
        CHECK(r.direction == 1);
        CHECK(r.x_eps == doctest::Approx(f(f(0.5))));
        eps /= 10;
    }
    CHECK(lower_bound_demo(TentMap(2.0), 1e-3).direction == -1);
}

TEST_CASE("periodic points for the full tent") {
    TentMap f(2.0);
    auto fixed = periodic_points(f, 1);
    REQUIRE(fixed.size() == 2);
    CHECK(fixed[0].point == 0.0);
    CHECK(fixed[1].point == doctest::Approx(2.0 / 3));
    for (std::size_t n = 1; n <= 8; ++n) {
        CAPTURE(n);
        CHECK(periodic_points(f, n).size() == (std::size_t{1} << n));
        CHECK(sign_change_count(f, n) == (std::size_t{1} << n));
    }
    CHECK(periodic_points(f, 4, true).size() == 12);
}

TEST_CASE("periodic points agree with the sign-change oracle") {
    for (double s : {1.5, 1.8, 1.93}) {
        TentMap f(s);
        for (std::size_t n = 1; n <= 7; ++n) {
            CAPTURE(s);
            CAPTURE(n);
            auto pts = periodic_points(f, n);
            CHECK(pts.size() == sign_change_count(f, n));
            for (const auto& p : pts) {
                auto orb = orbit_points(f, p);
                REQUIRE(orb.size() == n);
                CHECK(std::abs(f.apply(orb.back()) - orb.front()) < 1e-12);
                CHECK(p.itinerary.size() == n);
                CHECK(n % p.minimal_period == 0);
            }
        }
    }
}

TEST_CASE("superstable parameters keep tangential periodic points") {
    // The critical 3-cycle touches the diagonal of f^3 without crossing it.
    TentMap f(golden);
    auto pts = periodic_points(f, 3);
    REQUIRE(pts.size() == 5);
    CHECK(sign_change_count(f, 3) == 2);
    const double expected[] = {0.0, golden - golden * golden / 2, 0.5, golden / (1 + golden), golden / 2};
    for (std::size_t i = 0; i < 5; ++i) CHECK(pts[i].point == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("cyclic averages and partial periods") {
    TentMap f(2.0);
    auto p = periodic_points(f, 3, true);
    REQUIRE_FALSE(p.empty());
    auto pts = orbit_points(f, p[0]);
    auto phi = observable("x");
    double mean = (pts[0] + pts[1] + pts[2]) / 3;
    CHECK(cyclic_average(pts, phi, 3) == doctest::Approx(mean));
    CHECK(cyclic_average(pts, phi, 300) == doctest::Approx(mean));
    for (const auto& id : observable_ids()) {
        auto g = observable(id);
        for (std::size_t k = 1; k <= 5; ++k)
            for (std::size_t m = 1; m < 3; ++m)
                CHECK(partial_period_deviation(pts, g, k, m) <= partial_period_bound(3, k, m, g.sup_abs) + 1e-15);
    }
    CHECK(partial_period_bound(3, 2, 1, 1.0) == doctest::Approx(4.0 / 7));
    CHECK_THROWS_AS(partial_period_deviation(pts, phi, 1, 3), ValidationError);
}

TEST_CASE("periodic orbit approximation") {
    TentMap f(2.0);
    auto phi = observable("x");
    auto hit = approximating_periodic_orbit(f, phi, 0.01, 0.5, 1, 12);
    CHECK(hit.deviation <= 0.01);
    CHECK(std::abs(cyclic_average(hit.points, phi, hit.points.size()) - 0.5) <= 0.01);
    try {
        approximating_periodic_orbit(f, phi, 1e-9, 0.123456789, 1, 3);
        FAIL("expected a search failure");
    } catch (const SearchError& e) {
        CHECK(e.best() > 1e-9);
    }
}

TEST_CASE("csv writers") {
    auto dir = std::filesystem::temp_directory_path() / "tentshadow_shadow_csv";
    std::filesystem::create_directories(dir);
    TentMap f(1.8);
    auto pts = periodic_points(f, 2);
    write_periodic_csv(f, pts, dir / "p.csv");
    auto traj = gen_realization(f, UniformKernel(1e-3), 0.2, 20, 1, 0);
    write_shadow_csv(traj.points, shadow_search(f, traj.points, 0.05, 20), dir / "s.csv");
    std::ifstream in(dir / "p.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("itinerary") != std::string::npos);
    std::filesystem::remove_all(dir);
}
