#include "tentshadow/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tentshadow/error.hpp"
#include "tentshadow/report_io.hpp"

namespace tentshadow {

namespace {

// Shrink accuracy windows by a few ulps so rounding cannot push a returned
// orbit past the requested accuracy.
Interval tracking_window(double x, double accuracy) {
    const double guard = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x) + accuracy);
    return Interval(std::max(0.0, x - accuracy + guard), std::min(1.0, x + accuracy - guard));
}

double depth(const IntervalSet& set, double x) {
    for (const auto& part : set.parts())
        if (part.contains(x)) return std::min(x - part.lo, part.hi - x);
    return -std::numeric_limits<double>::infinity();
}

double nearest_member(const IntervalSet& set, double x) {
    double best = x;
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& part : set.parts()) {
        const double y = std::clamp(x, part.lo, part.hi);
        if (std::abs(y - x) < gap) {
            gap = std::abs(y - x);
            best = y;
        }
    }
    return best;
}

} // namespace

ShadowResult shadow_search(const TentMap& map, std::span<const double> traj, double accuracy, std::size_t horizon,
                           std::size_t cap) {
    require(accuracy > 0.0, "shadowing accuracy must be positive");
    require(!traj.empty() && horizon + 1 <= traj.size(), "horizon exceeds trajectory length");

    ShadowResult result;
    const auto first = tracking_window(traj[0], accuracy);
    std::vector<IntervalSet> windows;
    windows.reserve(horizon + 1);
    windows.emplace_back(std::vector<Interval>{first}, cap);
    for (std::size_t k = 1; k <= horizon; ++k) {
        std::vector<Interval> images;
        for (const auto& part : windows.back().parts())
            for (const auto& img : map.image(part)) images.push_back(img);
        auto next = IntervalSet(std::move(images), cap).intersect(tracking_window(traj[k], accuracy));
        if (next.empty()) {
            result.achieved = std::numeric_limits<double>::infinity();
            result.horizon = k;
            result.failed_at = k;
            return result;
        }
        windows.push_back(std::move(next));
    }

    std::vector<double> ys(horizon + 1);
    ys[horizon] = windows[horizon].largest().midpoint();
    for (std::size_t k = horizon; k > 0; --k) {
        const auto& target = windows[k - 1];
        const double y = ys[k];
        double best = std::numeric_limits<double>::quiet_NaN();
        double best_depth = -std::numeric_limits<double>::infinity();
        for (Branch b : {Branch::left, Branch::right}) {
            const double candidate = map.inverse(y, b);
            const double d = depth(target, candidate);
            if (d > best_depth) {
                best_depth = d;
                best = candidate;
            }
        }
        if (best_depth == -std::numeric_limits<double>::infinity())
            best = nearest_member(target, map.inverse(y, y <= 0.5 * map.slope() ? Branch::left : Branch::right));
        ys[k - 1] = best;
    }

    double achieved = 0.0;
    for (std::size_t k = 0; k <= horizon; ++k) achieved = std::max(achieved, std::abs(traj[k] - ys[k]));
    result.point = ys[0];
    result.achieved = achieved;
    result.horizon = horizon;
    result.orbit = std::move(ys);
    return result;
}

bool verify_shadow(const TentMap& map, std::span<const double> traj, const ShadowResult& result, double accuracy,
                   double step_tol) {
    if (!result.point || result.orbit.size() != result.horizon + 1 || traj.size() < result.orbit.size()) return false;
    if (result.orbit.front() != *result.point) return false;
    for (std::size_t k = 0; k < result.orbit.size(); ++k) {
        const double y = result.orbit[k];
        if (!(y >= 0.0 && y <= 1.0)) return false;
        if (!(std::abs(traj[k] - y) <= accuracy)) return false;
        if (k + 1 < result.orbit.size() && !(std::abs(map.apply(y) - result.orbit[k + 1]) <= step_tol)) return false;
    }
    return true;
}

double cky_constant(double slope, std::size_t m) {
    const double m1 = static_cast<double>(m + 1);
    return (1.0 / (slope - 1.0) + std::pow(slope, 4)) * m1 * std::pow(slope, m1);
}

CkyBounds cky_bounds(const TentMap& map, std::size_t m, double delta, double eps) {
    require(delta > 0.0 && eps > 0.0, "delta and eps must be positive");
    const double s = map.slope();
    const double m1 = static_cast<double>(m + 1);
    CkyBounds bounds;
    bounds.eps_threshold = delta * (s - 1.0) / m1 * std::pow(s, -m1);
    bounds.accuracy = cky_constant(s, m) * eps;
    bounds.eps_admissible = eps < bounds.eps_threshold;
    return bounds;
}

LowerBoundResult lower_bound_demo(const TentMap& map, double eps, std::size_t n_cap) {
    const auto adversarial = adversarial_pseudotrajectory(map, eps, 2);
    LowerBoundResult result;
    result.direction = adversarial.direction;
    result.x2 = adversarial.points[2];
    result.x_eps = map.apply(map.critical_value());
    double a = result.x_eps;
    double b = result.x2;
    for (std::size_t n = 1; n <= n_cap; ++n) {
        a = map.apply(a);
        b = map.apply(b);
        if (Interval::spanning(a, b).contains_interior(TentMap::critical_point)) {
            result.n_eps = n;
            result.bound = std::pow(map.slope(), static_cast<double>(n) - 1.0) * eps;
            return result;
        }
    }
    throw NumericalError("critical point never separates the two orbits within " + std::to_string(n_cap) +
                         " steps");
}

void for_each_periodic_point(const TentMap& map, std::size_t n,
                             const std::function<void(std::uint32_t, std::span<const double>)>& visit) {
    require(n >= 1 && n <= max_itinerary_length, "period must lie in [1, 20]");
    constexpr double side_tol = 1e-13;
    constexpr double c = TentMap::critical_point;
    const double s = map.slope();
    std::vector<double> pts(n);
    const std::uint32_t words = std::uint32_t{1} << n;
    for (std::uint32_t w = 0; w < words; ++w) {
        double slope = 1.0;
        double offset = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (w >> k & 1U) {
                slope = -s * slope;
                offset = s - s * offset;
            } else {
                slope *= s;
                offset *= s;
            }
        }
        const double x0 = offset / (1.0 - slope);
        if (!(x0 >= -side_tol && x0 <= 1.0 + side_tol)) continue;
        pts[0] = std::clamp(x0, 0.0, 1.0);
        // Pull back along the itinerary; x_{n-1} is the preimage of x_0.
        double y = pts[0];
        bool valid = true;
        for (std::size_t k = n; k-- > 1;) {
            y = map.inverse(y, (w >> k & 1U) ? Branch::right : Branch::left);
            if (y < -side_tol || y > 1.0 + side_tol) {
                valid = false;
                break;
            }
            pts[k] = std::clamp(y, 0.0, 1.0);
        }
        if (!valid) continue;
        for (std::size_t k = 0; k < n && valid; ++k) {
            const bool right = w >> k & 1U;
            valid = right ? pts[k] >= c - side_tol : pts[k] <= c + side_tol;
        }
        if (!valid) continue;
        visit(w, pts);
    }
}

namespace {

std::string itinerary_string(std::uint32_t w, std::size_t n) {
    std::string out(n, 'L');
    for (std::size_t k = 0; k < n; ++k)
        if (w >> k & 1U) out[k] = 'R';
    return out;
}

std::size_t minimal_period_of(std::span<const double> pts) {
    const std::size_t n = pts.size();
    for (std::size_t d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        if (std::abs(pts[d] - pts[0]) <= 1e-12) return d;
    }
    return n;
}

} // namespace

std::vector<PeriodicOrbit> periodic_points(const TentMap& map, std::size_t n, bool primitive_only) {
    std::vector<PeriodicOrbit> out;
    for_each_periodic_point(map, n, [&](std::uint32_t w, std::span<const double> pts) {
        const std::size_t minimal = minimal_period_of(pts);
        if (primitive_only && minimal != n) return;
        out.push_back({pts[0], n, minimal, itinerary_string(w, n)});
    });
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.point < b.point; });
    // Distinct words give the same point only when the orbit passes through c.
    std::vector<PeriodicOrbit> unique;
    unique.reserve(out.size());
    for (auto& orbit : out)
        if (unique.empty() || orbit.point - unique.back().point > 1e-13) unique.push_back(std::move(orbit));
    return unique;
}

std::vector<double> orbit_points(const TentMap& map, const PeriodicOrbit& orbit) {
    const std::size_t n = orbit.itinerary.size();
    require(n == orbit.period && n >= 1, "itinerary length must equal the period");
    std::vector<double> pts(n);
    pts[0] = orbit.point;
    double y = orbit.point;
    for (std::size_t k = n; k-- > 1;) {
        y = std::clamp(map.inverse(y, orbit.itinerary[k] == 'R' ? Branch::right : Branch::left), 0.0, 1.0);
        pts[k] = y;
    }
    return pts;
}

double cyclic_average(std::span<const double> points, const Observable& phi, std::size_t count) {
    require(!points.empty() && count >= 1, "cyclic average needs points and a positive count");
    const std::size_t n = points.size();
    double cycle = 0.0;
    for (double x : points) cycle += phi(x);
    double partial = 0.0;
    for (std::size_t k = 0; k < count % n; ++k) partial += phi(points[k]);
    return (static_cast<double>(count / n) * cycle + partial) / static_cast<double>(count);
}

OrbitApproximation approximating_periodic_orbit(const TentMap& map, const Observable& phi, double delta,
                                                double target, std::size_t n_min, std::size_t n_cap) {
    require(delta > 0.0, "approximation tolerance must be positive");
    require(n_min >= 1 && n_min <= n_cap && n_cap <= max_itinerary_length, "period range must lie in [1, 20]");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n = n_min; n <= n_cap; ++n) {
        std::optional<OrbitApproximation> found;
        for_each_periodic_point(map, n, [&](std::uint32_t w, std::span<const double> pts) {
            if (found) return;
            double total = 0.0;
            for (double x : pts) total += phi(x);
            const double deviation = std::abs(total / static_cast<double>(n) - target);
            best = std::min(best, deviation);
            if (deviation <= delta) {
                PeriodicOrbit orbit{pts[0], n, minimal_period_of(pts), itinerary_string(w, n)};
                found = OrbitApproximation{orbit, {pts.begin(), pts.end()}, deviation};
            }
        });
        if (found) return *found;
    }
    throw SearchError("no periodic orbit with period in [" + std::to_string(n_min) + ", " + std::to_string(n_cap) +
                          "] has mean within " + format_real(delta) + "; best deviation " + format_real(best),
                      best);
}

OrbitApproximation approximating_periodic_orbit(const TentMap& map, const Observable& phi, double delta,
                                                const DensityVector& rho_ref, std::size_t n_min, std::size_t n_cap) {
    return approximating_periodic_orbit(map, phi, delta, integrate(phi, rho_ref), n_min, n_cap);
}

double partial_period_deviation(std::span<const double> points, const Observable& phi, std::size_t k, std::size_t m) {
    const std::size_t n = points.size();
    require(k >= 1, "k must be positive");
    require(m > 0 && m < n, "m must satisfy 0 < m < period");
    return std::abs(cyclic_average(points, phi, n * k + m) - cyclic_average(points, phi, n * k));
}

double partial_period_bound(std::size_t period, std::size_t k, std::size_t m, double sup_abs) {
    return 2.0 * sup_abs * static_cast<double>(m + 1) / static_cast<double>(period * k + m);
}

std::vector<CkyLadderEntry> cky_constant_ladder(std::span<const std::size_t> periods, Interval window) {
    std::vector<CkyLadderEntry> out;
    for (std::size_t period : periods) {
        const auto roots = periodic_parameters(period, 1e-4, std::max(window.lo, TentMap::min_slope),
                                               std::min(window.hi, TentMap::max_slope));
        if (roots.empty()) continue;
        out.push_back({period, roots.front(), cky_constant(roots.front(), period)});
    }
    return out;
}

void write_periodic_csv(const TentMap& map, std::span<const PeriodicOrbit> orbits, const std::filesystem::path& path) {
    CsvWriter csv(path, {"point", "period", "minimal_period", "itinerary", "residual"});
    for (const auto& orbit : orbits) {
        const auto pts = orbit_points(map, orbit);
        double residual = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k)
            residual = std::max(residual, std::abs(map.apply(pts[k]) - pts[(k + 1) % pts.size()]));
        csv.row(orbit.point, orbit.period, orbit.minimal_period, orbit.itinerary, residual);
    }
}

void write_shadow_csv(std::span<const double> traj, const ShadowResult& result, const std::filesystem::path& path) {
    CsvWriter csv(path, {"k", "x_k", "y_k", "deviation"});
    for (std::size_t k = 0; k < result.orbit.size(); ++k)
        csv.row(k, traj[k], result.orbit[k], std::abs(traj[k] - result.orbit[k]));
}

} // namespace tentshadow
