#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tentshadow/maps.hpp"
#include "tentshadow/measures.hpp"
#include "tentshadow/perturbation.hpp"

namespace tentshadow {

struct ShadowResult {
    std::optional<double> point;
    double achieved = 0.0;              // max_k |x_k - y_k| over the checked horizon
    std::size_t horizon = 0;            // steps checked; the failing step when no point exists
    std::optional<std::size_t> failed_at;
    std::vector<double> orbit;          // y_0..y_horizon, empty on failure
};

/// Find p with |x_k - f^k(p)| <= accuracy for k = 0..horizon.
///
/// The forward pass keeps W_k = f^k(S_k), where S_k is the set of initial points
/// whose first k iterates track x_0..x_k; W_k is an interval union obtained by
/// pushing W_{k-1} through the two affine branches and intersecting with the
/// accuracy window around x_k. The backward pass starts at the midpoint of the
/// largest component of W_horizon and pulls back branch-wise, staying inside each
/// W_k. Backward steps contract by 1/s, so the returned orbit is accurate to
/// rounding even for horizons where forward iteration would be useless.
ShadowResult shadow_search(const TentMap& map, std::span<const double> traj, double accuracy, std::size_t horizon,
                           std::size_t cap = std::size_t{1} << 14);

/// Independent re-check of a returned orbit: every |x_k - y_k| <= accuracy and
/// every |f(y_k) - y_{k+1}| <= step_tol.
bool verify_shadow(const TentMap& map, std::span<const double> traj, const ShadowResult& result, double accuracy,
                   double step_tol = 1e-12);

struct CkyBounds {
    double eps_threshold = 0.0;  // delta (s-1) (m+1)^{-1} s^{-m-1}
    double accuracy = 0.0;       // ((s-1)^{-1} + s^4) (m+1) s^{m+1} eps
    bool eps_admissible = false; // eps < eps_threshold
};

CkyBounds cky_bounds(const TentMap& map, std::size_t m, double delta, double eps);

/// Accuracy constant ((s-1)^{-1} + s^4) (m+1) s^{m+1}, i.e. accuracy / eps.
double cky_constant(double slope, std::size_t m);

struct LowerBoundResult {
    std::size_t n_eps = 0;
    double bound = 0.0;   // s^{n_eps - 1} eps
    int direction = 1;    // sign of the adversarial jump
    double x_eps = 0.0;   // f^2 of the admissible shadow window edge
    double x2 = 0.0;      // second point of the adversarial trajectory
};

/// First n >= 1 with c strictly inside <f^n(x_eps), f^n(x_2)>, where x_2 is the
/// adversarial trajectory's second point and x_eps = f^2(c) is the image of the
/// edge of the window any true orbit must use at step one.
LowerBoundResult lower_bound_demo(const TentMap& map, double eps, std::size_t n_cap = default_search_cap);

struct PeriodicOrbit {
    double point = 0.0;
    std::size_t period = 0;          // point is a fixed point of f^period
    std::size_t minimal_period = 0;
    std::string itinerary;           // 'L' / 'R' per step
};

inline constexpr std::size_t max_itinerary_length = 20;

/// Visit every valid fixed point of f^n: one candidate per itinerary, solved in
/// closed form, kept if its orbit realizes the itinerary. The callback receives
/// the itinerary bits (bit k set = right branch) and the orbit points.
void for_each_periodic_point(const TentMap& map, std::size_t n,
                             const std::function<void(std::uint32_t, std::span<const double>)>& visit);

/// Distinct fixed points of f^n, sorted by position.
std::vector<PeriodicOrbit> periodic_points(const TentMap& map, std::size_t n, bool primitive_only = false);

/// Orbit points of a periodic orbit, recomputed by backward pull-back.
std::vector<double> orbit_points(const TentMap& map, const PeriodicOrbit& orbit);

/// Average of phi over the first `count` points of the cyclic orbit.
double cyclic_average(std::span<const double> points, const Observable& phi, std::size_t count);

struct OrbitApproximation {
    PeriodicOrbit orbit;
    std::vector<double> points;
    double deviation = 0.0;  // |orbit mean of phi - target|
};

/// First periodic orbit (by period, then itinerary) whose mean of phi lies within
/// delta of `target`. Throws SearchError carrying the best deviation otherwise.
OrbitApproximation approximating_periodic_orbit(const TentMap& map, const Observable& phi, double delta,
                                                double target, std::size_t n_min, std::size_t n_cap);
OrbitApproximation approximating_periodic_orbit(const TentMap& map, const Observable& phi, double delta,
                                                const DensityVector& rho_ref, std::size_t n_min, std::size_t n_cap);

/// |int phi dS_{nk+m-1}(p) - int phi dS_{nk-1}(p)| for a period-n orbit.
double partial_period_deviation(std::span<const double> points, const Observable& phi, std::size_t k, std::size_t m);

/// 2 sup|phi| (m+1) / (nk+m).
double partial_period_bound(std::size_t period, std::size_t k, std::size_t m, double sup_abs);

struct CkyLadderEntry {
    std::size_t period = 0;
    double slope = 0.0;
    double constant = 0.0;  // cky_constant(slope, period)
};

/// For each period N, the smallest N-periodic parameter inside `window` and its
/// accuracy constant with m = N. Periods without a parameter in the window are skipped.
std::vector<CkyLadderEntry> cky_constant_ladder(std::span<const std::size_t> periods, Interval window);

void write_periodic_csv(const TentMap& map, std::span<const PeriodicOrbit> orbits, const std::filesystem::path& path);
void write_shadow_csv(std::span<const double> traj, const ShadowResult& result, const std::filesystem::path& path);

} // namespace tentshadow
