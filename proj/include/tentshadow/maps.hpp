#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tentshadow/interval.hpp"

namespace tentshadow {

enum class Branch { left, right };

/// Tent map with slope s on [0, 1], turning point c = 1/2:
///   f(x) = s x for x < c, s - s x for x > c, and s/2 at c.
/// The slope is restricted to [sqrt(2), 2].
class TentMap {
public:
    static constexpr double critical_point = 0.5;
    static constexpr double min_slope = 1.4142135623730950488;
    static constexpr double max_slope = 2.0;

    explicit TentMap(double slope);

    double slope() const { return s_; }
    double critical_value() const { return 0.5 * s_; }

    /// Evaluate f(x); throws ValidationError for x outside [0, 1].
    double operator()(double x) const;

    /// Evaluate without the domain check. Used on hot paths after validation.
    double apply(double x) const { return x < critical_point ? s_ * x : (x > critical_point ? s_ - s_ * x : 0.5 * s_); }

    /// Branch label of x. The critical point itself reports `left`; callers that
    /// care use `on_critical_point`.
    Branch branch(double x) const { return x <= critical_point ? Branch::left : Branch::right; }
    static bool on_critical_point(double x) { return x == critical_point; }

    /// Branch-wise inverse: the preimage of y on the given branch.
    double inverse(double y, Branch b) const { return b == Branch::left ? y / s_ : 1.0 - y / s_; }

    /// Image of a closed interval: one interval, or two when it straddles c
    /// (the two pieces overlap at s/2 and are returned separately).
    std::vector<Interval> image(const Interval& iv) const;

private:
    double s_;
};

/// Exact trajectory x0, f(x0), ..., f^n(x0).
std::vector<double> orbit(const TentMap& map, double x0, std::size_t n);

struct CriticalOrbitReport {
    std::optional<std::size_t> period;
    std::optional<double> xi;          // min over 0 < k < N of |c - f^k(c)|
    std::vector<double> orbit_prefix;  // c, c_1, c_2, ...
};

/// Smallest N <= n_max with |f^N(c) - c| <= tol.
CriticalOrbitReport detect_periodic_parameter(const TentMap& map, std::size_t n_max, double tol = 1e-12);

/// Bisection on s -> f_s^N(c) - c over the bracket down to width 1e-14. The
/// root must have minimal critical period N.
double find_periodic_parameter(std::size_t period, Interval bracket);

/// Every parameter in [lo, hi] whose critical point has minimal period N,
/// located by a sign scan at `step` followed by bisection.
std::vector<double> periodic_parameters(std::size_t period, double step = 1e-4,
                                        double lo = TentMap::min_slope, double hi = TentMap::max_slope);

inline constexpr std::size_t default_search_cap = 1000;

/// First n >= 1 with c in <f^n(f(c) - delta), f^n(f(c) + eps)>.
std::optional<std::size_t> capture_time(const TentMap& map, double delta, double eps,
                                        std::size_t n_max = default_search_cap);

/// Which orbit the delta-tube of the return-time set follows.
enum class TubeBase {
    critical_value,  // |f^i(y) - c_{i+1}| <= delta
    critical_point,  // |f^i(y) - c_i| <= delta (literal indexing)
};

/// First m >= 1 with c in E_{m,delta}, the set of m-th iterates of points whose
/// orbit stays in the delta-tube around the critical orbit for steps 0..m.
std::optional<std::size_t> tube_return_time(const TentMap& map, double delta,
                                            std::size_t m_max = default_search_cap,
                                            TubeBase base = TubeBase::critical_value,
                                            std::size_t cap = 4096);

} // namespace tentshadow
