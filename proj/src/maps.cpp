#include "tentshadow/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tentshadow/error.hpp"

namespace tentshadow {

TentMap::TentMap(double slope) : s_(slope) {
    require(std::isfinite(slope) && slope >= min_slope && slope <= max_slope,
            "tent slope must lie in [sqrt(2), 2], got " + std::to_string(slope));
}

double TentMap::operator()(double x) const {
    require(x >= 0.0 && x <= 1.0, "tent map argument outside [0, 1]: " + std::to_string(x));
    return apply(x);
}

std::vector<Interval> TentMap::image(const Interval& iv) const {
    if (iv.hi <= critical_point) return {Interval(apply(iv.lo), apply(iv.hi))};
    if (iv.lo >= critical_point) return {Interval(apply(iv.hi), apply(iv.lo))};
    return {Interval(apply(iv.lo), critical_value()), Interval(apply(iv.hi), critical_value())};
}

std::vector<double> orbit(const TentMap& map, double x0, std::size_t n) {
    std::vector<double> out;
    out.reserve(n + 1);
    out.push_back(x0);
    double x = map(x0);
    for (std::size_t k = 1; k <= n; ++k) {
        out.push_back(x);
        x = map.apply(x);
    }
    return out;
}

CriticalOrbitReport detect_periodic_parameter(const TentMap& map, std::size_t n_max, double tol) {
    require(n_max >= 1, "n_max must be at least 1");
    require(tol > 0.0, "tolerance must be positive");
    constexpr double c = TentMap::critical_point;
    CriticalOrbitReport report;
    report.orbit_prefix = orbit(map, c, n_max);
    for (std::size_t k = 1; k <= n_max; ++k) {
        if (std::abs(report.orbit_prefix[k] - c) <= tol) {
            report.period = k;
            break;
        }
    }
    if (report.period) {
        // A period-1 critical point would make the minimum empty; f(c) >= sqrt(2)/2 rules it out.
        double xi = 1.0;
        for (std::size_t k = 1; k < *report.period; ++k)
            xi = std::min(xi, std::abs(c - report.orbit_prefix[k]));
        report.xi = xi;
    }
    return report;
}

namespace {

double critical_return_gap(double s, std::size_t period) {
    TentMap map(s);
    double x = TentMap::critical_point;
    for (std::size_t k = 0; k < period; ++k) x = map.apply(x);
    return x - TentMap::critical_point;
}

double bisect_parameter(std::size_t period, double lo, double hi) {
    double glo = critical_return_gap(lo, period);
    while (hi - lo > 1e-14) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double gmid = critical_return_gap(mid, period);
        if (gmid == 0.0) return mid;
        if ((gmid < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

bool has_minimal_period(double s, std::size_t period) {
    auto report = detect_periodic_parameter(TentMap(s), period, 1e-10);
    return report.period && *report.period == period;
}

} // namespace

double find_periodic_parameter(std::size_t period, Interval bracket) {
    require(period >= 1, "period must be at least 1");
    require(bracket.lo >= TentMap::min_slope && bracket.hi <= TentMap::max_slope,
            "bracket must lie inside [sqrt(2), 2]");
    double glo = critical_return_gap(bracket.lo, period);
    double ghi = critical_return_gap(bracket.hi, period);
    if (glo == 0.0 && has_minimal_period(bracket.lo, period)) return bracket.lo;
    if (ghi == 0.0 && has_minimal_period(bracket.hi, period)) return bracket.hi;
    if ((glo < 0.0) == (ghi < 0.0))
        throw NumericalError("f_s^" + std::to_string(period) + "(c) - c has no sign change over [" +
                             std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) + "]");
    double s = bisect_parameter(period, bracket.lo, bracket.hi);
    auto report = detect_periodic_parameter(TentMap(s), period, 1e-10);
    if (!report.period || *report.period != period)
        throw NumericalError("bracketed root s = " + std::to_string(s) + " does not have minimal critical period " +
                             std::to_string(period));
    return s;
}

std::vector<double> periodic_parameters(std::size_t period, double step, double lo, double hi) {
    require(step > 0.0, "scan step must be positive");
    std::vector<double> roots;
    double a = lo;
    double ga = critical_return_gap(a, period);
    while (a < hi) {
        double b = std::min(hi, a + step);
        double gb = critical_return_gap(b, period);
        if ((ga < 0.0) != (gb < 0.0) || gb == 0.0) {
            double s = gb == 0.0 ? b : bisect_parameter(period, a, b);
            if (has_minimal_period(s, period) && (roots.empty() || s - roots.back() > 1e-12))
                roots.push_back(s);
        }
        a = b;
        ga = gb;
    }
    return roots;
}

std::optional<std::size_t> capture_time(const TentMap& map, double delta, double eps, std::size_t n_max) {
    require(delta > 0.0 && eps > 0.0, "delta and eps must be positive");
    double a = map.critical_value() - delta;
    double b = map.critical_value() + eps;
    require(a >= 0.0 && b <= 1.0, "seed points f(c) - delta and f(c) + eps must lie in [0, 1]");
    for (std::size_t n = 1; n <= n_max; ++n) {
        a = map.apply(a);
        b = map.apply(b);
        if (Interval::spanning(a, b).contains(TentMap::critical_point)) return n;
    }
    return std::nullopt;
}

std::optional<std::size_t> tube_return_time(const TentMap& map, double delta, std::size_t m_max, TubeBase base,
                                            std::size_t cap) {
    require(delta > 0.0 && delta < 0.5, "delta must lie in (0, 1/2)");
    constexpr double c = TentMap::critical_point;
    const std::size_t offset = base == TubeBase::critical_value ? 1 : 0;
    auto crit = orbit(map, c, m_max + offset);
    auto tube = [&](std::size_t i) {
        double centre = crit[i + offset];
        return Interval(std::max(0.0, centre - delta), std::min(1.0, centre + delta));
    };

    IntervalSet set({tube(0)}, cap);
    for (std::size_t m = 1; m <= m_max; ++m) {
        std::vector<Interval> next;
        for (const auto& part : set.parts())
            for (const auto& img : map.image(part)) next.push_back(img);
        set = IntervalSet(std::move(next), cap).intersect(tube(m));
        if (set.empty()) return std::nullopt;
        // Landing exactly on c is a return; allow for rounding in the iterated endpoints.
        const double tol = 1e-12;
        for (const auto& part : set.parts())
            if (part.lo - tol <= c && c <= part.hi + tol) return m;
    }
    return std::nullopt;
}

} // namespace tentshadow
