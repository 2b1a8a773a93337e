#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tentshadow {

/// Closed interval [lo, hi] on the real line.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_);

    /// The closed interval spanned by two unordered endpoints.
    static Interval spanning(double a, double b);

    double length() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains_interior(double x) const { return lo < x && x < hi; }
    bool operator==(const Interval&) const = default;
};

/// Sorted, pairwise disjoint union of closed intervals. Components closer than
/// `merge_gap` are fused; growing past `cap` components throws NumericalError.
class IntervalSet {
public:
    static constexpr double merge_gap = 1e-15;

    explicit IntervalSet(std::size_t cap = 4096) : cap_(cap) {}
    IntervalSet(std::vector<Interval> parts, std::size_t cap);

    std::span<const Interval> parts() const { return parts_; }
    std::size_t size() const { return parts_.size(); }
    bool empty() const { return parts_.empty(); }
    std::size_t cap() const { return cap_; }

    bool contains(double x) const;
    /// Component with the largest length; the set must be nonempty.
    const Interval& largest() const;
    double measure() const;

    IntervalSet intersect(const Interval& window) const;

private:
    void normalize();

    std::vector<Interval> parts_;
    std::size_t cap_;
};

} // namespace tentshadow
