#include "tentshadow/interval.hpp"

#include <algorithm>
#include <string>

#include "tentshadow/error.hpp"

namespace tentshadow {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    require(lo <= hi, "interval endpoints out of order");
}

Interval Interval::spanning(double a, double b) {
    return a <= b ? Interval(a, b) : Interval(b, a);
}

IntervalSet::IntervalSet(std::vector<Interval> parts, std::size_t cap)
    : parts_(std::move(parts)), cap_(cap) {
    normalize();
}

void IntervalSet::normalize() {
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    merged.reserve(parts_.size());
    for (const auto& iv : parts_) {
        if (!merged.empty() && iv.lo <= merged.back().hi + merge_gap)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    parts_ = std::move(merged);
    if (parts_.size() > cap_)
        throw NumericalError("interval set exceeded component cap of " + std::to_string(cap_));
}

bool IntervalSet::contains(double x) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == parts_.begin()) return false;
    return std::prev(it)->contains(x);
}

const Interval& IntervalSet::largest() const {
    require(!parts_.empty(), "largest() on an empty interval set");
    return *std::max_element(parts_.begin(), parts_.end(), [](const Interval& a, const Interval& b) {
        return a.length() < b.length();
    });
}

double IntervalSet::measure() const {
    double total = 0.0;
    for (const auto& iv : parts_) total += iv.length();
    return total;
}

IntervalSet IntervalSet::intersect(const Interval& window) const {
    std::vector<Interval> out;
    for (const auto& iv : parts_) {
        double lo = std::max(iv.lo, window.lo);
        double hi = std::min(iv.hi, window.hi);
        if (lo <= hi) out.emplace_back(lo, hi);
    }
    return IntervalSet(std::move(out), cap_);
}

} // namespace tentshadow
