#include "tentshadow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tentshadow/error.hpp"
#include "tentshadow/report_io.hpp"

namespace tentshadow {

EmpiricalMeasure empirical(std::span<const double> points, std::size_t n) {
    require(points.size() >= n + 1, "empirical measure S_n needs n + 1 points");
    EmpiricalMeasure mu;
    mu.atoms.assign(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(n + 1));
    for (double x : mu.atoms) require(x >= 0.0 && x <= 1.0, "atom outside [0, 1]");
    return mu;
}

DensityVector::DensityVector(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), "density needs at least one bin");
    double total = 0.0;
    for (double v : values_) {
        require(std::isfinite(v) && v >= 0.0, "density values must be finite and nonnegative");
        total += v;
    }
    require(std::abs(total / static_cast<double>(values_.size()) - 1.0) <= normalization_tol,
            "density does not integrate to one");
}

DensityVector DensityVector::uniform(std::size_t bins) {
    return DensityVector(std::vector<double>(bins, 1.0));
}

DensityVector DensityVector::normalized(std::vector<double> weights) {
    require(!weights.empty(), "density needs at least one bin");
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    require(total > 0.0, "cannot normalize zero weights");
    const double scale = static_cast<double>(weights.size()) / total;
    for (double& w : weights) w *= scale;
    return DensityVector(std::move(weights));
}

double DensityVector::mass(double lo, double hi) const {
    lo = std::clamp(lo, 0.0, 1.0);
    hi = std::clamp(hi, 0.0, 1.0);
    if (hi <= lo) return 0.0;
    const double h = width();
    double total = 0.0;
    auto first = static_cast<std::size_t>(lo / h);
    for (std::size_t i = first; i < bins(); ++i) {
        double a = static_cast<double>(i) * h;
        if (a >= hi) break;
        double overlap = std::min(hi, a + h) - std::max(lo, a);
        if (overlap > 0.0) total += values_[i] * overlap;
    }
    return total;
}

DensityVector histogram(std::span<const double> points, std::size_t bins) {
    require(bins >= 1, "histogram needs at least one bin");
    require(!points.empty(), "histogram of an empty point set");
    std::vector<double> counts(bins, 0.0);
    for (double x : points) {
        require(x >= 0.0 && x <= 1.0, "histogram point outside [0, 1]");
        auto i = std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
        counts[i] += 1.0;
    }
    return DensityVector::normalized(std::move(counts));
}

Observable observable(const std::string& id) {
    using std::numbers::pi;
    if (id == "x") return {id, Regularity::lipschitz, 1.0, 1.0, [](double x) { return x; }};
    if (id == "x2") return {id, Regularity::lipschitz, 2.0, 1.0, [](double x) { return x * x; }};
    if (id == "cos2pi")
        return {id, Regularity::lipschitz, 2.0 * pi, 1.0, [](double x) { return std::cos(2.0 * pi * x); }};
    if (id == "hat")
        return {id, Regularity::lipschitz, 1.0, 0.5, [](double x) { return 0.5 - std::abs(x - 0.5); }};
    if (id == "step")
        return {id, Regularity::bounded_variation, 0.0, 1.0, [](double x) { return x < 0.5 ? 1.0 : 0.0; }};
    throw ValidationError("unknown observable '" + id + "'");
}

std::vector<std::string> observable_ids() { return {"x", "x2", "cos2pi", "hat", "step"}; }

double integrate(const Observable& phi, const EmpiricalMeasure& mu) {
    require(!mu.atoms.empty(), "empirical measure has no atoms");
    double total = 0.0;
    for (double x : mu.atoms) total += phi(x);
    return total / static_cast<double>(mu.atoms.size());
}

double integrate(const Observable& phi, const DensityVector& rho) {
    double total = 0.0;
    for (std::size_t i = 0; i < rho.bins(); ++i) total += phi(rho.center(i)) * rho[i];
    return total * rho.width();
}

double integrate(const Observable& phi, const Measure& mu) {
    return std::visit([&](const auto& m) { return integrate(phi, m); }, mu);
}

double dist_mod(const Observable& phi, const Measure& mu1, const Measure& mu2) {
    return std::abs(integrate(phi, mu1) - integrate(phi, mu2));
}

double l1_distance(const DensityVector& a, const DensityVector& b) {
    require(a.bins() == b.bins(), "density bin counts differ");
    double total = 0.0;
    for (std::size_t i = 0; i < a.bins(); ++i) total += std::abs(a[i] - b[i]);
    return total * a.width();
}

double bv_norm(std::span<const double> values) {
    require(!values.empty(), "BV norm of an empty sequence");
    double variation = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        l1 += std::abs(values[i]);
        if (i > 0) variation += std::abs(values[i] - values[i - 1]);
    }
    return variation + l1 / static_cast<double>(values.size());
}

void write_density_csv(const DensityVector& rho, const std::filesystem::path& path) {
    CsvWriter csv(path, {"bin_center", "value"});
    for (std::size_t i = 0; i < rho.bins(); ++i) csv.row(rho.center(i), rho[i]);
}

} // namespace tentshadow
