#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tentshadow {

/// Birkhoff average S_n: atoms x_0..x_n, each with weight 1/(n+1).
struct EmpiricalMeasure {
    std::vector<double> atoms;

    std::size_t n() const { return atoms.empty() ? 0 : atoms.size() - 1; }
};

EmpiricalMeasure empirical(std::span<const double> points, std::size_t n);

/// Piecewise-constant density on a uniform grid of [0, 1]. Mean of values is 1.
class DensityVector {
public:
    static constexpr double normalization_tol = 1e-10;

    /// Validates nonnegativity and normalization.
    explicit DensityVector(std::vector<double> values);

    static DensityVector uniform(std::size_t bins);
    /// Rescale nonnegative weights so they integrate to one.
    static DensityVector normalized(std::vector<double> weights);

    std::size_t bins() const { return values_.size(); }
    double width() const { return 1.0 / static_cast<double>(values_.size()); }
    double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * width(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Mass carried by [lo, hi] (bins are treated as uniform).
    double mass(double lo, double hi) const;

private:
    std::vector<double> values_;
};

/// Normalized histogram of points on `bins` equal cells.
DensityVector histogram(std::span<const double> points, std::size_t bins);

enum class Regularity { continuous, lipschitz, bounded_variation };

struct Observable {
    std::string id;
    Regularity regularity = Regularity::continuous;
    double lipschitz_constant = 0.0;  // meaningful for Regularity::lipschitz
    double sup_abs = 0.0;             // sup over [0, 1] of |phi|
    std::function<double(double)> fn;

    double operator()(double x) const { return fn(x); }
};

/// Built-in observables: "x", "x2", "cos2pi", "hat", "step".
Observable observable(const std::string& id);
std::vector<std::string> observable_ids();

using Measure = std::variant<EmpiricalMeasure, DensityVector>;

/// Atom average for empirical measures, midpoint rule at bin centres for densities.
double integrate(const Observable& phi, const EmpiricalMeasure& mu);
double integrate(const Observable& phi, const DensityVector& rho);
double integrate(const Observable& phi, const Measure& mu);

/// |int phi dmu1 - int phi dmu2|.
double dist_mod(const Observable& phi, const Measure& mu1, const Measure& mu2);

double l1_distance(const DensityVector& a, const DensityVector& b);

/// Total variation of the sampled sequence plus its L1 norm on the uniform grid.
double bv_norm(std::span<const double> values);
inline double bv_norm(const DensityVector& rho) { return bv_norm(rho.values()); }

/// CSV with header "bin_center,value".
void write_density_csv(const DensityVector& rho, const std::filesystem::path& path);

} // namespace tentshadow
