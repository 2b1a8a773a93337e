#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "tentshadow/maps.hpp"
#include "tentshadow/measures.hpp"

namespace tentshadow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row-stochastic Markov matrix on a uniform grid of [0, 1]. Entry (i, j) is the
/// probability of moving from bin i to bin j; densities evolve by the transpose.
struct UlamOperator {
    std::size_t bins = 0;
    SparseMatrix matrix;
    double slope = 0.0;
    std::optional<double> eps;  // empty for the unperturbed operator

    bool perturbed() const { return eps.has_value(); }
    /// Largest |row sum - 1|.
    double row_sum_defect() const;
    /// Push a density one step forward: rho' = P^T rho.
    std::vector<double> push_forward(std::span<const double> rho) const;
    /// Apply to an observable: (P phi)_i = sum_j P_ij phi_j.
    std::vector<double> apply(std::span<const double> phi) const;
};

/// Entry (i, j) = Leb(I_i ∩ f^{-1}(I_j)) / Leb(I_i), from exact piecewise-linear geometry.
UlamOperator ulam_matrix(const TentMap& map, std::size_t bins);

/// Entry (i, j) = mass that the uniform eps-ball around bin i's centre, truncated
/// to [0, 1] and renormalized, assigns to bin j.
SparseMatrix noise_kernel_matrix(double eps, std::size_t bins);

/// Map step followed by noise step: ulam_matrix * noise_kernel_matrix.
UlamOperator perturbed_operator(const TentMap& map, std::size_t bins, double eps);

/// Grid size for stability experiments: ceil(factor / eps), capped.
struct BinsRule {
    double factor = 8.0;
    std::size_t cap = std::size_t{1} << 16;

    std::size_t bins_for(double eps) const;
};

struct StationaryResult {
    DensityVector density;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Power iteration of the lazy chain (I + P) / 2 on densities from the uniform
/// start, renormalized each step, until the L1 change between iterates is <= tol.
/// The lazy chain has the same stationary densities and no eigenvalue at -1.
/// Throws ConvergenceError after max_iter steps.
StationaryResult stationary_density(const UlamOperator& op, double tol = 1e-12, std::size_t max_iter = 200000);

/// c_n = int (P^n phi) psi rho - int phi rho * int psi rho for n = 0..n_max.
std::vector<double> correlation_sequence(const UlamOperator& op, const DensityVector& rho, const Observable& phi,
                                         const Observable& psi, std::size_t n_max);

struct ExponentialFit {
    double amplitude = 0.0;  // C
    double rate = 0.0;       // per-step factor
    double r_squared = 0.0;
    std::size_t points_used = 0;
};

/// Least squares of log|seq_n| against n + first_index over entries with |seq_n| > 1e-14.
ExponentialFit fit_exponential_rate(std::span<const double> seq, std::size_t first_index = 0);

/// Test functions of unit BV norm: constants, ramps, hats and steps.
std::vector<std::vector<double>> canonical_bv_test_set(std::size_t bins);

/// max over the test set of ||(L_0 - L_eps) g||_{L1}, a lower estimate of the
/// operator distance in the BV-to-L1 norm. Test functions must have BV norm <= 1.
double kl_operator_distance(const TentMap& map, std::size_t bins, double eps,
                            const std::vector<std::vector<double>>& test_set);

// Dense binary operator file: 8-byte magic "TSHULAM1", then little-endian
// f64 slope, u64 bins, f64 eps (0 for unperturbed), bins * bins f64 row-major.
void write_operator_binary(const UlamOperator& op, const std::filesystem::path& path);
UlamOperator read_operator_binary(const std::filesystem::path& path);

} // namespace tentshadow
