#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tentshadow/maps.hpp"
#include "tentshadow/measures.hpp"
#include "tentshadow/shadowing.hpp"
#include "tentshadow/transfer.hpp"

namespace tentshadow {

/// Stationary densities of the perturbed chain (mu_eps) and of the map (mu) on one grid.
struct StationaryPair {
    double eps = 0.0;
    std::size_t bins = 0;
    StationaryResult perturbed;
    StationaryResult unperturbed;
};

StationaryPair compute_stationary_pair(const TentMap& map, double eps, const BinsRule& rule = {},
                                       double tol = 1e-12);

struct DeviationTriple {
    double d_pseudo_stat = 0.0;  // |int phi dS_n(xbar) - int phi dmu_eps|
    double d_true_inv = 0.0;     // |int phi dS_n(p) - int phi dmu|
    double d_pseudo_true = 0.0;  // |int phi dS_n(xbar) - int phi dS_n(p)|

    double max() const;
};

/// How the comparison point p is chosen.
enum class ComparisonRoute {
    periodic,  // a periodic orbit whose mean approximates int phi dmu
    shadow,    // a classical shadow of the realization itself
};

struct StochShadowOptions {
    std::size_t burn_in = 10000;
    double threshold_factor = 10.0;  // membership in B: every deviation <= factor * eps
    ComparisonRoute route = ComparisonRoute::periodic;
    std::size_t period_min = 1;
    std::size_t period_cap = 16;
    std::optional<double> shadow_accuracy;  // shadow route; defaults to threshold_factor * eps
    std::size_t ladder_start = 1000;        // per-n deviations at ladder_start * 2^j <= n
    BinsRule bins_rule{};
    double stationary_tol = 1e-12;
    std::size_t threads = 0;  // 0 = hardware concurrency
};

struct LadderDeviation {
    std::size_t n = 0;
    DeviationTriple triple;
};

struct TrialRecord {
    std::size_t trial = 0;
    DeviationTriple triple;                // at the full horizon n
    bool in_b = false;
    bool chain_holds = false;              // d_pseudo_true <= d_pseudo_stat + dist(mu_eps, mu) + d_true_inv
    bool mirrored_chain_holds = false;     // dist(mu, mu_eps) <= d_true_inv + d_pseudo_true + d_pseudo_stat
    bool shadow_failed = false;
    std::vector<LadderDeviation> ladder;
};

struct ExperimentReport {
    double slope = 0.0;
    double eps = 0.0;
    std::string phi_id;
    std::size_t n = 0;
    std::size_t ladder_start = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t bins = 0;
    double threshold_factor = 0.0;
    std::string route;
    double mean_stationary = 0.0;  // int phi dmu_eps
    double mean_invariant = 0.0;   // int phi dmu
    std::optional<PeriodicOrbit> comparison_orbit;
    double comparison_deviation = 0.0;
    double fraction_in_b = 0.0;
    double c_phi_estimate = 0.0;  // max over trials of max(triple) / eps
    std::vector<TrialRecord> records;
};

ExperimentReport stochastic_shadowing_trial(const TentMap& map, double eps, const Observable& phi, std::size_t n,
                                            std::size_t trials, std::uint64_t seed,
                                            const StochShadowOptions& options = {});
/// Same, reusing precomputed stationary densities.
ExperimentReport stochastic_shadowing_trial(const TentMap& map, const StationaryPair& stationary,
                                            const Observable& phi, std::size_t n, std::size_t trials,
                                            std::uint64_t seed, const StochShadowOptions& options = {});

struct PropertyARung {
    std::size_t cutoff = 0;  // N
    double fraction = 0.0;   // share of realizations with deviation < delta for every n in (N, n_max]
};

/// Rungs N = n0, 2 n0, 4 n0, ... < n_max. Empty when trials == 0.
std::vector<PropertyARung> property_a_fraction(const TentMap& map, double eps, const Observable& phi, double delta,
                                               std::size_t n0, std::size_t n_max, std::size_t trials,
                                               std::uint64_t seed, const StochShadowOptions& options = {});

struct StabilityEntry {
    double eps = 0.0;
    std::size_t bins = 0;
    double distance = 0.0;  // ||rho - rho_eps||_{L1}
};

struct StabilityFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<StabilityEntry> entries;
};

/// Least squares of log ||rho - rho_eps||_{L1} against log eps over a geometric eps grid (>= 3 points).
StabilityFit stability_speed_fit(const TentMap& map, std::span<const double> eps_grid, const BinsRule& rule = {},
                                 double tol = 1e-12);
StabilityFit fit_stability(std::vector<StabilityEntry> entries);

struct SweepCell {
    double slope = 0.0;
    double eps = 0.0;
    std::size_t bins = 0;
    std::optional<double> l1_distance;
    std::vector<ExperimentReport> reports;  // one per observable that succeeded
    std::vector<std::string> failures;      // "<phi>: <message>"
};

struct UniformitySummary {
    std::string phi_id;
    double max_c_phi = 0.0;
    double argmax_slope = 0.0;
    bool single_constant = false;  // max_c_phi <= threshold_factor
};

struct SweepReport {
    std::vector<SweepCell> cells;
    std::vector<std::pair<double, std::optional<StabilityFit>>> fits;  // per slope; empty optional when < 3 eps
    std::vector<UniformitySummary> summary;
    std::vector<CkyLadderEntry> cky_ladder;
};

struct SweepOptions {
    StochShadowOptions shadow{};
    std::size_t n = 10000;
    std::vector<std::size_t> cky_periods{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    Interval cky_window{TentMap::min_slope, TentMap::max_slope};
};

SweepReport uniform_family_sweep(std::span<const double> s_grid, std::span<const double> eps_grid,
                                 std::span<const std::string> phi_ids, std::size_t trials, std::uint64_t seed,
                                 const SweepOptions& options = {});

// Serialization: structured JSON document plus one CSV row per trial / cell.
void write_report_json(const ExperimentReport& report, const std::filesystem::path& path);
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);
void write_sweep_json(const SweepReport& report, const std::filesystem::path& path);
void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path);

} // namespace tentshadow
