#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tentshadow/maps.hpp"
#include "tentshadow/rng.hpp"

namespace tentshadow {

/// Uniform perturbation: the next state is uniform on B_eps(f(x)) truncated to
/// [0, 1] and renormalized. Requires 0 < eps < eps0 < 1/2.
struct UniformKernel {
    static constexpr double default_eps0 = 0.1;

    explicit UniformKernel(double eps, double eps0 = default_eps0);

    double eps;
    double eps0;

    /// Support of the transition law from a point with image fx.
    Interval support(double fx) const;
};

/// A finite eps-pseudotrajectory. `seed` is empty for constructed sequences.
struct Pseudotrajectory {
    std::vector<double> points;
    double slope = 0.0;
    double eps = 0.0;
    std::optional<std::uint64_t> seed;
    std::uint64_t stream = 0;
    int direction = 0;  // sign of the initial jump for adversarial sequences

    std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }
};

/// Draw one transition; always |f(x) - y| <= eps and y in [0, 1].
double transition_sample(const TentMap& map, const UniformKernel& kernel, double x, Philox& rng);

/// n steps of the chain from x0 using stream (seed, stream).
Pseudotrajectory gen_realization(const TentMap& map, const UniformKernel& kernel, double x0, std::size_t n,
                                 std::uint64_t seed, std::uint64_t stream = 0);

/// Advance `burn_in` steps from a uniform draw, then record n steps. The start
/// then approximately follows the stationary law.
Pseudotrajectory gen_stationary_realization(const TentMap& map, const UniformKernel& kernel, std::size_t n,
                                            std::size_t burn_in, std::uint64_t seed, std::uint64_t stream);

struct AdmissibilityReport {
    bool admissible = true;
    std::optional<std::size_t> first_violation;  // index k of the pair (x_k, x_{k+1})

    explicit operator bool() const { return admissible; }
};

AdmissibilityReport check_admissible(std::span<const double> traj, const TentMap& map, double eps);

/// x_0 = c, x_1 = f(c) + eps, x_k = f^{k-1}(x_1). When f(c) + eps leaves [0, 1]
/// and the fallback is allowed, the jump is taken downwards and direction = -1.
Pseudotrajectory adversarial_pseudotrajectory(const TentMap& map, double eps, std::size_t n,
                                              bool allow_fallback = true);

// Binary trajectory file: 8-byte magic "TSHTRAJ1", then little-endian
// f64 slope, f64 eps, u64 seed, u8 has_seed, u64 n (steps), n + 1 f64 points.
void write_trajectory_binary(const Pseudotrajectory& traj, const std::filesystem::path& path);
Pseudotrajectory read_trajectory_binary(const std::filesystem::path& path);
void write_trajectory_text(const Pseudotrajectory& traj, const std::filesystem::path& path);

} // namespace tentshadow
