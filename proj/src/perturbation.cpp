#include "tentshadow/perturbation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "tentshadow/error.hpp"
#include "tentshadow/report_io.hpp"

namespace tentshadow {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

UniformKernel::UniformKernel(double eps_, double eps0_) : eps(eps_), eps0(eps0_) {
    require(eps0 > 0.0 && eps0 < 0.5, "eps0 must lie in (0, 1/2)");
    require(eps > 0.0 && eps < eps0, "kernel radius must lie in (0, eps0)");
}

Interval UniformKernel::support(double fx) const {
    return Interval(std::max(0.0, fx - eps), std::min(1.0, fx + eps));
}

double transition_sample(const TentMap& map, const UniformKernel& kernel, double x, Philox& rng) {
    const double fx = map.apply(x);
    const Interval ball = kernel.support(fx);
    double y = std::clamp(ball.lo + rng.uniform() * ball.length(), ball.lo, ball.hi);
    // Rounding in ball.lo/hi can push y one ulp past the radius.
    while (std::abs(y - fx) > kernel.eps) y = std::nextafter(y, fx);
    return y;
}

Pseudotrajectory gen_realization(const TentMap& map, const UniformKernel& kernel, double x0, std::size_t n,
                                 std::uint64_t seed, std::uint64_t stream) {
    require(x0 >= 0.0 && x0 <= 1.0, "initial point outside [0, 1]");
    Pseudotrajectory traj{.points = {}, .slope = map.slope(), .eps = kernel.eps, .seed = seed, .stream = stream};
    traj.points.reserve(n + 1);
    traj.points.push_back(x0);
    Philox rng(seed, stream);
    for (std::size_t k = 0; k < n; ++k) traj.points.push_back(transition_sample(map, kernel, traj.points.back(), rng));
    return traj;
}

Pseudotrajectory gen_stationary_realization(const TentMap& map, const UniformKernel& kernel, std::size_t n,
                                            std::size_t burn_in, std::uint64_t seed, std::uint64_t stream) {
    Philox rng(seed, stream);
    double x = rng.uniform();
    for (std::size_t k = 0; k < burn_in; ++k) x = transition_sample(map, kernel, x, rng);
    Pseudotrajectory traj{.points = {}, .slope = map.slope(), .eps = kernel.eps, .seed = seed, .stream = stream};
    traj.points.reserve(n + 1);
    traj.points.push_back(x);
    for (std::size_t k = 0; k < n; ++k) traj.points.push_back(transition_sample(map, kernel, traj.points.back(), rng));
    return traj;
}

AdmissibilityReport check_admissible(std::span<const double> traj, const TentMap& map, double eps) {
    require(!traj.empty(), "empty trajectory");
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        if (!(std::abs(map(traj[k]) - traj[k + 1]) <= eps)) return {false, k};
    }
    return {};
}

Pseudotrajectory adversarial_pseudotrajectory(const TentMap& map, double eps, std::size_t n, bool allow_fallback) {
    require(eps > 0.0, "eps must be positive");
    require(n >= 1, "adversarial trajectory needs at least one step");
    Pseudotrajectory traj{.points = {}, .slope = map.slope(), .eps = eps, .seed = std::nullopt, .direction = 1};
    double x1 = map.critical_value() + eps;
    if (x1 > 1.0) {
        require(allow_fallback, "f(c) + eps leaves [0, 1] and the downward fallback is disabled");
        x1 = map.critical_value() - eps;
        traj.direction = -1;
    }
    traj.points.reserve(n + 1);
    traj.points.push_back(TentMap::critical_point);
    traj.points.push_back(x1);
    for (std::size_t k = 2; k <= n; ++k) traj.points.push_back(map.apply(traj.points.back()));
    return traj;
}

namespace {

constexpr std::array<char, 8> trajectory_magic{'T', 'S', 'H', 'T', 'R', 'A', 'J', '1'};

template <class T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("truncated trajectory file");
    return value;
}

} // namespace

void write_trajectory_binary(const Pseudotrajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(trajectory_magic.data(), trajectory_magic.size());
    put(out, traj.slope);
    put(out, traj.eps);
    put<std::uint64_t>(out, traj.seed.value_or(0));
    put<std::uint8_t>(out, traj.seed ? 1 : 0);
    put<std::uint64_t>(out, traj.steps());
    out.write(reinterpret_cast<const char*>(traj.points.data()),
              static_cast<std::streamsize>(traj.points.size() * sizeof(double)));
    if (!out) throw IoError("write failed for " + path.string());
}

Pseudotrajectory read_trajectory_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != trajectory_magic) throw IoError(path.string() + " is not a trajectory file");
    Pseudotrajectory traj;
    traj.slope = get<double>(in);
    traj.eps = get<double>(in);
    auto seed = get<std::uint64_t>(in);
    if (get<std::uint8_t>(in)) traj.seed = seed;
    auto n = get<std::uint64_t>(in);
    traj.points.resize(n + 1);
    in.read(reinterpret_cast<char*>(traj.points.data()), static_cast<std::streamsize>((n + 1) * sizeof(double)));
    if (!in) throw IoError("truncated trajectory file " + path.string());
    return traj;
}

void write_trajectory_text(const Pseudotrajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (double x : traj.points) out << format_real(x) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace tentshadow
