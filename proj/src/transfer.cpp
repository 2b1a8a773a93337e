#include "tentshadow/transfer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include <Eigen/Core>

#include "tentshadow/error.hpp"

namespace tentshadow {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Spread `weight` over the bins covered by [lo, hi] in proportion to overlap.
void spread(Triplets& out, std::size_t row, double lo, double hi, double weight, std::size_t bins) {
    const double h = 1.0 / static_cast<double>(bins);
    const double span = hi - lo;
    auto j = std::min(bins - 1, static_cast<std::size_t>(lo / h));
    if (span <= 0.0) {
        out.emplace_back(static_cast<int>(row), static_cast<int>(j), weight);
        return;
    }
    for (; j < bins; ++j) {
        const double a = static_cast<double>(j) * h;
        if (a >= hi) break;
        const double overlap = std::min(hi, a + h) - std::max(lo, a);
        if (overlap > 0.0) out.emplace_back(static_cast<int>(row), static_cast<int>(j), weight * overlap / span);
    }
}

SparseMatrix from_triplets(std::size_t bins, const Triplets& triplets) {
    SparseMatrix m(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(bins));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

double mean_abs_difference(std::span<const double> a, std::span<const double> b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total / static_cast<double>(a.size());
}

Eigen::Map<const Eigen::VectorXd> view(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

} // namespace

double UlamOperator::row_sum_defect() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < matrix.outerSize(); ++i) {
        double total = 0.0;
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) total += it.value();
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return worst;
}

std::vector<double> UlamOperator::push_forward(std::span<const double> rho) const {
    require(rho.size() == bins, "density size does not match operator");
    Eigen::VectorXd out = matrix.transpose() * view(rho);
    return {out.data(), out.data() + out.size()};
}

std::vector<double> UlamOperator::apply(std::span<const double> phi) const {
    require(phi.size() == bins, "observable size does not match operator");
    Eigen::VectorXd out = matrix * view(phi);
    return {out.data(), out.data() + out.size()};
}

UlamOperator ulam_matrix(const TentMap& map, std::size_t bins) {
    require(bins >= 2, "Ulam grid needs at least two bins");
    const double h = 1.0 / static_cast<double>(bins);
    constexpr double c = TentMap::critical_point;
    Triplets triplets;
    triplets.reserve(bins * 4);
    for (std::size_t i = 0; i < bins; ++i) {
        const double a = static_cast<double>(i) * h;
        const double b = static_cast<double>(i + 1) * h;
        std::array<Interval, 2> pieces;
        std::size_t count = 0;
        if (b <= c || a >= c) {
            pieces[count++] = Interval(a, b);
        } else {
            pieces[count++] = Interval(a, c);
            pieces[count++] = Interval(c, b);
        }
        for (std::size_t p = 0; p < count; ++p) {
            // On each piece f is affine, so the preimage fraction equals the image fraction.
            const auto img = Interval::spanning(map.apply(pieces[p].lo), map.apply(pieces[p].hi));
            spread(triplets, i, img.lo, img.hi, pieces[p].length() / h, bins);
        }
    }
    return {bins, from_triplets(bins, triplets), map.slope(), std::nullopt};
}

SparseMatrix noise_kernel_matrix(double eps, std::size_t bins) {
    require(eps > 0.0, "noise radius must be positive");
    require(bins >= 1, "noise kernel needs at least one bin");
    const double h = 1.0 / static_cast<double>(bins);
    Triplets triplets;
    for (std::size_t i = 0; i < bins; ++i) {
        const double x = (static_cast<double>(i) + 0.5) * h;
        spread(triplets, i, std::max(0.0, x - eps), std::min(1.0, x + eps), 1.0, bins);
    }
    return from_triplets(bins, triplets);
}

UlamOperator perturbed_operator(const TentMap& map, std::size_t bins, double eps) {
    auto op = ulam_matrix(map, bins);
    op.matrix = (op.matrix * noise_kernel_matrix(eps, bins)).pruned();
    op.eps = eps;
    return op;
}

std::size_t BinsRule::bins_for(double eps) const {
    require(eps > 0.0 && factor > 0.0, "bins rule needs positive eps and factor");
    const double want = std::ceil(factor / eps);
    return want >= static_cast<double>(cap) ? cap : std::max<std::size_t>(2, static_cast<std::size_t>(want));
}

StationaryResult stationary_density(const UlamOperator& op, double tol, std::size_t max_iter) {
    require(tol > 0.0, "tolerance must be positive");
    const SparseMatrix transposed = op.matrix.transpose();
    Eigen::VectorXd rho = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(op.bins));
    Eigen::VectorXd next(rho.size());
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        next = 0.5 * (rho + transposed * rho);
        next *= static_cast<double>(op.bins) / next.sum();
        residual = (next - rho).cwiseAbs().sum() / static_cast<double>(op.bins);
        rho.swap(next);
        if (residual <= tol) {
            std::vector<double> values(rho.data(), rho.data() + rho.size());
            for (double& v : values) v = std::max(v, 0.0);
            return {DensityVector::normalized(std::move(values)), residual, iter};
        }
    }
    throw ConvergenceError("stationary density did not converge in " + std::to_string(max_iter) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);
}

std::vector<double> correlation_sequence(const UlamOperator& op, const DensityVector& rho, const Observable& phi,
                                         const Observable& psi, std::size_t n_max) {
    require(rho.bins() == op.bins, "density size does not match operator");
    const std::size_t bins = op.bins;
    const double h = rho.width();
    Eigen::VectorXd g(static_cast<Eigen::Index>(bins));
    Eigen::VectorXd weight(static_cast<Eigen::Index>(bins));
    double mean_phi = 0.0;
    double mean_psi = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        g[k] = phi(rho.center(i));
        weight[k] = psi(rho.center(i)) * rho[i] * h;
        mean_phi += g[k] * rho[i] * h;
        mean_psi += weight[k];
    }
    std::vector<double> out;
    out.reserve(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        out.push_back(g.dot(weight) - mean_phi * mean_psi);
        if (n < n_max) g = op.matrix * g;
    }
    return out;
}

ExponentialFit fit_exponential_rate(std::span<const double> seq, std::size_t first_index) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n = 0; n < seq.size(); ++n) {
        if (std::abs(seq[n]) > 1e-14) {
            xs.push_back(static_cast<double>(n + first_index));
            ys.push_back(std::log(std::abs(seq[n])));
        }
    }
    if (xs.size() < 3) throw NumericalError("exponential fit needs at least 3 entries above 1e-14");
    const auto count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (intercept + slope * xs[k]);
        ss_res += r * r;
    }
    const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return {std::exp(intercept), std::exp(slope), r2, xs.size()};
}

std::vector<std::vector<double>> canonical_bv_test_set(std::size_t bins) {
    require(bins >= 2, "test set needs at least two bins");
    const double h = 1.0 / static_cast<double>(bins);
    auto sample = [&](auto fn) {
        std::vector<double> v(bins);
        for (std::size_t i = 0; i < bins; ++i) v[i] = fn((static_cast<double>(i) + 0.5) * h);
        const double norm = bv_norm(v);
        for (double& x : v) x /= norm;
        return v;
    };
    std::vector<std::vector<double>> set;
    set.push_back(sample([](double) { return 1.0; }));
    set.push_back(sample([](double x) { return x; }));
    set.push_back(sample([](double x) { return 1.0 - x; }));
    for (double t : {0.25, 0.5, 0.75}) {
        set.push_back(sample([t](double x) { return x < t ? 1.0 : 0.0; }));
        set.push_back(sample([t](double x) { return std::max(0.0, 1.0 - std::abs(x - t) / 0.1); }));
    }
    return set;
}

double kl_operator_distance(const TentMap& map, std::size_t bins, double eps,
                            const std::vector<std::vector<double>>& test_set) {
    require(!test_set.empty(), "operator distance needs a nonempty test set");
    const auto unperturbed = ulam_matrix(map, bins);
    const auto noisy = perturbed_operator(map, bins, eps);
    double worst = 0.0;
    for (const auto& g : test_set) {
        require(g.size() == bins, "test function size does not match the grid");
        require(bv_norm(g) <= 1.0 + 1e-9, "test function exceeds unit BV norm");
        const auto a = unperturbed.push_forward(g);
        const auto b = noisy.push_forward(g);
        worst = std::max(worst, mean_abs_difference(a, b));
    }
    return worst;
}

namespace {

constexpr std::array<char, 8> operator_magic{'T', 'S', 'H', 'U', 'L', 'A', 'M', '1'};

template <class T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("truncated operator file");
    return value;
}

} // namespace

void write_operator_binary(const UlamOperator& op, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(operator_magic.data(), operator_magic.size());
    put(out, op.slope);
    put<std::uint64_t>(out, op.bins);
    put(out, op.eps.value_or(0.0));
    std::vector<double> row(op.bins);
    for (std::size_t i = 0; i < op.bins; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (SparseMatrix::InnerIterator it(op.matrix, static_cast<Eigen::Index>(i)); it; ++it)
            row[static_cast<std::size_t>(it.col())] = it.value();
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed for " + path.string());
}

UlamOperator read_operator_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != operator_magic) throw IoError(path.string() + " is not an operator file");
    UlamOperator op;
    op.slope = get<double>(in);
    op.bins = get<std::uint64_t>(in);
    const double eps = get<double>(in);
    if (eps > 0.0) op.eps = eps;
    Triplets triplets;
    std::vector<double> row(op.bins);
    for (std::size_t i = 0; i < op.bins; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!in) throw IoError("truncated operator file " + path.string());
        for (std::size_t j = 0; j < op.bins; ++j)
            if (row[j] != 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), row[j]);
    }
    op.matrix = from_triplets(op.bins, triplets);
    return op;
}

} // namespace tentshadow
