#include "tentshadow/stochshadow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "tentshadow/error.hpp"
#include "tentshadow/parallel.hpp"
#include "tentshadow/perturbation.hpp"
#include "tentshadow/report_io.hpp"

namespace tentshadow {

namespace {

constexpr double chain_slack = 8.0 * std::numeric_limits<double>::epsilon();

std::vector<std::size_t> doubling_ladder(std::size_t start, std::size_t limit) {
    std::vector<std::size_t> out;
    for (std::size_t n = std::max<std::size_t>(start, 1); n < limit; n *= 2) out.push_back(n);
    out.push_back(limit);
    return out;
}

// Prefix sums of phi along a sequence: sums[k] = phi(x_0) + ... + phi(x_k).
std::vector<double> prefix_sums(std::span<const double> xs, const Observable& phi) {
    std::vector<double> sums(xs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        total += phi(xs[k]);
        sums[k] = total;
    }
    return sums;
}

DeviationTriple make_triple(double pseudo_mean, double true_mean, double stationary_mean, double invariant_mean) {
    return {std::abs(pseudo_mean - stationary_mean), std::abs(true_mean - invariant_mean),
            std::abs(pseudo_mean - true_mean)};
}

const char* route_name(ComparisonRoute route) {
    return route == ComparisonRoute::periodic ? "periodic" : "shadow";
}

} // namespace

double DeviationTriple::max() const { return std::max({d_pseudo_stat, d_true_inv, d_pseudo_true}); }

StationaryPair compute_stationary_pair(const TentMap& map, double eps, const BinsRule& rule, double tol) {
    const std::size_t bins = rule.bins_for(eps);
    return {eps, bins, stationary_density(perturbed_operator(map, bins, eps), tol),
            stationary_density(ulam_matrix(map, bins), tol)};
}

ExperimentReport stochastic_shadowing_trial(const TentMap& map, double eps, const Observable& phi, std::size_t n,
                                            std::size_t trials, std::uint64_t seed,
                                            const StochShadowOptions& options) {
    const auto stationary = compute_stationary_pair(map, eps, options.bins_rule, options.stationary_tol);
    return stochastic_shadowing_trial(map, stationary, phi, n, trials, seed, options);
}

ExperimentReport stochastic_shadowing_trial(const TentMap& map, const StationaryPair& stationary,
                                            const Observable& phi, std::size_t n, std::size_t trials,
                                            std::uint64_t seed, const StochShadowOptions& options) {
    require(n >= 1, "horizon must be at least 1");
    require(options.threshold_factor > 0.0, "threshold factor must be positive");
    const double eps = stationary.eps;
    const UniformKernel kernel(eps);

    ExperimentReport report;
    report.slope = map.slope();
    report.eps = eps;
    report.phi_id = phi.id;
    report.n = n;
    report.ladder_start = options.ladder_start;
    report.trials = trials;
    report.seed = seed;
    report.bins = stationary.bins;
    report.threshold_factor = options.threshold_factor;
    report.route = route_name(options.route);
    report.mean_stationary = integrate(phi, stationary.perturbed.density);
    report.mean_invariant = integrate(phi, stationary.unperturbed.density);
    const double measure_gap = std::abs(report.mean_stationary - report.mean_invariant);

    std::optional<OrbitApproximation> approximation;
    if (options.route == ComparisonRoute::periodic) {
        approximation = approximating_periodic_orbit(map, phi, eps, report.mean_invariant, options.period_min,
                                                     options.period_cap);
        report.comparison_orbit = approximation->orbit;
        report.comparison_deviation = approximation->deviation;
    }
    const double shadow_accuracy = options.shadow_accuracy.value_or(options.threshold_factor * eps);
    const auto ladder = doubling_ladder(options.ladder_start, n);

    report.records.resize(trials);
    parallel_for(trials, options.threads, [&](std::size_t t) {
        const auto realization = gen_stationary_realization(map, kernel, n, options.burn_in, seed, t);
        const auto pseudo_sums = prefix_sums(realization.points, phi);
        TrialRecord record;
        record.trial = t;

        std::vector<double> true_sums;
        if (options.route == ComparisonRoute::shadow) {
            const auto shadow = shadow_search(map, realization.points, shadow_accuracy, n);
            if (!shadow.point) {
                record.shadow_failed = true;
                record.triple = {std::abs(pseudo_sums.back() / static_cast<double>(n + 1) - report.mean_stationary),
                                 std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
                report.records[t] = std::move(record);
                return;
            }
            true_sums = prefix_sums(shadow.orbit, phi);
        }
        auto true_mean = [&](std::size_t horizon) {
            if (approximation) return cyclic_average(approximation->points, phi, horizon + 1);
            return true_sums[horizon] / static_cast<double>(horizon + 1);
        };

        for (std::size_t h : ladder) {
            const double pseudo_mean = pseudo_sums[h] / static_cast<double>(h + 1);
            record.ladder.push_back(
                {h, make_triple(pseudo_mean, true_mean(h), report.mean_stationary, report.mean_invariant)});
        }
        record.triple = record.ladder.back().triple;
        const auto& d = record.triple;
        record.in_b = d.max() <= options.threshold_factor * eps;
        record.chain_holds = d.d_pseudo_true <= d.d_pseudo_stat + measure_gap + d.d_true_inv + chain_slack;
        record.mirrored_chain_holds = measure_gap <= d.d_true_inv + d.d_pseudo_true + d.d_pseudo_stat + chain_slack;
        report.records[t] = std::move(record);
    });

    std::size_t inside = 0;
    double worst = 0.0;
    for (const auto& record : report.records) {
        if (record.in_b) ++inside;
        worst = std::max(worst, record.triple.max() / eps);
    }
    report.fraction_in_b = trials == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(trials);
    report.c_phi_estimate = worst;
    return report;
}

std::vector<PropertyARung> property_a_fraction(const TentMap& map, double eps, const Observable& phi, double delta,
                                               std::size_t n0, std::size_t n_max, std::size_t trials,
                                               std::uint64_t seed, const StochShadowOptions& options) {
    require(delta > 0.0, "delta must be positive");
    require(n0 >= 1 && n0 < n_max, "cutoff ladder needs 1 <= N < n_max");
    if (trials == 0) return {};
    const UniformKernel kernel(eps);
    const auto stationary = stationary_density(perturbed_operator(map, options.bins_rule.bins_for(eps), eps),
                                               options.stationary_tol);
    const double target = integrate(phi, stationary.density);

    std::vector<std::size_t> cutoffs;
    for (std::size_t N = n0; N < n_max; N *= 2) cutoffs.push_back(N);

    // tail[t][r] = max over n in (cutoffs[r], n_max] of |S_n - target| for trial t.
    std::vector<std::vector<double>> tail(trials, std::vector<double>(cutoffs.size()));
    parallel_for(trials, options.threads, [&](std::size_t t) {
        const auto realization = gen_stationary_realization(map, kernel, n_max, options.burn_in, seed, t);
        const auto sums = prefix_sums(realization.points, phi);
        double running = 0.0;
        std::size_t r = cutoffs.size();
        for (std::size_t k = n_max; k > cutoffs.front(); --k) {
            running = std::max(running, std::abs(sums[k] / static_cast<double>(k + 1) - target));
            while (r > 0 && cutoffs[r - 1] == k - 1) tail[t][--r] = running;
        }
    });

    std::vector<PropertyARung> rungs;
    for (std::size_t r = 0; r < cutoffs.size(); ++r) {
        std::size_t inside = 0;
        for (std::size_t t = 0; t < trials; ++t)
            if (tail[t][r] < delta) ++inside;
        rungs.push_back({cutoffs[r], static_cast<double>(inside) / static_cast<double>(trials)});
    }
    return rungs;
}

StabilityFit fit_stability(std::vector<StabilityEntry> entries) {
    require(entries.size() >= 3, "stability fit needs at least 3 noise levels");
    double mx = 0.0, my = 0.0;
    for (const auto& e : entries) {
        require(e.distance > 0.0, "stability fit needs positive distances");
        mx += std::log(e.eps);
        my += std::log(e.distance);
    }
    const auto count = static_cast<double>(entries.size());
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& e : entries) {
        const double dx = std::log(e.eps) - mx;
        const double dy = std::log(e.distance) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    StabilityFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.entries = std::move(entries);
    return fit;
}

StabilityFit stability_speed_fit(const TentMap& map, std::span<const double> eps_grid, const BinsRule& rule,
                                 double tol) {
    require(eps_grid.size() >= 3, "stability fit needs at least 3 noise levels");
    const double ratio = eps_grid[1] / eps_grid[0];
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        require(eps_grid[k] > 0.0, "noise levels must be positive");
        if (k > 0)
            require(std::abs(eps_grid[k] / eps_grid[k - 1] - ratio) <= 1e-9 * std::abs(ratio) && ratio != 1.0,
                    "noise grid must be geometric");
    }
    std::vector<StabilityEntry> entries;
    for (double eps : eps_grid) {
        const std::size_t bins = rule.bins_for(eps);
        const auto plain = stationary_density(ulam_matrix(map, bins), tol);
        const auto noisy = stationary_density(perturbed_operator(map, bins, eps), tol);
        entries.push_back({eps, bins, l1_distance(plain.density, noisy.density)});
    }
    return fit_stability(std::move(entries));
}

SweepReport uniform_family_sweep(std::span<const double> s_grid, std::span<const double> eps_grid,
                                 std::span<const std::string> phi_ids, std::size_t trials, std::uint64_t seed,
                                 const SweepOptions& options) {
    require(!s_grid.empty() && !eps_grid.empty() && !phi_ids.empty(), "sweep grids must be nonempty");
    std::vector<Observable> observables;
    for (const auto& id : phi_ids) observables.push_back(observable(id));

    SweepReport report;
    for (double s : s_grid) {
        const TentMap map(s);
        std::vector<StabilityEntry> entries;
        for (double eps : eps_grid) {
            SweepCell cell;
            cell.slope = s;
            cell.eps = eps;
            cell.bins = options.shadow.bins_rule.bins_for(eps);
            std::optional<StationaryPair> stationary;
            try {
                stationary = compute_stationary_pair(map, eps, options.shadow.bins_rule, options.shadow.stationary_tol);
                cell.l1_distance = l1_distance(stationary->unperturbed.density, stationary->perturbed.density);
                entries.push_back({eps, cell.bins, *cell.l1_distance});
            } catch (const Error& e) {
                cell.failures.push_back(std::string("stationary: ") + e.what());
            }
            if (stationary) {
                for (const auto& phi : observables) {
                    try {
                        cell.reports.push_back(
                            stochastic_shadowing_trial(map, *stationary, phi, options.n, trials, seed, options.shadow));
                    } catch (const Error& e) {
                        cell.failures.push_back(phi.id + ": " + e.what());
                    }
                }
            }
            report.cells.push_back(std::move(cell));
        }
        std::optional<StabilityFit> fit;
        if (entries.size() >= 3) fit = fit_stability(std::move(entries));
        report.fits.emplace_back(s, std::move(fit));
    }

    for (const auto& id : phi_ids) {
        UniformitySummary summary{id, 0.0, 0.0, true};
        for (const auto& cell : report.cells) {
            for (const auto& r : cell.reports) {
                if (r.phi_id != id) continue;
                if (r.c_phi_estimate > summary.max_c_phi) {
                    summary.max_c_phi = r.c_phi_estimate;
                    summary.argmax_slope = r.slope;
                }
            }
        }
        summary.single_constant = summary.max_c_phi <= options.shadow.threshold_factor;
        report.summary.push_back(summary);
    }
    report.cky_ladder = cky_constant_ladder(options.cky_periods, options.cky_window);
    return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json triple_json(const DeviationTriple& d) {
    return {{"d_pseudo_stat", d.d_pseudo_stat}, {"d_true_inv", d.d_true_inv}, {"d_pseudo_true", d.d_pseudo_true}};
}

ordered_json report_json(const ExperimentReport& r) {
    ordered_json doc;
    doc["slope"] = r.slope;
    doc["eps"] = r.eps;
    doc["phi"] = r.phi_id;
    doc["n"] = r.n;
    doc["ladder_start"] = r.ladder_start;
    doc["trials"] = r.trials;
    doc["seed"] = r.seed;
    doc["bins"] = r.bins;
    doc["threshold_factor"] = r.threshold_factor;
    doc["route"] = r.route;
    doc["mean_stationary"] = r.mean_stationary;
    doc["mean_invariant"] = r.mean_invariant;
    if (r.comparison_orbit) {
        doc["comparison_orbit"] = {{"point", r.comparison_orbit->point},
                                   {"period", r.comparison_orbit->period},
                                   {"minimal_period", r.comparison_orbit->minimal_period},
                                   {"itinerary", r.comparison_orbit->itinerary},
                                   {"deviation", r.comparison_deviation}};
    }
    doc["fraction_in_b"] = r.fraction_in_b;
    doc["c_phi_estimate"] = r.c_phi_estimate;
    ordered_json trials = ordered_json::array();
    for (const auto& rec : r.records) {
        ordered_json t = triple_json(rec.triple);
        t["trial"] = rec.trial;
        t["in_b"] = rec.in_b;
        t["chain_holds"] = rec.chain_holds;
        t["mirrored_chain_holds"] = rec.mirrored_chain_holds;
        t["shadow_failed"] = rec.shadow_failed;
        ordered_json ladder = ordered_json::array();
        for (const auto& step : rec.ladder) {
            ordered_json entry = triple_json(step.triple);
            entry["n"] = step.n;
            ladder.push_back(std::move(entry));
        }
        t["ladder"] = std::move(ladder);
        trials.push_back(std::move(t));
    }
    doc["records"] = std::move(trials);
    return doc;
}

void write_json(const ordered_json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace

void write_report_json(const ExperimentReport& report, const std::filesystem::path& path) {
    write_json(report_json(report), path);
}

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    CsvWriter csv(path, {"trial", "slope", "eps", "phi", "n", "d_pseudo_stat", "d_true_inv", "d_pseudo_true",
                         "in_b", "chain_holds", "mirrored_chain_holds", "shadow_failed"});
    for (const auto& rec : report.records)
        csv.row(rec.trial, report.slope, report.eps, report.phi_id, report.n, rec.triple.d_pseudo_stat,
                rec.triple.d_true_inv, rec.triple.d_pseudo_true, rec.in_b, rec.chain_holds, rec.mirrored_chain_holds,
                rec.shadow_failed);
}

void write_sweep_json(const SweepReport& report, const std::filesystem::path& path) {
    ordered_json doc;
    ordered_json cells = ordered_json::array();
    for (const auto& cell : report.cells) {
        ordered_json c;
        c["slope"] = cell.slope;
        c["eps"] = cell.eps;
        c["bins"] = cell.bins;
        c["l1_distance"] = cell.l1_distance ? ordered_json(*cell.l1_distance) : ordered_json(nullptr);
        ordered_json reports = ordered_json::array();
        for (const auto& r : cell.reports) reports.push_back(report_json(r));
        c["reports"] = std::move(reports);
        c["failures"] = cell.failures;
        cells.push_back(std::move(c));
    }
    doc["cells"] = std::move(cells);
    ordered_json fits = ordered_json::array();
    for (const auto& [s, fit] : report.fits) {
        ordered_json f{{"slope", s}};
        if (fit) {
            f["speed_exponent"] = fit->slope;
            f["intercept"] = fit->intercept;
            f["r_squared"] = fit->r_squared;
        } else {
            f["speed_exponent"] = nullptr;
        }
        fits.push_back(std::move(f));
    }
    doc["stability_fits"] = std::move(fits);
    ordered_json summary = ordered_json::array();
    for (const auto& u : report.summary)
        summary.push_back({{"phi", u.phi_id},
                           {"max_c_phi", u.max_c_phi},
                           {"argmax_slope", u.argmax_slope},
                           {"single_constant", u.single_constant}});
    doc["uniformity"] = std::move(summary);
    ordered_json ladder = ordered_json::array();
    for (const auto& e : report.cky_ladder)
        ladder.push_back({{"period", e.period}, {"slope", e.slope}, {"cky_constant", e.constant}});
    doc["cky_ladder"] = std::move(ladder);
    write_json(doc, path);
}

void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path) {
    CsvWriter csv(path, {"slope", "eps", "bins", "l1_distance", "phi", "fraction_in_b", "c_phi_estimate", "status"});
    for (const auto& cell : report.cells) {
        const double l1 = cell.l1_distance.value_or(std::numeric_limits<double>::quiet_NaN());
        for (const auto& r : cell.reports)
            csv.row(cell.slope, cell.eps, cell.bins, l1, r.phi_id, r.fraction_in_b, r.c_phi_estimate, "ok");
        for (const auto& failure : cell.failures)
            csv.row(cell.slope, cell.eps, cell.bins, l1, failure.substr(0, failure.find(':')),
                    std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                    "failed: " + failure);
    }
}

} // namespace tentshadow
