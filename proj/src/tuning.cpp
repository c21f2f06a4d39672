#include "cops/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>

namespace cops {

namespace {

double observed_range(const Dataset& data) {
    auto [lo, hi] = x_range(data, 0);
    return hi - lo;
}

std::size_t expected_bins(const Dataset& data, double w) {
    const double range = observed_range(data);
    if (range <= 0.0 || w >= range) return 1;
    return static_cast<std::size_t>(std::ceil(range / w - 1e-12));
}

// Z1 bin whose interval contains (or is nearest to) the given center.
std::size_t matching_bin(const Partition& z1_part, double center) {
    return z1_part.locate(std::span<const double>{&center, 1});
}

}  // namespace

TuningGrid default_tuning_grid(const Dataset& data) {
    validate(data);
    if (data.d != 1) throw std::invalid_argument("default_tuning_grid: expects d = 1");
    const double range = observed_range(data);
    if (!(range > 0.0)) throw std::invalid_argument("default_tuning_grid: degenerate x range");
    TuningGrid grid;
    for (double denom : {4.0, 6.0, 8.0, 10.0, 14.0, 20.0}) grid.widths.push_back(range / denom);
    const double h0 = silverman_bandwidth(data.y);
    for (double f : {0.5, 0.75, 1.0, 1.5, 2.0}) grid.bandwidths.push_back(h0 * f);
    return grid;
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::uint64_t seed) {
    validate(data);
    if (data.n < 2) throw std::invalid_argument("split: need n >= 2");
    std::vector<std::size_t> idx(data.n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n1 = data.n / 2;
    std::vector<std::size_t> first(idx.begin(), idx.begin() + n1);
    std::vector<std::size_t> second(idx.begin() + n1, idx.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {select_rows(data, first), select_rows(data, second)};
}

TuneOutcome tune_cops(const Dataset& data, const TuningGrid& grid, double alpha,
                      const GridSpec& x_grid, const GridSpec& y_grid, std::uint64_t seed,
                      KernelFamily family, const CopsOptions& options,
                      std::vector<std::string>* warnings) {
    validate(data);
    if (data.d != 1) throw std::invalid_argument("tune_cops: expects d = 1");
    if (grid.widths.empty() || grid.bandwidths.empty())
        throw std::invalid_argument("tune_cops: empty candidate set");
    for (double w : grid.widths)
        if (!(w > 0.0)) throw std::invalid_argument("tune_cops: widths must be positive");
    for (double h : grid.bandwidths)
        if (!(h > 0.0)) throw std::invalid_argument("tune_cops: bandwidths must be positive");

    std::vector<double> widths = grid.widths;
    std::vector<double> bandwidths = grid.bandwidths;
    std::sort(widths.begin(), widths.end());
    std::sort(bandwidths.begin(), bandwidths.end());

    // Drop widths whose partitions cannot hold n_min points per bin per half.
    std::vector<double> usable;
    for (double w : widths) {
        if (data.n >= 2 * expected_bins(data, w) * options.n_min) {
            usable.push_back(w);
        } else if (warnings) {
            warnings->push_back("dropping width candidate " + std::to_string(w) +
                                ": sample too small for its bin count");
        }
    }
    if (usable.empty())
        throw TuningInfeasible("tune_cops: every width candidate was dropped");

    auto [z1, z2] = split(data, seed);
    const std::vector<double> ys = y_grid.points();
    const double full_measure = y_grid.hi - y_grid.lo;
    const double n1 = static_cast<double>(z1.n);

    TuningResult result;
    result.split_seed = seed;
    result.tuning_n = z1.n;

    double best_q = std::numeric_limits<double>::infinity();
    double best_w = usable.front();
    Partition best_z1_part;
    std::vector<double> best_h;            // per Z1 bin
    std::vector<double> best_measures;     // per Z1 bin, at the chosen h
    std::vector<std::size_t> best_counts;  // per Z1 bin

    for (double w : usable) {
        const Partition part = build_partition(z1, PartitionScheme::equal_width, w);
        const std::size_t bins = part.bin_count();
        std::vector<double> h_star(bins);
        std::vector<double> mu_star(bins);
        std::vector<std::size_t> counts(bins);
        std::vector<std::vector<double>> measures(bins,
                                                  std::vector<double>(bandwidths.size()));
        for (std::size_t ih = 0; ih < bandwidths.size(); ++ih) {
            const KernelSpec ky{family, bandwidths[ih]};
            const ConformityScorer scorer = make_conformity_scorer(
                z1, part, ConformityVariant::local_marginal, {}, ky, warnings);
            for (std::size_t k = 0; k < bins; ++k) {
                if (part.assignments[k].n_k() < options.n_min) {
                    measures[k][ih] = full_measure;  // thin bins penalize Q(w) naturally
                    continue;
                }
                const auto center = part.bin_center(k);
                measures[k][ih] =
                    cops_bin_set(scorer, part, k, center, ys, alpha, options.threshold)
                        .measure;
            }
        }
        double q = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            counts[k] = part.assignments[k].n_k();
            std::size_t best_ih = 0;
            for (std::size_t ih = 1; ih < bandwidths.size(); ++ih)
                if (measures[k][ih] < measures[k][best_ih]) best_ih = ih;
            h_star[k] = bandwidths[best_ih];
            mu_star[k] = measures[k][best_ih];
            q += static_cast<double>(counts[k]) * mu_star[k];
        }
        q /= n1;
        result.objective_trace.emplace_back(w, q);
        if (q < best_q) {
            best_q = q;
            best_w = w;
            best_z1_part = part;
            best_h = h_star;
            best_measures = mu_star;
            best_counts = counts;
        }
    }

    result.chosen_w = best_w;
    result.tuning_bin_counts = best_counts;
    result.tuning_bin_measures = best_measures;

    // Refit on the held-out half: same width, edges recomputed on its support;
    // each bin borrows the bandwidth tuned for the Z1 bin nearest its center.
    TuneOutcome outcome;
    outcome.partition = build_partition(z2, PartitionScheme::equal_width, best_w, warnings);
    result.chosen_h_per_bin.resize(outcome.partition.bin_count());
    for (std::size_t k = 0; k < outcome.partition.bin_count(); ++k) {
        const double center = outcome.partition.bin_center(k)[0];
        result.chosen_h_per_bin[k] = best_h[matching_bin(best_z1_part, center)];
    }

    const std::vector<double> xs = x_grid.points();
    std::vector<IntervalUnion> bin_sets(outcome.partition.bin_count());
    std::vector<std::size_t> thin;
    for (std::size_t k = 0; k < outcome.partition.bin_count(); ++k) {
        if (outcome.partition.assignments[k].n_k() < options.n_min) {
            thin.push_back(k);
            bin_sets[k] = make_interval_union({{y_grid.lo, y_grid.hi}});
            continue;
        }
        const KernelSpec ky{family, result.chosen_h_per_bin[k]};
        const ConformityScorer scorer = make_conformity_scorer(
            z2, outcome.partition, ConformityVariant::local_marginal, {}, ky, warnings);
        const auto center = outcome.partition.bin_center(k);
        bin_sets[k] =
            cops_bin_set(scorer, outcome.partition, k, center, ys, alpha, options.threshold);
    }
    if (!thin.empty() && warnings) {
        std::string s;
        for (std::size_t k : thin) s += (s.empty() ? "" : ", ") + std::to_string(k);
        warnings->push_back("refit bins below n_min fall back to the full y range: " + s);
    }

    outcome.band.band.method = BandMethod::cops;
    outcome.band.band.alpha = alpha;
    outcome.band.band.x_grid = xs;
    outcome.band.band.sets.reserve(xs.size());
    for (double x : xs)
        outcome.band.band.sets.push_back(
            bin_sets[outcome.partition.locate(std::span<const double>{&x, 1})]);
    outcome.band.bin_sets = std::move(bin_sets);
    outcome.result = std::move(result);
    return outcome;
}

}  // namespace cops
