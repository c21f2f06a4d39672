#include "cops/cops_band.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace cops {

namespace {

constexpr double kRankEps = 1e-9;
constexpr double kVanishingMarginal = 1e-12;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
}

// Non-augmented local density at each member's Y, in member order.
std::vector<double> member_base_densities(const Dataset& data, const LocalSample& sample,
                                          const KernelSpec& ky) {
    std::vector<double> base(sample.n_k());
    for (std::size_t m = 0; m < sample.n_k(); ++m)
        base[m] = local_kde(data, sample, ky, data.y[sample.member_indices[m]]);
    return base;
}

IntervalUnion full_range_set(const GridSpec& y_grid) {
    return make_interval_union({{y_grid.lo, y_grid.hi}});
}

std::string join_indices(const std::vector<std::size_t>& idx) {
    std::string s;
    for (std::size_t i : idx) {
        if (!s.empty()) s += ", ";
        s += std::to_string(i);
    }
    return s;
}

// Shared state for the joint/conditional scorers.
struct JointScorerState {
    std::vector<double> base_joint;  // plain joint KDE at each sample row
    std::vector<double> base_margx;  // plain x-marginal KDE at each row (conditional only)
    std::vector<KernelSpec> kx;
    KernelSpec ky;
    double bw_joint = 1.0;
    double bw_margx = 1.0;
    double peak_joint = 1.0;
    double peak_margx = 1.0;
};

double plain_marginal_x(const Dataset& data, std::span<const KernelSpec> kx,
                        std::span<const double> u) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        double term = 1.0;
        for (std::size_t j = 0; j < data.d && term != 0.0; ++j)
            term *= evaluate(kx[j], (u[j] - data.x_at(i, j)) / kx[j].bandwidth);
        sum += term;
    }
    double norm = static_cast<double>(data.n);
    for (const auto& k : kx) norm *= k.bandwidth;
    return sum / norm;
}

}  // namespace

ConformityVariant conformity_variant_from_name(const std::string& name) {
    if (name == "local-marginal" || name == "local_marginal")
        return ConformityVariant::local_marginal;
    if (name == "joint" || name == "joint_density") return ConformityVariant::joint_density;
    if (name == "conditional" || name == "conditional_density")
        return ConformityVariant::conditional_density;
    throw std::invalid_argument("unknown conformity variant: " + name);
}

const char* conformity_variant_name(ConformityVariant variant) {
    switch (variant) {
        case ConformityVariant::local_marginal: return "local-marginal";
        case ConformityVariant::joint_density: return "joint";
        case ConformityVariant::conditional_density: return "conditional";
    }
    return "?";
}

ConformityScorer make_conformity_scorer(const Dataset& data, const Partition& partition,
                                        ConformityVariant variant,
                                        std::span<const KernelSpec> kx, const KernelSpec& ky,
                                        std::vector<std::string>* warnings) {
    validate(data);
    validate(ky);

    if (variant == ConformityVariant::local_marginal) {
        // Per-bin plain member densities, computed lazily and cached.
        auto cache = std::make_shared<std::vector<std::vector<double>>>(partition.bin_count());
        const KernelSpec kyc = ky;
        return [&data, &partition, kyc, cache](std::size_t bin, std::span<const double>,
                                               double candidate_y) {
            const LocalSample& sample = partition.assignments[bin];
            const std::size_t nk = sample.n_k();
            if (nk == 0) throw EmptyBin("conformity scorer: empty bin " + std::to_string(bin));
            auto& base = (*cache)[bin];
            if (base.empty()) base = member_base_densities(data, sample, kyc);
            const double h = kyc.bandwidth;
            const double shrink = static_cast<double>(nk) / (static_cast<double>(nk) + 1.0);
            const double denom = (static_cast<double>(nk) + 1.0) * h;
            ConformityScores out;
            out.member_scores.resize(nk);
            for (std::size_t m = 0; m < nk; ++m) {
                const double yi = data.y[sample.member_indices[m]];
                out.member_scores[m] =
                    shrink * base[m] + evaluate(kyc, (yi - candidate_y) / h) / denom;
            }
            out.candidate_score = shrink * local_kde(data, sample, kyc, candidate_y) +
                                  kernel_peak(kyc) / denom;
            return out;
        };
    }

    if (kx.size() != data.d)
        throw std::invalid_argument("conformity scorer: kx dimension mismatch");
    auto state = std::make_shared<JointScorerState>();
    state->kx.assign(kx.begin(), kx.end());
    state->ky = ky;
    state->bw_joint = ky.bandwidth;
    state->peak_joint = kernel_peak(ky);
    for (const auto& k : state->kx) {
        validate(k);
        state->bw_joint *= k.bandwidth;
        state->bw_margx *= k.bandwidth;
        state->peak_joint *= kernel_peak(k);
        state->peak_margx *= kernel_peak(k);
    }
    state->base_joint.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
        state->base_joint[i] = joint_kde(data, state->kx, ky, data.x_row(i), data.y[i]);
    if (variant == ConformityVariant::conditional_density) {
        state->base_margx.resize(data.n);
        for (std::size_t i = 0; i < data.n; ++i)
            state->base_margx[i] = plain_marginal_x(data, state->kx, data.x_row(i));
    }

    const bool conditional = variant == ConformityVariant::conditional_density;
    return [&data, &partition, state, conditional, warnings](
               std::size_t bin, std::span<const double> candidate_x, double candidate_y) {
        const LocalSample& sample = partition.assignments[bin];
        const std::size_t nk = sample.n_k();
        if (nk == 0) throw EmptyBin("conformity scorer: empty bin " + std::to_string(bin));
        const double n = static_cast<double>(data.n);
        const double shrink = n / (n + 1.0);
        const double denom_joint = (n + 1.0) * state->bw_joint;
        const double denom_margx = (n + 1.0) * state->bw_margx;

        auto aug_joint_at = [&](std::size_t i) {
            double term = evaluate(state->ky, (data.y[i] - candidate_y) / state->ky.bandwidth);
            for (std::size_t j = 0; j < data.d && term != 0.0; ++j)
                term *= evaluate(state->kx[j],
                                 (data.x_at(i, j) - candidate_x[j]) / state->kx[j].bandwidth);
            return shrink * state->base_joint[i] + term / denom_joint;
        };
        auto aug_margx_at = [&](std::size_t i) {
            double term = 1.0;
            for (std::size_t j = 0; j < data.d && term != 0.0; ++j)
                term *= evaluate(state->kx[j],
                                 (data.x_at(i, j) - candidate_x[j]) / state->kx[j].bandwidth);
            return shrink * state->base_margx[i] + term / denom_margx;
        };

        ConformityScores out;
        out.member_scores.resize(nk);
        for (std::size_t m = 0; m < nk; ++m) {
            const std::size_t i = sample.member_indices[m];
            const double joint = aug_joint_at(i);
            if (!conditional) {
                out.member_scores[m] = joint;
                continue;
            }
            const double margx = aug_margx_at(i);
            if (margx < kVanishingMarginal) {
                if (warnings)
                    warnings->push_back("vanishing x-marginal at row " + std::to_string(i) +
                                        "; conformity score set to 0");
                out.member_scores[m] = 0.0;
            } else {
                out.member_scores[m] = joint / margx;
            }
        }

        const double cand_joint = shrink * joint_kde(data, state->kx, state->ky, candidate_x,
                                                     candidate_y) +
                                  state->peak_joint / denom_joint;
        if (!conditional) {
            out.candidate_score = cand_joint;
        } else {
            const double cand_margx =
                shrink * plain_marginal_x(data, state->kx, candidate_x) +
                state->peak_margx / denom_margx;
            out.candidate_score =
                cand_margx < kVanishingMarginal ? 0.0 : cand_joint / cand_margx;
        }
        return out;
    };
}

double local_conformity_rank(const ConformityScorer& scorer, const Partition& partition,
                             std::size_t bin, std::span<const double> candidate_x,
                             double candidate_y) {
    const ConformityScores scores = scorer(bin, candidate_x, candidate_y);
    std::size_t count = 1;  // the candidate's own indicator
    for (double s : scores.member_scores)
        if (s <= scores.candidate_score) ++count;
    return static_cast<double>(count) /
           (static_cast<double>(partition.assignments[bin].n_k()) + 1.0);
}

double local_conformity_rank(const Dataset& data, const Partition& partition, std::size_t bin,
                             const KernelSpec& ky, std::span<const double> candidate_x,
                             double candidate_y) {
    if (bin >= partition.bin_count())
        throw std::invalid_argument("local_conformity_rank: bin out of range");
    if (partition.locate(candidate_x) != bin)
        throw std::invalid_argument("local_conformity_rank: candidate x not in bin");
    const LocalSample& sample = partition.assignments[bin];
    if (sample.n_k() == 0)
        throw EmptyBin("local_conformity_rank: empty bin " + std::to_string(bin));
    std::size_t count = 1;
    const double cand = augmented_local_kde(data, sample, ky, candidate_y, candidate_y);
    for (std::size_t i : sample.member_indices)
        if (augmented_local_kde(data, sample, ky, candidate_y, data.y[i]) <= cand) ++count;
    return static_cast<double>(count) / (static_cast<double>(sample.n_k()) + 1.0);
}

IntervalUnion cops_bin_set(const ConformityScorer& scorer, const Partition& partition,
                           std::size_t bin, std::span<const double> eval_x,
                           std::span<const double> ys, double alpha,
                           RankThreshold threshold) {
    const std::size_t nk = partition.assignments[bin].n_k();
    std::vector<char> row(ys.size());
    for (std::size_t iy = 0; iy < ys.size(); ++iy) {
        const ConformityScores scores = scorer(bin, eval_x, ys[iy]);
        std::size_t count = 1;
        for (double s : scores.member_scores)
            if (s <= scores.candidate_score) ++count;
        row[iy] = rank_passes(count, nk + 1, alpha, threshold) ? 1 : 0;
    }
    return from_grid_indicator(ys, row);
}

namespace {

CopsBand assemble_band(const Partition& partition, const GridSpec& x_grid, double alpha,
                       std::vector<IntervalUnion> bin_sets) {
    CopsBand out;
    out.band.method = BandMethod::cops;
    out.band.alpha = alpha;
    out.band.x_grid = x_grid.points();
    out.band.sets.reserve(out.band.x_grid.size());
    for (double x : out.band.x_grid)
        out.band.sets.push_back(bin_sets[partition.locate(std::span<const double>{&x, 1})]);
    out.bin_sets = std::move(bin_sets);
    return out;
}

}  // namespace

CopsBand cops_band(const Dataset& data, const Partition& partition, const KernelSpec& ky,
                   double alpha, const GridSpec& x_grid, const GridSpec& y_grid,
                   const CopsOptions& options, std::vector<std::string>* warnings) {
    check_alpha(alpha);
    validate(x_grid);
    validate(y_grid);
    if (partition.d != 1 || data.d != 1)
        throw std::invalid_argument("cops_band: band construction expects d = 1");

    const ConformityScorer scorer = make_conformity_scorer(
        data, partition, ConformityVariant::local_marginal, {}, ky, warnings);
    const std::vector<double> ys = y_grid.points();
    std::vector<IntervalUnion> bin_sets(partition.bin_count());
    std::vector<std::size_t> thin;
    for (std::size_t k = 0; k < partition.bin_count(); ++k) {
        if (partition.assignments[k].n_k() < options.n_min) {
            thin.push_back(k);
            bin_sets[k] = full_range_set(y_grid);
            continue;
        }
        const std::vector<double> center = partition.bin_center(k);
        bin_sets[k] = cops_bin_set(scorer, partition, k, center, ys, alpha,
                                          options.threshold);
    }
    if (!thin.empty() && warnings)
        warnings->push_back("bins below n_min fall back to the full y range: " +
                            join_indices(thin));
    return assemble_band(partition, x_grid, alpha, std::move(bin_sets));
}

CopsBand cops_band_variant(const Dataset& data, const Partition& partition,
                           std::span<const KernelSpec> kx, const KernelSpec& ky, double alpha,
                           const GridSpec& x_grid, const GridSpec& y_grid,
                           ConformityVariant variant, const CopsOptions& options,
                           std::vector<std::string>* warnings) {
    if (variant == ConformityVariant::local_marginal)
        return cops_band(data, partition, ky, alpha, x_grid, y_grid, options, warnings);
    check_alpha(alpha);
    validate(x_grid);
    validate(y_grid);
    if (partition.d != 1 || data.d != 1)
        throw std::invalid_argument("cops_band_variant: band construction expects d = 1");

    const ConformityScorer scorer =
        make_conformity_scorer(data, partition, variant, kx, ky, warnings);
    const std::vector<double> ys = y_grid.points();

    std::vector<IntervalUnion> bin_sets(partition.bin_count());
    std::vector<std::size_t> thin;
    for (std::size_t k = 0; k < partition.bin_count(); ++k) {
        if (partition.assignments[k].n_k() < options.n_min) {
            thin.push_back(k);
            bin_sets[k] = full_range_set(y_grid);
            continue;
        }
        const std::vector<double> center = partition.bin_center(k);
        bin_sets[k] = cops_bin_set(scorer, partition, k, center, ys, alpha,
                                          options.threshold);
    }
    if (!thin.empty() && warnings)
        warnings->push_back("bins below n_min fall back to the full y range: " +
                            join_indices(thin));

    // The joint/conditional scores move with x, so each x-grid point re-ranks.
    CopsBand out;
    out.band.method = BandMethod::cops;
    out.band.alpha = alpha;
    out.band.x_grid = x_grid.points();
    out.band.sets.reserve(out.band.x_grid.size());
    for (double x : out.band.x_grid) {
        const std::span<const double> xs{&x, 1};
        const std::size_t k = partition.locate(xs);
        if (partition.assignments[k].n_k() < options.n_min) {
            out.band.sets.push_back(full_range_set(y_grid));
            continue;
        }
        out.band.sets.push_back(
            cops_bin_set(scorer, partition, k, xs, ys, alpha, options.threshold));
    }
    out.bin_sets = std::move(bin_sets);
    return out;
}

LocalSandwichCutoff local_sandwich_cutoff(const Dataset& data, const LocalSample& sample,
                                          const KernelSpec& ky, double alpha) {
    check_alpha(alpha);
    const std::size_t nk = sample.n_k();
    if (nk == 0) throw EmptyBin("local_sandwich_cutoff: empty bin");
    const std::size_t j =
        static_cast<std::size_t>(std::floor(static_cast<double>(nk) * alpha + kRankEps));
    if (j == 0) return {};
    std::vector<double> base = member_base_densities(data, sample, ky);
    std::sort(base.begin(), base.end());
    LocalSandwichCutoff cutoff;
    cutoff.inner = base[j - 1];
    cutoff.outer = base[j - 1] - kernel_span(ky) / (static_cast<double>(nk) * ky.bandwidth);
    cutoff.usable = true;
    return cutoff;
}

CopsBand local_slicer_band(const Dataset& data, const Partition& partition,
                           const KernelSpec& ky, double alpha, const GridSpec& x_grid,
                           const GridSpec& y_grid, const CopsOptions& options,
                           std::vector<std::string>* warnings) {
    check_alpha(alpha);
    validate(x_grid);
    validate(y_grid);
    validate(ky);
    if (partition.d != 1 || data.d != 1)
        throw std::invalid_argument("local_slicer_band: band construction expects d = 1");

    const std::vector<double> ys = y_grid.points();
    std::vector<IntervalUnion> bin_sets(partition.bin_count());
    std::vector<std::size_t> thin;
    std::vector<char> row(ys.size());
    for (std::size_t k = 0; k < partition.bin_count(); ++k) {
        const LocalSample& sample = partition.assignments[k];
        if (sample.n_k() < options.n_min) {
            thin.push_back(k);
            bin_sets[k] = full_range_set(y_grid);
            continue;
        }
        const LocalSandwichCutoff cutoff = local_sandwich_cutoff(data, sample, ky, alpha);
        if (!cutoff.usable) {
            bin_sets[k] = full_range_set(y_grid);
            continue;
        }
        for (std::size_t iy = 0; iy < ys.size(); ++iy)
            row[iy] = local_kde(data, sample, ky, ys[iy]) >= cutoff.outer ? 1 : 0;
        bin_sets[k] = from_grid_indicator(ys, row);
    }
    if (!thin.empty() && warnings)
        warnings->push_back("bins below n_min fall back to the full y range: " +
                            join_indices(thin));
    CopsBand out = assemble_band(partition, x_grid, alpha, std::move(bin_sets));
    out.band.method = BandMethod::cops;
    return out;
}

}  // namespace cops
