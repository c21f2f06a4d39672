#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cops/band.hpp"
#include "cops/conformal.hpp"
#include "cops/dataset.hpp"
#include "cops/kernels.hpp"
#include "cops/partition.hpp"

namespace cops {

/// Conformity score used inside the local rank. The local marginal density is
/// the defining choice; the joint and conditional densities are the
/// alternatives that stay valid because only the within-bin ranking matters.
enum class ConformityVariant { local_marginal, joint_density, conditional_density };

ConformityVariant conformity_variant_from_name(const std::string& name);
const char* conformity_variant_name(ConformityVariant variant);

struct CopsOptions {
    RankThreshold threshold = RankThreshold::alpha;
    std::size_t n_min = 20;  // thinner bins fall back to the full y range
};

/// Augmented scores for the members of bin k plus the candidate, in member
/// order. Built once per (bin, candidate) pair; see make_conformity_scorer.
struct ConformityScores {
    std::vector<double> member_scores;
    double candidate_score = 0.0;
};

using ConformityScorer = std::function<ConformityScores(
    std::size_t bin, std::span<const double> candidate_x, double candidate_y)>;

/// Scoring rule for local_conformity_rank under the chosen variant. `kx` is
/// required by the joint and conditional variants and ignored by
/// local_marginal. The conditional variant scores 0 (with a warning) where the
/// augmented x-marginal vanishes below 1e-12. The returned closure keeps
/// references to `data` and `partition`; both must outlive it.
ConformityScorer make_conformity_scorer(const Dataset& data, const Partition& partition,
                                        ConformityVariant variant,
                                        std::span<const KernelSpec> kx, const KernelSpec& ky,
                                        std::vector<std::string>* warnings = nullptr);

/// Local conformity rank of candidate (x, y) within bin k:
/// (1/(n_k+1)) * [ #{ i in A_k : score_i <= score_candidate } + 1 ].
double local_conformity_rank(const Dataset& data, const Partition& partition, std::size_t bin,
                             const KernelSpec& ky, std::span<const double> candidate_x,
                             double candidate_y);

double local_conformity_rank(const ConformityScorer& scorer, const Partition& partition,
                             std::size_t bin, std::span<const double> candidate_x,
                             double candidate_y);

/// One bin's conformal y-set on the grid `ys`, scored at `eval_x`.
IntervalUnion cops_bin_set(const ConformityScorer& scorer, const Partition& partition,
                           std::size_t bin, std::span<const double> eval_x,
                           std::span<const double> ys, double alpha,
                           RankThreshold threshold = RankThreshold::alpha);

/// Locally valid band: per bin, the y-grid points whose local conformity rank
/// clears the threshold. The per-bin set is computed once (the local marginal
/// score is x-invariant within a bin) and assigned to every x-grid point in
/// the bin.
struct CopsBand {
    PredictionBand band;
    std::vector<IntervalUnion> bin_sets;  // one per partition bin
};

CopsBand cops_band(const Dataset& data, const Partition& partition, const KernelSpec& ky,
                   double alpha, const GridSpec& x_grid, const GridSpec& y_grid,
                   const CopsOptions& options = {},
                   std::vector<std::string>* warnings = nullptr);

/// Variant band per Remark-style conformity choices. joint/conditional scores
/// depend on the evaluation x, so those re-rank per x-grid point;
/// local_marginal reduces to cops_band. bin_sets holds the sets at the bin
/// centers (the bin-level representative).
CopsBand cops_band_variant(const Dataset& data, const Partition& partition,
                           std::span<const KernelSpec> kx, const KernelSpec& ky, double alpha,
                           const GridSpec& x_grid, const GridSpec& y_grid,
                           ConformityVariant variant, const CopsOptions& options = {},
                           std::vector<std::string>* warnings = nullptr);

/// Per-bin plug-in density cutoffs that bracket the COPS set: the inner level
/// set thresholds at the floor(n_k*alpha)-th smallest member density, the
/// outer one subtracts the psi_K/(n_k*h) slack.
struct LocalSandwichCutoff {
    double inner = 0.0;
    double outer = 0.0;
    bool usable = false;  // false when floor(n_k*alpha) = 0
};

LocalSandwichCutoff local_sandwich_cutoff(const Dataset& data, const LocalSample& sample,
                                          const KernelSpec& ky, double alpha);

/// Fast approximation: the 1-D sandwich construction applied within each bin
/// (outer cutoff). Thin bins (n_k < n_min) fall back to the full y range.
CopsBand local_slicer_band(const Dataset& data, const Partition& partition,
                           const KernelSpec& ky, double alpha, const GridSpec& x_grid,
                           const GridSpec& y_grid, const CopsOptions& options = {},
                           std::vector<std::string>* warnings = nullptr);

}  // namespace cops
