#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cops/conformal.hpp"
#include "cops/cops_band.hpp"
#include "cops/synthetic.hpp"
#include "test_support.hpp"

using namespace cops;
using test_support::make_dataset;

namespace {

const KernelSpec kGauss05{KernelFamily::gaussian, 0.5};

// Literal transcription of the local conformity rank: augmented local density
// of every bin member and of the candidate, indicators counted directly.
double rank_reference(const Dataset& data, const LocalSample& sample, const KernelSpec& ky,
                      double cand_y) {
    const double nk = static_cast<double>(sample.n_k());
    const double h = ky.bandwidth;
    auto aug = [&](double v) {
        double base = 0.0;
        for (std::size_t i : sample.member_indices)
            base += evaluate(ky, (data.y[i] - v) / h);
        base /= nk * h;
        return nk / (nk + 1.0) * base + evaluate(ky, (v - cand_y) / h) / ((nk + 1.0) * h);
    };
    const double cand_score = aug(cand_y);
    double count = 1.0;
    for (std::size_t i : sample.member_indices)
        if (aug(data.y[i]) <= cand_score) count += 1.0;
    return count / (nk + 1.0);
}

Dataset lw_data(std::size_t n, std::uint64_t seed) {
    return SyntheticModel{ModelName::lw_mixture}.sample(n, seed);
}

}  // namespace

TEST_CASE("rank of a duplicate or modal candidate is 1") {
    const auto data = make_dataset({0.5}, {2.0});
    const Partition part = build_partition(data, PartitionScheme::equal_width, 1.0);
    const double x = 0.5;
    CHECK(local_conformity_rank(data, part, 0, kGauss05, std::span<const double>{&x, 1}, 2.0) ==
          doctest::Approx(1.0));

    // Candidate at the unique mode of a unimodal estimate ranks highest.
    const auto sym = make_dataset({0.0, 0.0, 0.0, 0.0}, {-1.0, -0.5, 0.5, 1.0});
    const Partition part2 = build_partition(sym, PartitionScheme::equal_width, 1.0);
    const double x2 = 0.0;
    CHECK(local_conformity_rank(sym, part2, 0, KernelSpec{KernelFamily::gaussian, 1.0},
                                std::span<const double>{&x2, 1}, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("rank matches the formula transcription on fuzz cases") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 5 + rep % 20;
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = gauss(rng);
            ys[i] = gauss(rng) * (1.0 + 0.2 * std::abs(xs[i]));
        }
        const auto data = make_dataset(xs, ys);
        const Partition part = build_partition(data, PartitionScheme::equal_width, 1.0);
        const double cand_y = gauss(rng);
        for (std::size_t k = 0; k < part.bin_count(); ++k) {
            if (part.assignments[k].n_k() == 0) continue;
            const auto center = part.bin_center(k);
            const double lib = local_conformity_rank(data, part, k, kGauss05, center, cand_y);
            const double ref = rank_reference(data, part.assignments[k], kGauss05, cand_y);
            CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("scorer-based rank agrees with the direct operation") {
    const auto data = lw_data(300, 51);
    const Partition part = build_partition(data, PartitionScheme::equal_width, 0.5);
    const ConformityScorer scorer = make_conformity_scorer(
        data, part, ConformityVariant::local_marginal, {}, kGauss05);
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> uy(-4.0, 4.0);
    for (int i = 0; i < 40; ++i) {
        const double y = uy(rng);
        for (std::size_t k = 0; k < part.bin_count(); ++k) {
            if (part.assignments[k].n_k() == 0) continue;
            const auto center = part.bin_center(k);
            CHECK(local_conformity_rank(scorer, part, k, center, y) ==
                  doctest::Approx(local_conformity_rank(data, part, k, kGauss05, center, y))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("independent-gaussian bins recover the oracle interval roughly") {
    SyntheticModel model{ModelName::indep_gaussian};
    const Dataset data = model.sample(1500, 63);
    const Partition part = build_partition(data, PartitionScheme::equal_count, 10.0);
    const GridSpec xg{-3.0, 3.0, 31};
    const GridSpec yg{-6.0, 6.0, 601};
    const CopsBand fit = cops_band(data, part, KernelSpec{KernelFamily::gaussian, 0.35}, 0.1,
                                   xg, yg);
    const double z95 = test_support::normal_quantile(0.95);
    for (const auto& set : fit.bin_sets) {
        CHECK(set.measure > 2.0 * z95 * 0.8);
        CHECK(set.measure < 2.0 * z95 * 1.2);
        CHECK(set.contains(0.0));
        CHECK(set.contains(1.2));
        CHECK(set.contains(-1.2));
    }
}

TEST_CASE("mixture bins with separated components split into two intervals") {
    const auto data = lw_data(1000, 64);
    const Partition part = build_partition(data, PartitionScheme::equal_width, 0.3);
    const GridSpec xg{-1.5, 1.5, 31};
    const auto env = SyntheticModel{ModelName::lw_mixture}.y_envelope();
    const GridSpec yg{env.first, env.second, 512};
    const CopsBand fit = cops_band(data, part, KernelSpec{KernelFamily::gaussian, 0.45}, 0.1,
                                   xg, yg);
    bool saw_split = false;
    for (std::size_t k = 0; k < part.bin_count(); ++k) {
        if (part.bins[k].lo[0] < 0.5) continue;
        if (fit.bin_sets[k].intervals.size() >= 2) saw_split = true;
    }
    CHECK(saw_split);
}

TEST_CASE("per-bin sandwich containment: inner, COPS, outer, local slicer") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = lw_data(220, 700 + seed);
        const Partition part = build_partition(data, PartitionScheme::equal_width, 0.6);
        const KernelSpec ky{KernelFamily::gaussian, 0.5};
        const GridSpec xg{-1.5, 1.5, 13};
        const GridSpec yg{-7.0, 7.0, 301};
        const auto ys = yg.points();
        const CopsOptions options{RankThreshold::alpha, 20};
        const CopsBand fit = cops_band(data, part, ky, 0.1, xg, yg, options);
        const CopsBand fast = local_slicer_band(data, part, ky, 0.1, xg, yg, options);
        for (std::size_t k = 0; k < part.bin_count(); ++k) {
            const auto& sample = part.assignments[k];
            if (sample.n_k() < options.n_min) continue;
            const LocalSandwichCutoff cutoff = local_sandwich_cutoff(data, sample, ky, 0.1);
            REQUIRE(cutoff.usable);
            for (double y : ys) {
                const double dens = local_kde(data, sample, ky, y);
                const bool in_inner = dens >= cutoff.inner;
                const bool in_cops = fit.bin_sets[k].contains(y);
                const bool in_outer = dens >= cutoff.outer;
                const bool in_fast = fast.bin_sets[k].contains(y);
                if (in_inner) CHECK(in_cops);
                if (in_cops) CHECK(in_outer);
                CHECK(in_fast == in_outer);
            }
        }
    }
}

TEST_CASE("single-bin uniform data keeps most of the unit interval") {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> xs(1000), ys(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        xs[i] = unif(rng);
        ys[i] = unif(rng);
    }
    const auto data = make_dataset(xs, ys);
    const Partition part = build_partition(data, PartitionScheme::equal_width, 2.0);
    REQUIRE(part.bin_count() == 1);
    const GridSpec xg{0.0, 1.0, 5};
    const GridSpec yg{-0.5, 1.5, 801};
    const CopsBand fast = local_slicer_band(data, part, KernelSpec{KernelFamily::gaussian, 0.1},
                                            0.1, xg, yg);
    CHECK(fast.bin_sets[0].measure >= 0.85);
    CHECK(fast.bin_sets[0].measure <= 1.0 + 0.1);
}

TEST_CASE("single-bin local marginal variant reproduces the global conformal set") {
    const auto ys_data = test_support::normal_sample(60, 91);
    const auto data = make_dataset(std::vector<double>(60, 0.5), ys_data);
    Partition part;
    part.scheme = PartitionScheme::equal_width;
    part.parameter = 1.0;
    part.d = 1;
    part.bins = {{{0.0}, {1.0}}};
    part.assignments.resize(1);
    part.assignments[0].bin_id = 0;
    for (std::size_t i = 0; i < 60; ++i) part.assignments[0].member_indices.push_back(i);

    const KernelSpec ky{KernelFamily::gaussian, 0.4};
    const GridSpec yg{-4.0, 4.0, 201};
    const auto ys = yg.points();
    const ConformityScorer scorer = make_conformity_scorer(
        data, part, ConformityVariant::local_marginal, {}, ky);
    const double center = 0.5;
    const IntervalUnion bin_set = cops_bin_set(scorer, part, 0,
                                               std::span<const double>{&center, 1}, ys, 0.1);

    PointCloud cloud;
    cloud.n = 60;
    cloud.p = 1;
    cloud.pts = ys_data;
    const KernelSpec kernels[] = {ky};
    const GridSpec grids[] = {yg};
    const auto global = full_conformal_set(cloud, kernels, 0.1, grids);
    for (std::size_t i = 0; i < ys.size(); ++i)
        CHECK(bin_set.contains(ys[i]) == (global[i] == 1));
}

TEST_CASE("all conformity variants are locally valid in Monte Carlo") {
    SyntheticModel model{ModelName::lw_mixture};
    const std::size_t reps = 150, per_rep = 20, n = 300;
    const KernelSpec ky{KernelFamily::gaussian, 0.5};
    const KernelSpec kx{KernelFamily::gaussian, 0.3};
    const std::vector<KernelSpec> kxs{kx};
    for (ConformityVariant variant :
         {ConformityVariant::local_marginal, ConformityVariant::joint_density,
          ConformityVariant::conditional_density}) {
        std::vector<std::size_t> hits(5, 0), draws(5, 0);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const Dataset data = model.sample(n, 4000 + rep);
            const Partition part = build_partition(data, PartitionScheme::equal_width, 0.6);
            const ConformityScorer scorer =
                make_conformity_scorer(data, part, variant, kxs, ky);
            const Dataset fresh = model.sample(per_rep, 90000 + rep);
            for (std::size_t i = 0; i < per_rep; ++i) {
                const double x = fresh.x[i];
                const std::size_t k = part.locate(std::span<const double>{&x, 1});
                if (part.assignments[k].n_k() == 0) continue;
                const double rank = local_conformity_rank(
                    scorer, part, k, std::span<const double>{&x, 1}, fresh.y[i]);
                ++draws[k % 5];
                if (rank + 1e-9 >= 0.1) ++hits[k % 5];
            }
        }
        for (std::size_t g = 0; g < 5; ++g) {
            REQUIRE(draws[g] > 100);
            const double p = static_cast<double>(hits[g]) / draws[g];
            const double se = std::sqrt(0.9 * 0.1 / draws[g]);
            CHECK(p >= 0.9 - 2.0 * se);
        }
    }
}

TEST_CASE("variants agree closely on a fine partition over a smooth region") {
    const auto data = lw_data(4000, 95);
    const Partition part = build_partition(data, PartitionScheme::equal_width, 0.1);
    const KernelSpec ky{KernelFamily::gaussian, 0.35};
    const KernelSpec kx{KernelFamily::gaussian, 0.1};
    const std::vector<KernelSpec> kxs{kx};
    const GridSpec yg{-8.0, 8.0, 801};
    const auto ys = yg.points();
    const auto s_local = make_conformity_scorer(data, part, ConformityVariant::local_marginal,
                                                kxs, ky);
    const auto s_joint = make_conformity_scorer(data, part, ConformityVariant::joint_density,
                                                kxs, ky);
    const auto s_cond = make_conformity_scorer(
        data, part, ConformityVariant::conditional_density, kxs, ky);
    // Smooth single-Gaussian stretch of the model. The joint and conditional
    // scores rank near-identically (uniform X marginal); the local-marginal
    // set differs by the estimation noise of the within-bin estimate, so it
    // is compared on the relative scale.
    for (std::size_t k = 0; k < part.bin_count(); ++k) {
        if (part.bins[k].hi[0] > -0.6 || part.assignments[k].n_k() < 40) continue;
        const auto center = part.bin_center(k);
        const auto set_local = cops_bin_set(s_local, part, k, center, ys, 0.1);
        const auto set_joint = cops_bin_set(s_joint, part, k, center, ys, 0.1);
        const auto set_cond = cops_bin_set(s_cond, part, k, center, ys, 0.1);
        CHECK(symmetric_difference_measure(set_joint, set_cond) <= 0.25);
        CHECK(symmetric_difference_measure(set_local, set_joint) <=
              0.25 * set_local.measure);
        CHECK(symmetric_difference_measure(set_local, set_cond) <=
              0.25 * set_local.measure);
    }
}

TEST_CASE("band measure per bin shrinks as alpha grows") {
    const auto data = lw_data(400, 97);
    const Partition part = build_partition(data, PartitionScheme::equal_width, 0.75);
    const KernelSpec ky{KernelFamily::gaussian, 0.5};
    const GridSpec xg{-1.5, 1.5, 7};
    const GridSpec yg{-7.0, 7.0, 301};
    const CopsBand a05 = cops_band(data, part, ky, 0.05, xg, yg);
    const CopsBand a20 = cops_band(data, part, ky, 0.20, xg, yg);
    for (std::size_t k = 0; k < part.bin_count(); ++k)
        CHECK(a20.bin_sets[k].measure <= a05.bin_sets[k].measure + 1e-12);
}

TEST_CASE("cops band is invariant to row shuffles") {
    const auto data = lw_data(240, 99);
    std::vector<std::size_t> perm(240);
    for (std::size_t i = 0; i < 240; ++i) perm[i] = (i * 131 + 17) % 240;
    const Dataset shuffled = select_rows(data, perm);
    const KernelSpec ky{KernelFamily::gaussian, 0.5};
    const GridSpec xg{-1.5, 1.5, 9};
    const GridSpec yg{-7.0, 7.0, 257};
    const Partition pa = build_partition(data, PartitionScheme::equal_width, 0.75);
    const Partition pb = build_partition(shuffled, PartitionScheme::equal_width, 0.75);
    const CopsBand a = cops_band(data, pa, ky, 0.1, xg, yg);
    const CopsBand b = cops_band(shuffled, pb, ky, 0.1, xg, yg);
    for (std::size_t k = 0; k < pa.bin_count(); ++k)
        CHECK(symmetric_difference_measure(a.bin_sets[k], b.bin_sets[k]) == 0.0);
}

TEST_CASE("thin bins fall back to the full range with a warning") {
    const auto data = lw_data(60, 101);
    const Partition part = build_partition(data, PartitionScheme::equal_width, 0.2);
    const GridSpec xg{-1.5, 1.5, 9};
    const GridSpec yg{-7.0, 7.0, 101};
    std::vector<std::string> warnings;
    const CopsBand fit = cops_band(data, part, kGauss05, 0.1, xg, yg,
                                   CopsOptions{RankThreshold::alpha, 30}, &warnings);
    CHECK(!warnings.empty());
    bool saw_full = false;
    for (const auto& set : fit.bin_sets)
        if (set.measure == doctest::Approx(14.0)) saw_full = true;
    CHECK(saw_full);
}
