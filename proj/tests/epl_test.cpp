#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <bayesclust/epl.hpp>

#include "test_util.hpp"

using namespace bayesclust;

namespace {

// EPL oracle: plain weighted average of the pairwise entropy / pair-count oracles.
double epl_oracle(const Partition& z, const PartitionSample& sample, LossKind kind) {
    double total = 0.0;
    for (std::size_t s = 0; s < sample.size(); ++s) {
        const auto& a = z.labels();
        const auto& c = sample[s].labels();
        double v = 0.0;
        switch (kind) {
        case LossKind::Binder: v = testutil::binder_oracle(a, c); break;
        case LossKind::VI: v = testutil::vi_oracle(a, c); break;
        case LossKind::NVI: v = testutil::nvi_oracle(a, c); break;
        case LossKind::NID: v = testutil::nid_oracle(a, c); break;
        }
        total += sample.weight(s) * v;
    }
    return total;
}

PartitionSample copies(const Partition& p, std::size_t s) { return PartitionSample(std::vector<Partition>(s, p)); }

} // namespace

TEST(ExpectedLoss, WorkedValues) {
    const Partition z{1, 1, 2, 2};
    EXPECT_EQ(expected_loss(z, copies(z, 10), LossKind::VI), 0.0);
    const PartitionSample two({Partition{1, 1, 2, 2}, Partition{1, 2, 1, 2}});
    EXPECT_NEAR(expected_loss(z, two, LossKind::VI), std::log(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(expected_loss(z, two, LossKind::Binder), 0.125);
    EXPECT_THROW(expected_loss(Partition{1, 2}, two, LossKind::VI), std::invalid_argument);
}

TEST(ExpectedLoss, MatchesOracleWithWeights) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + trial % 30;
        auto base = testutil::random_sample(n, 12, 5, rng);
        std::vector<double> w(base.size());
        std::uniform_real_distribution<double> u(0.1, 1.0);
        double total = 0;
        for (auto& x : w) total += (x = u(rng));
        for (auto& x : w) x /= total;
        const PartitionSample sample(base.draws(), w);
        const auto z = testutil::random_partition(n, 5, rng);
        for (LossKind k : all_loss_kinds)
            EXPECT_NEAR(expected_loss(z, sample, k), epl_oracle(z, sample, k), 1e-12);
    }
}

TEST(ExpectedLoss, DeduplicationPreservesValue) {
    std::mt19937_64 rng(43);
    std::vector<Partition> draws;
    for (int i = 0; i < 40; ++i) draws.push_back(testutil::random_partition(6, 2, rng));
    const PartitionSample sample(draws);
    const auto distinct = sample.deduplicated();
    EXPECT_LT(distinct.size(), sample.size());
    EXPECT_EQ(distinct.total_count(), 40u);
    const auto z = testutil::random_partition(6, 3, rng);
    for (LossKind k : all_loss_kinds)
        EXPECT_NEAR(expected_loss(z, sample, k), expected_loss(z, distinct, k), 1e-12);
}

TEST(Exhaustive, DegenerateSampleAndGuard) {
    const Partition p{1, 2, 2, 1, 3};
    for (LossKind k : all_loss_kinds) {
        const auto r = exhaustive_minimize(copies(p, 7), k);
        EXPECT_EQ(r.partition, p);
        EXPECT_EQ(r.epl, 0.0);
    }
    std::mt19937_64 rng(1);
    const auto big = testutil::random_sample(12, 3, 3, rng);
    try {
        exhaustive_minimize(big, LossKind::VI);
        FAIL();
    } catch (const refused_error& e) {
        EXPECT_STREQ(e.what(), "exhaustive search refused");
    }
}

TEST(Exhaustive, BeatsEveryCandidate) {
    std::mt19937_64 rng(47);
    const auto sample = testutil::random_sample(8, 15, 4, rng);
    for (LossKind k : all_loss_kinds) {
        const auto r = exhaustive_minimize(sample, k);
        std::uint64_t candidates = 0;
        for_each_partition(8, [&](const std::vector<int>& l) {
            ++candidates;
            EXPECT_LE(r.epl, epl_oracle(Partition(l), sample, k) + 1e-12);
        });
        EXPECT_EQ(candidates, 4140u);
        EXPECT_NEAR(r.epl, epl_oracle(r.partition, sample, k), 1e-12);
    }
}

TEST(Greedy, DegenerateSampleRecoversTheDraw) {
    const Partition p{1, 1, 2, 3, 3, 2, 1};
    for (LossKind k : all_loss_kinds) {
        const auto r = greedy_minimize(copies(p, 5), k);
        EXPECT_EQ(r.partition, p) << to_string(k);
        EXPECT_NEAR(r.epl, 0.0, 1e-14);
    }
}

TEST(Greedy, MatchesExhaustiveOnFiveItems) {
    std::mt19937_64 rng(53);
    const auto sample = testutil::random_sample(5, 20, 3, rng);
    const auto exact = exhaustive_minimize(sample, LossKind::VI);
    GreedyConfig cfg;
    cfg.seed = 3;
    const auto r = greedy_minimize(sample, LossKind::VI, cfg);
    EXPECT_NEAR(r.epl, exact.epl, 1e-9);
    EXPECT_EQ(r.partition, exact.partition);
}

TEST(Greedy, TwoAnchorSampleDoesNoWorseThanAnchors) {
    const Partition a{1, 1, 1, 2, 2, 2, 3, 3};
    const Partition b{1, 2, 1, 2, 1, 2, 1, 2};
    std::vector<Partition> draws;
    for (int i = 0; i < 6; ++i) draws.push_back(a);
    for (int i = 0; i < 4; ++i) draws.push_back(b);
    const PartitionSample sample(draws);
    const auto r = greedy_minimize(sample, LossKind::Binder);
    EXPECT_LE(r.epl, std::min(expected_loss(a, sample, LossKind::Binder), expected_loss(b, sample, LossKind::Binder)) + 1e-15);
}

TEST(Greedy, ReportedEplIsRecomputedAndTraceDecreases) {
    std::mt19937_64 rng(59);
    for (LossKind k : all_loss_kinds) {
        const auto sample = testutil::random_sample(25, 40, 4, rng);
        GreedyConfig cfg;
        cfg.restarts = 4;
        cfg.check_incremental = true;
        const auto r = greedy_minimize(sample, k, cfg);
        EXPECT_NEAR(r.epl, epl_oracle(r.partition, sample, k), 1e-10);
        EXPECT_TRUE(is_canonical(std::span<const int>(r.partition.labels())));
        ASSERT_FALSE(r.trace.empty());
        for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LT(r.trace[t], r.trace[t - 1]);
        EXPECT_NEAR(r.trace.back(), r.epl, 1e-10);
        EXPECT_GE(r.restarts_agreeing, 1);
    }
}

TEST(Greedy, IncrementalValuesTrackRecomputation) {
    std::mt19937_64 rng(61);
    const auto sample = testutil::random_sample(15, 30, 4, rng);
    for (LossKind k : all_loss_kinds) {
        EplObjective obj(sample, k, 15);
        obj.reset(std::vector<int>(15, 0));
        std::uniform_int_distribution<std::size_t> item(0, 14);
        for (int step = 0; step < 300; ++step) {
            const std::size_t i = item(rng);
            std::uniform_int_distribution<int> target(0, obj.num_clusters());
            const int t = target(rng);
            const double predicted = obj.value_if_moved(i, t);
            const bool opens = t == obj.num_clusters();
            const bool alone = obj.cluster_size(obj.cluster_of(i)) == 1;
            obj.move(i, t);
            if (!(opens && alone)) { EXPECT_NEAR(predicted, obj.value(), 1e-12); }
            ASSERT_NEAR(obj.value(), obj.value_from_scratch(), 1e-10) << to_string(k) << " step " << step;
            EXPECT_NEAR(obj.value_from_scratch(), epl_oracle(Partition(obj.labels()), sample, k), 1e-10);
        }
    }
}

TEST(Greedy, PositiveScalingLeavesSearchUnchanged) {
    std::mt19937_64 rng(67);
    const auto sample = testutil::random_sample(30, 50, 5, rng);
    GreedyConfig cfg;
    cfg.restarts = 5;
    cfg.seed = 9;
    const auto one = greedy_search([&] { return EplObjective(sample, LossKind::Binder, 30, 1.0); }, cfg);
    const auto two = greedy_search([&] { return EplObjective(sample, LossKind::Binder, 30, 2.0); }, cfg);
    EXPECT_EQ(one.partition, two.partition);
    ASSERT_EQ(one.trace.size(), two.trace.size());
    for (std::size_t t = 0; t < one.trace.size(); ++t) EXPECT_DOUBLE_EQ(2.0 * one.trace[t], two.trace[t]);
}

TEST(Greedy, DeterministicAndThreadIndependent) {
    std::mt19937_64 rng(71);
    const auto sample = testutil::random_sample(40, 30, 6, rng);
    GreedyConfig cfg;
    cfg.seed = 5;
    const auto a = greedy_minimize(sample, LossKind::VI, cfg);
    const auto b = greedy_minimize(sample, LossKind::VI, cfg);
    cfg.threads = 3;
    const auto c = greedy_minimize(sample, LossKind::VI, cfg);
    for (const auto* r : {&b, &c}) {
        EXPECT_EQ(r->partition, a.partition);
        EXPECT_EQ(r->epl, a.epl);
        EXPECT_EQ(r->trace, a.trace);
        EXPECT_EQ(r->restarts_agreeing, a.restarts_agreeing);
    }
}

TEST(Greedy, RespectsClusterCapAndValidatesConfig) {
    std::mt19937_64 rng(73);
    const auto sample = testutil::random_sample(20, 20, 8, rng);
    GreedyConfig cfg;
    cfg.max_clusters = 2;
    const auto r = greedy_minimize(sample, LossKind::VI, cfg);
    EXPECT_LE(r.partition.num_clusters(), 2);

    cfg.max_clusters = -1;
    EXPECT_THROW(greedy_minimize(sample, LossKind::VI, cfg), std::invalid_argument);
    cfg.max_clusters = 0;
    cfg.restarts = 0;
    EXPECT_THROW(greedy_minimize(sample, LossKind::VI, cfg), std::invalid_argument);
}

TEST(Greedy, InitStrategies) {
    std::mt19937_64 rng(79);
    const auto sample = testutil::random_sample(9, 20, 3, rng);
    const auto best = exhaustive_minimize(sample, LossKind::VI);
    GreedyConfig cfg;
    cfg.restarts = 1;
    cfg.init = InitKind::WarmStart;
    cfg.warm_start = best.partition;
    const auto warm = greedy_minimize(sample, LossKind::VI, cfg);
    EXPECT_EQ(warm.partition, best.partition);
    EXPECT_EQ(warm.trace.size(), 1u);

    cfg.warm_start.reset();
    EXPECT_THROW(greedy_minimize(sample, LossKind::VI, cfg), std::invalid_argument);

    for (InitKind init : {InitKind::OneCluster, InitKind::Singletons, InitKind::Random}) {
        cfg.init = init;
        const auto r = greedy_minimize(sample, LossKind::VI, cfg);
        EXPECT_LE(best.epl, r.epl + 1e-12);
    }
}

TEST(Greedy, OftenMatchesExhaustiveAcrossLosses) {
    std::mt19937_64 rng(83);
    for (LossKind k : all_loss_kinds) {
        int hits = 0;
        for (int trial = 0; trial < 10; ++trial) {
            const auto sample = testutil::random_sample(7, 30, 3, rng);
            GreedyConfig cfg;
            cfg.seed = static_cast<std::uint64_t>(trial);
            const auto g = greedy_minimize(sample, k, cfg);
            const auto e = exhaustive_minimize(sample, k);
            if (g.epl <= e.epl + 1e-9) ++hits;
            EXPECT_GE(g.epl, e.epl - 1e-12);
        }
        EXPECT_GE(hits, 9) << to_string(k);
    }
}
