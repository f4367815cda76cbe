#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ship/errors.hpp"
#include "ship/hierarchy.hpp"
#include "ship/oracle.hpp"
#include "ship/partition.hpp"

using namespace ship;

namespace {

// Angle oracle written straight from the definition with plain vector algebra.
std::vector<double> angles_by_hand(const std::vector<double>& L) {
    const double n = static_cast<double>(L.size());
    const double hi = *std::max_element(L.begin(), L.end());
    const double lo = *std::min_element(L.begin(), L.end());
    auto px = [&](std::size_t i) { return static_cast<double>(i) / (n - 1); };
    auto py = [&](std::size_t i) { return hi > lo ? (L[i] - lo) / (hi - lo) : 0.0; };
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < L.size(); ++i) {
        const double ax = px(0) - px(i), ay = py(0) - py(i);
        const double bx = px(i) - px(L.size() - 1), by = py(i) - py(L.size() - 1);
        const double cosv = (ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by));
        out.push_back(std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / std::numbers::pi);
    }
    return out;
}

std::int64_t elbow_by_hand(const std::vector<double>& L) {
    const auto a = angles_by_hand(L);
    std::size_t best = 0;
    for (std::size_t i = 1; i < a.size(); ++i)
        if (std::abs(a[i] - 90) < std::abs(a[best] - 90) - 1e-9) best = i;
    return static_cast<std::int64_t>(best) + 2;
}

std::vector<std::set<std::int64_t>> clusters_of(const std::vector<std::int64_t>& labels) {
    std::map<std::int64_t, std::set<std::int64_t>> m;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != noise) m[labels[i]].insert(static_cast<std::int64_t>(i));
    std::vector<std::set<std::int64_t>> out;
    for (auto& [_, s] : m) out.push_back(s);
    std::sort(out.begin(), out.end());
    return out;
}

void expect_well_formed(const Partition& p) {
    std::set<std::int64_t> seen;
    for (auto l : p.labels)
        if (l != noise) seen.insert(l);
    ASSERT_EQ(static_cast<std::int64_t>(seen.size()), p.k);
    if (!seen.empty()) {
        ASSERT_EQ(*seen.begin(), 0);
        ASSERT_EQ(*seen.rbegin(), p.k - 1);
    }
    if (!p.centers.empty()) {
        ASSERT_EQ(static_cast<std::int64_t>(p.centers.size()), p.k);
    }
}

}  // namespace

TEST(Elbow, StepCurve) {
    const std::vector<double> L{1, 0, 0, 0};
    const auto a = elbow_angles(L);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR(a[0], 71.565, 1e-3);
    EXPECT_NEAR(a[1], 56.310, 1e-3);
    EXPECT_EQ(elbow_index(L), 2);
}

TEST(Elbow, LinearCurveTiesToSmallestK) {
    const std::vector<double> L{5, 4, 3, 2, 1, 0};
    const auto a = elbow_angles(L);
    for (double x : a) EXPECT_NEAR(x, 0, 1e-6);
    EXPECT_EQ(elbow_index(L), 2);
}

TEST(Elbow, T4MeansCurveMatchesHandOracle) {
    const std::vector<double> L{54, 13, 4, 0};
    const auto a = elbow_angles(L);
    const auto b = angles_by_hand(L);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
    EXPECT_EQ(elbow_index(L), elbow_by_hand(L));
    EXPECT_EQ(elbow_index(cost_curve(fixtures::make_t4().tree, Objective::power(2))), elbow_by_hand(L));
}

TEST(Elbow, TooShort) {
    EXPECT_THROW(elbow_index(std::vector<double>{1, 0}), InvalidArgument);
    EXPECT_THROW(elbow_angles({}), InvalidArgument);
}

TEST(Elbow, FlatCurve) {
    EXPECT_EQ(elbow_index(std::vector<double>{0, 0, 0, 0}), 2);
}

TEST(MedianOfElbows, LowerMedian) {
    EXPECT_EQ(lower_median({3, 3, 4, 5, 5}), 4);
    EXPECT_EQ(lower_median({7, 7, 7, 7, 7}), 7);
    EXPECT_EQ(lower_median({5, 2, 9, 4}), 4);
    EXPECT_THROW(lower_median({}), InvalidArgument);
}

TEST(MedianOfElbows, MatchesPerZElbows) {
    std::mt19937_64 rng(41);
    for (int iter = 0; iter < 40; ++iter) {
        const auto t = oracle::random_tree(rng, {.min_points = 3, .max_points = 30});
        const auto moe = median_of_elbows(t);
        ASSERT_EQ(moe.zs, (std::vector<int>{1, 2, 3, 4, 5}));
        std::vector<std::int64_t> elbows;
        for (int z = 1; z <= 5; ++z) elbows.push_back(elbow_by_hand(cost_curve(t, Objective::power(z)).losses));
        ASSERT_EQ(moe.elbows, elbows);
        std::sort(elbows.begin(), elbows.end());
        ASSERT_EQ(moe.k, elbows[2]);
    }
    EXPECT_THROW(median_of_elbows(fixtures::make_t4().tree, {}), InvalidArgument);
    EXPECT_THROW(median_of_elbows(fixtures::make_t4().tree, {0}), InvalidArgument);
}

TEST(Threshold, T4Tree) {
    const auto t = fixtures::make_t4().tree;
    EXPECT_EQ(threshold_partition(t, 4).labels, (std::vector<std::int64_t>{0, 0, 1, 1}));
    EXPECT_EQ(threshold_partition(t, 6).labels, (std::vector<std::int64_t>{0, 0, 0, 0}));
    EXPECT_EQ(threshold_partition(t, 1).labels, (std::vector<std::int64_t>{0, 1, 2, 3}));
    EXPECT_EQ(threshold_partition(t, 5).k, 2);  // strict: root value 5 is not below 5
    const auto none = threshold_partition(t, 0);
    EXPECT_EQ(none.k, 0);
    EXPECT_EQ(none.labels, (std::vector<std::int64_t>(4, noise)));
    EXPECT_THROW(threshold_partition(t, -1), InvalidArgument);
}

TEST(Threshold, NoiseForUncoveredLeaves) {
    const auto t = fixtures::make_t4(2, 2).tree;  // leaf 0 self-value 2
    ASSERT_TRUE(validate(t).ok());
    const auto p = threshold_partition(t, 1.5);
    EXPECT_EQ(p.labels, (std::vector<std::int64_t>{noise, 0, 1, 2}));
}

TEST(Threshold, T4CenterHierarchy) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::center());
    EXPECT_EQ(threshold_partition(h, 4).labels, (std::vector<std::int64_t>{0, 0, 1, 1}));
    EXPECT_EQ(threshold_partition(h, 6).k, 1);
    EXPECT_EQ(threshold_partition(h, 1).k, 4);
}

TEST(Stability, Values) {
    EXPECT_DOUBLE_EQ(stability_value(2, 2, 5), 0.6);
    EXPECT_EQ(stability_value(4, 3, 3), 0);
    EXPECT_EQ(stability_value(3, 0, 5), 3 * stability_cap);
    EXPECT_EQ(stability_value(3, 0, 0), 0);
    EXPECT_EQ(stability_value(3, 6, 5), 0);  // clamped
    EXPECT_GT(stability_value(1, 0, 5), stability_value(1000, 1e-9, 5));
}

TEST(Stability, T4CenterMinSizeTwo) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::center());
    const auto r = best_partition(h, 2);
    EXPECT_EQ(r.partition.labels, (std::vector<std::int64_t>{0, 0, 1, 1}));
    EXPECT_NEAR(r.total_value, 0.6 + 2.0 * (1.0 / 3 - 1.0 / 5), 1e-12);
    EXPECT_FALSE(r.all_pruned);
    EXPECT_EQ(r.partition.k, 2);
}

TEST(Stability, RootWinsWhenDominant) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::center());
    std::vector<double> values(h.nodes.size(), 1.0);
    values[0] = 100;
    const auto r = best_partition(h, values, 1, StabilityMode::literal);
    EXPECT_EQ(r.partition.labels, (std::vector<std::int64_t>{0, 0, 0, 0}));
    EXPECT_EQ(r.total_value, 100);
}

TEST(Stability, EverythingPruned) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::center());
    const auto r = best_partition(h, 5);
    EXPECT_TRUE(r.all_pruned);
    EXPECT_EQ(r.partition.labels, (std::vector<std::int64_t>(4, noise)));
    EXPECT_THROW(best_partition(h, 0), InvalidArgument);
}

TEST(Stability, RootValueIsZero) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::center());
    EXPECT_EQ(stability_values(h)[0], 0);
}

TEST(Antichain, SmallForest) {
    // 0,1 under 3; 2 alone; 3 root
    const std::vector<std::int64_t> parent{3, 3, -1, -1};
    auto s = best_antichain(parent, {2, 2, 1, 3});
    EXPECT_EQ(s.total, 5);
    std::sort(s.chosen.begin(), s.chosen.end());
    EXPECT_EQ(s.chosen, (std::vector<std::int64_t>{0, 1, 2}));
    EXPECT_EQ(best_antichain(parent, {1, 1, 1, 3}).total, 4);
}

TEST(Properties, AntichainMatchesExhaustive) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> val(0, 9);
    for (int iter = 0; iter < 400; ++iter) {
        const auto parent = oracle::random_forest(rng, 12);
        std::vector<double> value(parent.size());
        for (auto& v : value) v = val(rng);
        const auto s = best_antichain(parent, value);
        ASSERT_EQ(s.total, oracle::exhaustive_antichain_max(parent, value));
        double sum = 0;
        for (auto c : s.chosen) sum += value[c];
        ASSERT_EQ(sum, s.total);
        for (auto a : s.chosen)
            for (auto b : s.chosen)
                for (auto u = parent[b]; u >= 0 && a != b; u = parent[u]) ASSERT_NE(u, a);
    }
}

TEST(Properties, ThresholdAgreesWithCenterHierarchy) {
    std::mt19937_64 rng(43);
    for (int iter = 0; iter < 200; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 16, .canonical = iter % 2 == 0});
        const auto h = make_hierarchy(t, Objective::center());
        for (double eps : {0.0, 0.5, 1.0, 2.0, 3.5, 5.0, 8.0, 13.0, 40.0}) {
            const auto a = threshold_partition(t, eps);
            const auto b = threshold_partition(h, eps);
            ASSERT_EQ(clusters_of(a.labels), clusters_of(b.labels)) << "eps=" << eps;
            expect_well_formed(a);
            expect_well_formed(b);
        }
    }
}

TEST(Properties, PartitionsWellFormed) {
    std::mt19937_64 rng(44);
    for (int iter = 0; iter < 200; ++iter) {
        const auto t = oracle::random_tree(rng, {.min_points = 1, .max_points = 20});
        for (auto obj : {Objective::center(), Objective::power(1), Objective::power(3)}) {
            const auto h = make_hierarchy(t, obj);
            for (std::int64_t k = 1; k <= t.n_points(); ++k) {
                const auto p = extract_partition(h, k);
                expect_well_formed(p);
                ASSERT_EQ(p.k, k);
            }
            for (std::int64_t mu = 1; mu <= 4; ++mu)
                for (auto mode : {StabilityMode::condensed, StabilityMode::literal}) {
                    const auto r = best_partition(h, mu, mode);
                    expect_well_formed(r.partition);
                    for (auto c : clusters_of(r.partition.labels)) ASSERT_GE(static_cast<std::int64_t>(c.size()), mu);
                }
        }
    }
}

TEST(Properties, StabilityDpOptimalOverHierarchies) {
    std::mt19937_64 rng(45);
    std::uniform_int_distribution<int> val(0, 20);
    for (int iter = 0; iter < 200; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 12});
        const auto h = make_hierarchy(t, iter % 2 ? Objective::center() : Objective::power(1));
        std::vector<double> value(h.nodes.size());
        for (auto& v : value) v = val(rng);
        std::vector<std::int64_t> parent;
        for (const auto& nd : h.nodes) parent.push_back(nd.parent);
        const auto r = best_partition(h, value, 1, StabilityMode::literal);
        ASSERT_EQ(r.total_value, oracle::exhaustive_antichain_max(parent, value));
    }
}
