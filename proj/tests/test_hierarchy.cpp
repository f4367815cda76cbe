#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ship/errors.hpp"
#include "ship/hierarchy.hpp"
#include "ship/oracle.hpp"

using namespace ship;

namespace {

const CenterAnnotation& annotation_at(const std::vector<CenterAnnotation>& a, node_t node) {
    for (const auto& x : a)
        if (x.node == node) return x;
    throw std::runtime_error("no annotation for node");
}

std::vector<std::int64_t> labels(const ClusterHierarchy& h, std::int64_t k) { return extract_partition(h, k).labels; }

}  // namespace

TEST(Objective, Parse) {
    EXPECT_EQ(Objective::parse("center"), Objective::center());
    EXPECT_EQ(Objective::parse("k-center"), Objective::center());
    EXPECT_EQ(Objective::parse("median"), Objective::power(1));
    EXPECT_EQ(Objective::parse("means"), Objective::power(2));
    EXPECT_EQ(Objective::parse("z=3"), Objective::power(3));
    EXPECT_EQ(Objective::parse("5"), Objective::power(5));
    EXPECT_EQ(Objective::power(4).tag(), "z=4");
    EXPECT_EQ(Objective::center().tag(), "center");
    EXPECT_THROW(Objective::parse("medoid"), InvalidArgument);
    EXPECT_THROW(Objective::parse("z=0"), InvalidArgument);
    EXPECT_THROW(Objective::parse("z=9"), InvalidArgument);
}

TEST(PowerOf, RepeatedMultiplication) {
    EXPECT_EQ(power_of(3, 1), 3);
    EXPECT_EQ(power_of(3, 4), 81);
    EXPECT_EQ(power_of(0.5, 3), 0.125);
}

TEST(KCenterOrder, T4) {
    const auto t4 = fixtures::make_t4();
    const auto order = kcenter_order(t4.tree);
    ASSERT_EQ(order.size(), 4u);
    EXPECT_TRUE(order[0].root);
    EXPECT_EQ(order[0].center, 0);
    EXPECT_EQ(order[1].node, t4.b);
    EXPECT_EQ(order[1].center, 2);
    EXPECT_EQ(order[1].cost_decrease, 5);
    EXPECT_EQ(order[2].node, 3);
    EXPECT_EQ(order[2].cost_decrease, 3);
    EXPECT_EQ(order[3].node, 1);
    EXPECT_EQ(order[3].cost_decrease, 2);
    EXPECT_EQ(cost_curve(order, Objective::center()).losses, (std::vector<double>{5, 3, 2, 0}));
}

TEST(KCenterOrder, Star) {
    const auto t = fixtures::star(6, 4);
    const auto losses = cost_curve(t, Objective::center()).losses;
    EXPECT_EQ(losses, (std::vector<double>{4, 4, 4, 4, 4, 0}));
}

TEST(KCenterOrder, WorstcaseStrictlySorted) {
    for (int w = 1; w <= 6; ++w) {
        const auto t = make_worstcase_tree(w);
        const auto order = kcenter_order(t);
        ASSERT_EQ(static_cast<std::int64_t>(order.size()), t.n_points());
        for (std::size_t i = 2; i < order.size(); ++i) EXPECT_LT(order[i].cost_decrease, order[i - 1].cost_decrease);
        std::set<node_t> centers;
        for (const auto& a : order) centers.insert(a.center);
        EXPECT_EQ(static_cast<std::int64_t>(centers.size()), t.n_points());
    }
}

TEST(KCenterSolution, T4) {
    const auto t4 = fixtures::make_t4();
    auto p1 = kcenter_solution(t4.tree, 1);
    EXPECT_EQ(p1.labels, (std::vector<std::int64_t>{0, 0, 0, 0}));
    EXPECT_EQ(p1.cost, 5);
    auto p2 = kcenter_solution(t4.tree, 2);
    EXPECT_EQ(p2.labels, (std::vector<std::int64_t>{0, 0, 1, 1}));
    EXPECT_EQ(p2.cost, 3);
    auto p4 = kcenter_solution(t4.tree, 4);
    EXPECT_EQ(p4.labels, (std::vector<std::int64_t>{0, 1, 2, 3}));
    EXPECT_EQ(p4.cost, 0);
    EXPECT_THROW(kcenter_solution(t4.tree, 0), OutOfRange);
    EXPECT_THROW(kcenter_solution(t4.tree, 5), OutOfRange);
}

TEST(KzAnnotate, T4MedianAndMeans) {
    const auto t4 = fixtures::make_t4();
    const auto z1 = kz_annotate(t4.tree, 1);
    ASSERT_EQ(z1.size(), 4u);
    const auto root1 = std::find_if(z1.begin(), z1.end(), [](const auto& a) { return a.root; });
    ASSERT_NE(root1, z1.end());
    EXPECT_LT(root1->center, 2);
    EXPECT_EQ(root1->subtree_cost, 12);
    EXPECT_EQ(annotation_at(z1, t4.b).cost_decrease, 7);
    EXPECT_EQ(annotation_at(z1, 3).cost_decrease, 3);
    EXPECT_EQ(annotation_at(z1, 1).cost_decrease, 2);

    const auto z2 = kz_annotate(t4.tree, 2);
    const auto root2 = std::find_if(z2.begin(), z2.end(), [](const auto& a) { return a.root; });
    EXPECT_LT(root2->center, 2);
    EXPECT_EQ(root2->subtree_cost, 54);
    EXPECT_EQ(annotation_at(z2, t4.b).cost_decrease, 41);
    EXPECT_EQ(annotation_at(z2, 3).cost_decrease, 9);
    EXPECT_EQ(annotation_at(z2, 1).cost_decrease, 4);
}

TEST(KzAnnotate, AllZeroTree) {
    const auto t = fixtures::make_t4().tree.with_values(std::vector<double>(7, 0.0));
    for (const auto& a : kz_annotate(t, 2))
        if (!a.root) {
            EXPECT_EQ(a.cost_decrease, 0);
        }
}

TEST(CostCurve, T4) {
    const auto t = fixtures::make_t4().tree;
    EXPECT_EQ(cost_curve(t, Objective::power(1)).losses, (std::vector<double>{12, 5, 2, 0}));
    EXPECT_EQ(cost_curve(t, Objective::power(2)).losses, (std::vector<double>{54, 13, 4, 0}));
    EXPECT_EQ(cost_curve(t, Objective::center()).losses, (std::vector<double>{5, 3, 2, 0}));
    EXPECT_EQ(cost_curve(t, Objective::power(1)).deltas, (std::vector<double>{-7, -3, -2}));
}

TEST(CostCurve, LeafSelfValuesSetTheFloor) {
    const auto t = fixtures::make_t4(2, 1).tree;  // leaf 0 has self-value 1
    EXPECT_EQ(cost_curve(t, Objective::power(2)).losses.back(), 1);
    EXPECT_EQ(cost_curve(t, Objective::center()).losses.back(), 1);
}

TEST(BuildHierarchy, T4Median) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::power(1));
    ASSERT_EQ(h.nodes.size(), 7u);
    const auto& root = h.nodes[0];
    EXPECT_EQ(root.split_k, 1);
    EXPECT_FALSE(root.gain.has_value());
    ASSERT_EQ(root.children.size(), 2u);
    const auto& left = h.nodes[root.children[0]];
    const auto& right = h.nodes[root.children[1]];
    EXPECT_EQ(right.split_k, 2);
    EXPECT_EQ(*right.gain, 7);
    EXPECT_EQ(right.center, 2);
    ASSERT_EQ(right.children.size(), 2u);
    EXPECT_EQ(h.nodes[right.children[1]].split_k, 3);
    EXPECT_EQ(h.nodes[right.children[1]].center, 3);
    ASSERT_EQ(left.children.size(), 2u);
    EXPECT_EQ(h.nodes[left.children[1]].split_k, 4);
    EXPECT_EQ(h.nodes[left.children[1]].center, 1);
    EXPECT_EQ(root.cost, 12);
    EXPECT_EQ(h.losses, (std::vector<double>{12, 5, 2, 0}));
}

TEST(BuildHierarchy, T4CenterSplitOrder) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::center());
    std::vector<std::pair<std::int64_t, node_t>> splits;
    for (std::size_t v = 1; v < h.nodes.size(); ++v)
        if (!h.is_continuation(static_cast<node_t>(v))) splits.emplace_back(h.nodes[v].split_k, h.nodes[v].center);
    std::sort(splits.begin(), splits.end());
    EXPECT_EQ(splits, (std::vector<std::pair<std::int64_t, node_t>>{{2, 2}, {3, 3}, {4, 1}}));
    EXPECT_EQ(h.nodes[0].cost, 5);
}

TEST(BuildHierarchy, StarMultiSplit) {
    const auto h = make_hierarchy(fixtures::star(5, 3), Objective::power(1));
    ASSERT_EQ(h.nodes[0].children.size(), 5u);
    std::vector<std::int64_t> ks;
    for (node_t c : h.nodes[0].children) ks.push_back(h.nodes[c].split_k);
    // the continuation child first exists at k = 2
    EXPECT_EQ(ks, (std::vector<std::int64_t>{2, 2, 3, 4, 5}));
}

TEST(BuildHierarchy, SinglePoint) {
    TreeBuilder b(1);
    const auto h = make_hierarchy(b.finish(), Objective::power(1));
    ASSERT_EQ(h.nodes.size(), 1u);
    EXPECT_EQ(h.nodes[0].split_k, 1);
    EXPECT_EQ(labels(h, 1), (std::vector<std::int64_t>{0}));
}

TEST(BuildHierarchy, RejectsBadAnnotations) {
    auto sorted = annotate_sorted(fixtures::make_t4().tree, Objective::power(1));
    auto dup = sorted;
    dup[2].center = dup[1].center;
    EXPECT_THROW(build_hierarchy(dup, Objective::power(1)), InvalidArgument);
    auto rootless = sorted;
    rootless.erase(rootless.begin());
    EXPECT_THROW(build_hierarchy(rootless, Objective::power(1)), InvalidArgument);
}

TEST(ExtractPartition, T4) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::power(1));
    EXPECT_EQ(labels(h, 1), (std::vector<std::int64_t>{0, 0, 0, 0}));
    EXPECT_EQ(labels(h, 2), (std::vector<std::int64_t>{0, 0, 1, 1}));
    EXPECT_EQ(labels(h, 3), (std::vector<std::int64_t>{0, 0, 1, 2}));
    EXPECT_EQ(labels(h, 4), (std::vector<std::int64_t>{0, 1, 2, 3}));
    EXPECT_EQ(extract_partition(h, 2).cost, 5);
    EXPECT_THROW(extract_partition(h, 0), OutOfRange);
    EXPECT_THROW(extract_partition(h, 5), OutOfRange);
}

TEST(OptimizeAnnotations, CollinearCopies) {
    // ten identical two-point clusters, equidistant in the tree, laid out on a line
    const int copies = 10;
    TreeBuilder b(2 * copies);
    std::vector<node_t> tops;
    std::vector<double> coords;
    for (int c = 0; c < copies; ++c) {
        const node_t kids[] = {static_cast<node_t>(2 * c), static_cast<node_t>(2 * c + 1)};
        tops.push_back(b.add_internal(1, kids));
        coords.push_back(10.0 * c);
        coords.push_back(10.0 * c + 0.5);
    }
    b.add_internal(100, tops);
    const auto tree = b.finish();
    const PointSet pts(2 * copies, 1, coords);

    const auto plain = make_hierarchy(tree, Objective::power(1));
    const auto tuned = make_hierarchy(tree, Objective::power(1), &pts);
    EXPECT_EQ(plain.losses, tuned.losses);

    const auto before = labels(plain, 2);
    const auto after = labels(tuned, 2);
    for (int i = 2; i < 2 * copies; ++i) EXPECT_EQ(before[i], i < 4 ? 1 : 0) << i;
    for (int i = 0; i < 2 * copies; ++i) EXPECT_EQ(after[i], i < 2 ? 0 : 1) << i;
    EXPECT_EQ(oracle::assignment_cost(tree, after, extract_partition(tuned, 2).centers, Objective::power(1)),
              tuned.losses[1]);
}

TEST(OptimizeAnnotations, SingleClusterUnchanged) {
    const auto t = fixtures::star(1 + 1, 2);
    const PointSet p(2, 1, {0, 1});
    auto sorted = annotate_sorted(t, Objective::power(1));
    auto copy = sorted;
    optimize_annotations(copy, t, p);
    ASSERT_EQ(copy.size(), sorted.size());
    for (std::size_t i = 0; i < copy.size(); ++i) EXPECT_EQ(copy[i].parent_center, sorted[i].parent_center);
    EXPECT_EQ(labels(make_hierarchy(t, Objective::power(1), &p), 1), (std::vector<std::int64_t>{0, 0}));
}

TEST(OptimizeAnnotations, PointCountMismatch) {
    const PointSet p(3, 1, {0, 1, 2});
    EXPECT_THROW(make_hierarchy(fixtures::make_t4().tree, Objective::power(1), &p), InvalidArgument);
}

// --- properties ---

namespace {

std::vector<Objective> objectives() { return {Objective::center(), Objective::power(1), Objective::power(2)}; }

}  // namespace

TEST(Properties, OptimalForEveryK) {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 120; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 9, .canonical = iter % 3 != 0});
        for (const auto obj : objectives()) {
            const auto h = make_hierarchy(t, obj);
            for (std::int64_t k = 1; k <= t.n_points(); ++k) {
                const auto p = extract_partition(h, k);
                const double best = oracle::brute_optimum(t, k, obj).cost;
                ASSERT_EQ(oracle::brute_cost(t, p.centers, obj), best) << obj.tag() << " k=" << k;
                ASSERT_EQ(oracle::assignment_cost(t, p.labels, p.centers, obj), best) << obj.tag() << " k=" << k;
                ASSERT_EQ(h.losses[k - 1], best);
            }
        }
    }
}

TEST(Properties, OptimalOnFloatTrees) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int iter = 0; iter < 80; ++iter) {
        auto t = oracle::random_tree(rng, {.max_points = 9});
        std::vector<double> vals(static_cast<std::size_t>(t.n_nodes()));
        for (node_t v : t.postorder()) {
            double lo = 0;
            for (node_t c : t.children(v)) lo = std::max(lo, vals[c]);
            vals[v] = t.is_leaf(v) ? 0.3 * u(rng) : lo + u(rng);
        }
        t = t.with_values(vals);
        for (const auto obj : objectives()) {
            const auto h = make_hierarchy(t, obj);
            for (std::int64_t k = 1; k <= t.n_points(); ++k) {
                const double best = oracle::brute_optimum(t, k, obj).cost;
                const double got = oracle::brute_cost(t, extract_partition(h, k).centers, obj);
                ASSERT_NEAR(got, best, 1e-9 * std::max(1.0, best));
            }
        }
    }
}

TEST(Properties, ConsecutivePartitionsSplitOneCluster) {
    std::mt19937_64 rng(33);
    for (int iter = 0; iter < 150; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 14, .canonical = iter % 2 == 0});
        for (const auto obj : objectives()) {
            const auto h = make_hierarchy(t, obj);
            auto prev = labels(h, 1);
            for (std::int64_t k = 2; k <= t.n_points(); ++k) {
                const auto cur = labels(h, k);
                ASSERT_TRUE(oracle::splits_exactly_one(prev, cur)) << obj.tag() << " k=" << k;
                prev = cur;
            }
        }
    }
}

TEST(Properties, HierarchyNodeInvariants) {
    std::mt19937_64 rng(34);
    for (int iter = 0; iter < 150; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 14});
        for (const auto obj : objectives()) {
            const auto h = make_hierarchy(t, obj);
            ASSERT_EQ(h.nodes[0].split_k, 1);
            for (std::size_t v = 1; v < h.nodes.size(); ++v) {
                const auto& nd = h.nodes[v];
                ASSERT_LT(nd.parent, static_cast<node_t>(v));
                ASSERT_GE(nd.split_k, h.nodes[nd.parent].split_k);
                ASSERT_LE(nd.cost, h.nodes[nd.parent].cost);
            }
        }
    }
}

TEST(Properties, RootCenterOptimalForEverySubtreeOnItsPath) {
    std::mt19937_64 rng(35);
    for (int iter = 0; iter < 150; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 10});
        for (int z : {1, 2}) {
            const auto ann = kz_annotate(t, z);
            const auto root = std::find_if(ann.begin(), ann.end(), [](const auto& a) { return a.root; });
            for (node_t v = t.parent(root->center); v != no_node; v = t.parent(v)) {
                const auto leaves = t.leaves_of(v);
                auto cost_with = [&](node_t c) {
                    double s = 0;
                    for (node_t x : leaves) s += power_of(t.lca_distance(x, c), z);
                    return s;
                };
                const double chosen = cost_with(root->center);
                for (node_t c : leaves) ASSERT_LE(chosen, cost_with(c)) << "node " << v;
            }
        }
    }
}

TEST(Properties, KCenterCostIndependentOfCenterWithinSubtree) {
    std::mt19937_64 rng(36);
    for (int iter = 0; iter < 100; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 10});
        const auto order = kcenter_order(t);
        for (std::int64_t k = 1; k <= t.n_points(); ++k) {
            std::vector<node_t> centers;
            for (std::int64_t i = 0; i < k; ++i) centers.push_back(order[i].center);
            const double base = oracle::brute_cost(t, centers, Objective::center());
            // swap one center for another leaf it owns: inside its triggering subtree
            // but outside the subtrees claimed by the other placed centers
            for (std::int64_t i = 1; i < k; ++i) {
                const node_t top = order[i].node;
                for (node_t alt : t.leaves_of(top)) {
                    if (alt == centers[i]) continue;
                    bool claimed = false;
                    for (std::int64_t j = 0; j < k; ++j) {
                        const node_t other = order[j].node;
                        if (j == i || other == top) continue;
                        const bool below = t.span_begin(top) <= t.span_begin(other) && t.span_end(other) <= t.span_end(top);
                        if (below && t.span_begin(other) <= t.position(alt) && t.position(alt) < t.span_end(other))
                            claimed = true;
                    }
                    if (claimed || t.value(alt) != t.value(centers[i])) continue;  // self-values are not interchangeable
                    auto swapped = centers;
                    swapped[i] = alt;
                    ASSERT_EQ(oracle::brute_cost(t, swapped, Objective::center()), base);
                }
            }
        }
    }
}

TEST(Properties, TieBreakKeepsEveryLoss) {
    std::mt19937_64 rng(37);
    for (int iter = 0; iter < 150; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 12, .canonical = iter % 2 == 0});
        const auto pts = oracle::random_points(rng, t.n_points(), 2, false);
        for (const auto obj : objectives()) {
            const auto plain = make_hierarchy(t, obj);
            const auto tuned = make_hierarchy(t, obj, &pts);
            ASSERT_EQ(plain.losses, tuned.losses) << obj.tag();
            auto prev = labels(tuned, 1);
            for (std::int64_t k = 1; k <= t.n_points(); ++k) {
                const auto p = extract_partition(tuned, k);
                ASSERT_EQ(oracle::assignment_cost(t, p.labels, p.centers, obj), tuned.losses[k - 1])
                    << obj.tag() << " k=" << k;
                if (k > 1) {
                    ASSERT_TRUE(oracle::splits_exactly_one(prev, p.labels));
                }
                prev = p.labels;
            }
        }
    }
}

TEST(Properties, LossesNonIncreasingAndFinalValue) {
    std::mt19937_64 rng(38);
    for (int iter = 0; iter < 200; ++iter) {
        const auto t = oracle::random_tree(rng, {.max_points = 14});
        for (int z = 1; z <= 5; ++z) {
            const auto c = cost_curve(t, Objective::power(z));
            for (std::size_t i = 1; i < c.losses.size(); ++i) ASSERT_LE(c.losses[i], c.losses[i - 1]);
            double floor = 0;
            for (node_t x = 0; x < t.n_points(); ++x) floor += power_of(t.value(x), z);
            ASSERT_EQ(c.losses.back(), floor);
        }
    }
}
