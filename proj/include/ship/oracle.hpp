#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ship/hierarchy.hpp"
#include "ship/metrics.hpp"
#include "ship/ultra_core.hpp"

namespace ship::oracle {

struct OracleResult {
    double cost = 0;
    std::vector<node_t> centers;
    std::int64_t optimal_sets = 0;
};

// min-over-centers cost; exact integer arithmetic when every value is integral.
double brute_cost(const LcaTree& tree, const std::vector<node_t>& centers, Objective objective);
// Cost of a fixed assignment (labels index into centers; noise not allowed).
double assignment_cost(const LcaTree& tree, const std::vector<std::int64_t>& labels,
                       const std::vector<node_t>& centers, Objective objective);

inline constexpr std::int64_t default_subset_budget = 5'000'000;
OracleResult brute_optimum(const LcaTree& tree, std::int64_t k, Objective objective,
                           std::int64_t subset_budget = default_subset_budget);

// All-pairs bottleneck distances over a spanning tree by explicit path walks (row-major n x n).
std::vector<double> brute_minimax(std::int64_t n, const std::vector<WeightedEdge>& edges);

// Independent dc-dist pieces: sorted-row core distances, full mutual-reachability matrix, Kruskal.
std::vector<double> core_distances_sorted(const PointSet& points, int mu);
std::vector<double> mutual_reachability_matrix(const PointSet& points, int mu);
std::vector<WeightedEdge> kruskal_mst(std::int64_t n, const std::vector<double>& matrix);

// Exhaustive maximum of summed values over all antichains of a forest.
double exhaustive_antichain_max(const std::vector<std::int64_t>& parent, const std::vector<double>& value);

// Pairwise LCA distances of a tree by walking subtrees (row-major n x n).
std::vector<double> distance_matrix(const LcaTree& tree);

// True when `finer` equals `coarser` with exactly one cluster split into two.
bool splits_exactly_one(const std::vector<std::int64_t>& coarser, const std::vector<std::int64_t>& finer);

struct TreeShape {
    std::int64_t min_points = 2;
    std::int64_t max_points = 12;
    int max_fanout = 4;
    int max_step = 6;
    // Internal values strictly increase toward the root; otherwise equal values may repeat.
    bool canonical = true;
};
LcaTree random_tree(std::mt19937_64& rng, const TreeShape& shape = {});

// Random forest with at most max_leaves leaves, for antichain checks.
std::vector<std::int64_t> random_forest(std::mt19937_64& rng, std::int64_t max_leaves);

PointSet random_points(std::mt19937_64& rng, std::int64_t n, std::int64_t dim, bool integer_grid);
PointSet gaussian_blobs(std::mt19937_64& rng, const std::vector<std::vector<double>>& means, double stddev,
                        std::int64_t per_blob);

}  // namespace ship::oracle
