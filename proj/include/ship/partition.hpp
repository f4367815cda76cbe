#pragma once

#include <cstdint>
#include <vector>

#include "ship/hierarchy.hpp"

namespace ship {

// Angle (degrees) at each interior k of the normalized curve; index 0 is k = 2.
std::vector<double> elbow_angles(const std::vector<double>& losses);
std::int64_t elbow_index(const std::vector<double>& losses);
inline std::int64_t elbow_index(const CostCurve& c) { return elbow_index(c.losses); }

struct MedianOfElbows {
    std::vector<int> zs;
    std::vector<std::int64_t> elbows;
    std::int64_t k = 0;
};
std::int64_t lower_median(std::vector<std::int64_t> values);
MedianOfElbows median_of_elbows(const LcaTree& tree, const std::vector<int>& zs = {1, 2, 3, 4, 5});

// Maximal nodes whose value (tree) or cost (hierarchy) is strictly below eps.
Partition threshold_partition(const LcaTree& tree, double eps);
Partition threshold_partition(const ClusterHierarchy& hier, double eps);

inline constexpr double stability_cap = 1e12;
double stability_value(std::int64_t size, double cost, double parent_cost, double cap = stability_cap);

// Generic maximum-value antichain over a forest. Nodes are kept when their value
// beats the best total of their children; childless nodes are always kept.
struct Selection {
    std::vector<std::int64_t> chosen;
    double total = 0;
};
Selection best_antichain(const std::vector<std::int64_t>& parent, const std::vector<double>& value);

enum class StabilityMode {
    condensed,  // unary chains left after pruning act as one cluster, values summed
    literal,    // every surviving hierarchy node is its own candidate
};

struct StabilityResult {
    Partition partition;
    double total_value = 0;
    bool all_pruned = false;
};

StabilityResult best_partition(const ClusterHierarchy& hier, std::int64_t min_cluster_size,
                               StabilityMode mode = StabilityMode::condensed);
// Same pipeline with caller-supplied values per hierarchy node.
StabilityResult best_partition(const ClusterHierarchy& hier, const std::vector<double>& node_values,
                               std::int64_t min_cluster_size, StabilityMode mode = StabilityMode::condensed);
std::vector<double> stability_values(const ClusterHierarchy& hier);

}  // namespace ship
