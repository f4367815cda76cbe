#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ship/metrics.hpp"
#include "ship/ultra_core.hpp"

namespace ship {

struct Objective {
    enum class Kind { center, power };
    Kind kind = Kind::power;
    int z = 1;

    static Objective center() { return {Kind::center, 0}; }
    static Objective power(int z);
    // Accepts center | median | means | z=N | N.
    static Objective parse(std::string_view text);
    std::string tag() const;
    bool is_center() const { return kind == Kind::center; }
    friend bool operator==(const Objective&, const Objective&) = default;
};

inline constexpr int max_power = 8;

// x^z by repeated multiplication.
double power_of(double x, int z);

struct CenterAnnotation {
    bool root = false;  // root carries the infinite cost-decrease
    double cost_decrease = 0;
    node_t center = no_node;
    node_t parent_center = no_node;
    node_t node = no_node;
    double subtree_cost = 0;  // Cost(T[node], center); max distance for k-center
    double self_cost = 0;     // contribution of the center to its own cluster
    std::int64_t span_begin = 0;
    std::int64_t size = 0;
};

// Descending cost-decrease, root first; ties put ancestors before descendants.
bool annotation_before(const CenterAnnotation& a, const CenterAnnotation& b);
void sort_annotations(std::vector<CenterAnnotation>& annotations);

// Sorted annotations whose cost_decrease is the trigger cost d(parent).
std::vector<CenterAnnotation> kcenter_order(const LcaTree& tree);
// One annotation per center, in bottom-up discovery order.
std::vector<CenterAnnotation> kz_annotate(const LcaTree& tree, int z);
std::vector<CenterAnnotation> annotate_sorted(const LcaTree& tree, Objective objective);

// CostDecrease of every node (root = +inf), indexed like the tree arena.
std::vector<double> node_cost_decreases(const LcaTree& tree, int z);

// Re-points parent_center links toward the Euclidean-closest eligible center.
void optimize_annotations(std::vector<CenterAnnotation>& sorted, const LcaTree& tree, const PointSet& points);

struct CostCurve {
    Objective objective;
    std::vector<double> losses;  // L_1..L_n
    std::vector<double> deltas;  // L_{k+1} - L_k, k = 1..n-1
};

CostCurve cost_curve(const std::vector<CenterAnnotation>& sorted, Objective objective);
CostCurve cost_curve(const LcaTree& tree, Objective objective);

struct HierarchyNode {
    node_t center = no_node;
    std::int64_t split_k = 1;
    double cost = 0;
    std::optional<double> gain;  // cost-decrease that created the node; none for the root
    node_t parent = no_node;
    std::vector<node_t> children;  // children[0] keeps the parent's center
    std::int64_t span_begin = 0;
    std::int64_t span_size = 0;
};

struct ClusterHierarchy {
    Objective objective;
    std::int64_t n_points = 0;
    std::vector<HierarchyNode> nodes;  // node 0 is the root; parents precede children
    std::vector<node_t> leaf_order;    // points in postfix order
    std::vector<double> losses;

    node_t root() const { return 0; }
    bool is_continuation(node_t v) const {
        const auto p = nodes[v].parent;
        return p != no_node && nodes[p].children.front() == v;
    }
    void finalize_spans();
};

ClusterHierarchy build_hierarchy(const std::vector<CenterAnnotation>& sorted, Objective objective);
// Replaces node costs with direct evaluation over each node's points.
void recompute_costs(ClusterHierarchy& hier, const LcaTree& tree);
// Full pipeline; tiebreak points enable the Euclidean refinement.
ClusterHierarchy make_hierarchy(const LcaTree& tree, Objective objective, const PointSet* tiebreak = nullptr);

inline constexpr std::int64_t noise = -1;

struct Partition {
    std::vector<std::int64_t> labels;  // noise = -1
    std::vector<node_t> centers;       // per label; empty when not defined
    std::int64_t k = 0;
    double cost = std::numeric_limits<double>::quiet_NaN();
};

// Labels numbered by first appearance over point indices.
void canonicalize(Partition& p);

Partition extract_partition(const ClusterHierarchy& hier, std::int64_t k);
Partition kcenter_solution(const LcaTree& tree, std::int64_t k);

}  // namespace ship
