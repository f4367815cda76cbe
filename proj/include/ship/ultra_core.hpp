#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ship/errors.hpp"

namespace ship {

using node_t = std::int32_t;
inline constexpr node_t no_node = -1;

// Raw description of a tree, as read from disk or assembled by hand.
// Nodes [0, n_points) are the leaves of points 0..n_points-1; internal nodes follow.
struct TreeParts {
    std::int64_t n_points = 0;
    node_t root = no_node;
    std::vector<double> values;
    std::vector<node_t> parents;
    std::vector<std::vector<node_t>> children;
};

struct Violation {
    enum class Kind { negative_leaf, non_monotone, not_a_number };
    Kind kind;
    node_t node;
    node_t ancestor;  // no_node unless kind == non_monotone
    double node_value;
    double ancestor_value;
    std::string describe() const;
};

enum class ValidationStatus { ok, structural, violations };

struct ValidationReport {
    ValidationStatus status = ValidationStatus::ok;
    std::string structural_error;
    std::vector<Violation> violations;
    bool ok() const { return status == ValidationStatus::ok; }
};

class LcaTree {
public:
    LcaTree() = default;

    // Throws StructureError when the parts are not a well-formed tree.
    // Child order is kept as given.
    static LcaTree from_parts(const TreeParts& parts);
    TreeParts parts() const;

    std::int64_t n_points() const { return n_points_; }
    std::int64_t n_nodes() const { return static_cast<std::int64_t>(value_.size()); }
    node_t root() const { return root_; }

    bool is_leaf(node_t v) const { return v < n_points_; }
    double value(node_t v) const { return value_[check(v)]; }
    node_t parent(node_t v) const { return parent_[check(v)]; }
    std::span<const node_t> children(node_t v) const;
    std::int64_t size(node_t v) const { return size_[check(v)]; }
    std::int64_t span_begin(node_t v) const { return begin_[check(v)]; }
    std::int64_t span_end(node_t v) const { return begin_[check(v)] + size_[v]; }

    std::span<const node_t> leaf_order() const { return leaf_order_; }
    std::span<const node_t> leaves_of(node_t v) const;
    // Offset of point i inside leaf_order.
    std::int64_t position(node_t i) const { return pos_[check_point(i)]; }

    node_t lca(node_t i, node_t j) const;
    double lca_distance(node_t i, node_t j) const { return value_[lca(i, j)]; }

    // Nodes in an order where every child precedes its parent.
    std::vector<node_t> postorder() const;

    // Same topology, new per-node values (indexed like the arena).
    LcaTree with_values(std::vector<double> values) const;

private:
    friend class TreeBuilder;
    void finalize();
    node_t check(node_t v) const;
    node_t check_point(node_t i) const;

    std::int64_t n_points_ = 0;
    node_t root_ = no_node;
    std::vector<double> value_;
    std::vector<node_t> parent_;
    std::vector<std::int64_t> child_off_;
    std::vector<node_t> child_list_;
    std::vector<std::int64_t> size_;
    std::vector<std::int64_t> begin_;
    std::vector<node_t> leaf_order_;
    std::vector<std::int64_t> pos_;
};

// Incremental construction; children end up ordered by smallest contained point.
class TreeBuilder {
public:
    explicit TreeBuilder(std::int64_t n_points);
    void set_leaf_value(node_t i, double value);
    node_t add_internal(double value, std::span<const node_t> children);
    std::int64_t n_nodes() const { return static_cast<std::int64_t>(values_.size()); }
    LcaTree finish();

private:
    std::int64_t n_points_;
    std::vector<double> values_;
    std::vector<node_t> parents_;
    std::vector<std::vector<node_t>> children_;
};

// Constant-time LCA over leaves (sparse table on adjacent-leaf LCAs).
class LcaIndex {
public:
    explicit LcaIndex(const LcaTree& tree);
    node_t lca(node_t i, node_t j) const;
    double distance(node_t i, node_t j) const { return tree_->value(lca(i, j)); }

private:
    const LcaTree* tree_;
    std::vector<std::int32_t> depth_;
    std::vector<std::vector<node_t>> table_;
};

ValidationReport validate(const LcaTree& tree);
ValidationReport validate(const TreeParts& parts);

struct WeightedEdge {
    node_t u;
    node_t v;
    double w;
};

// Kruskal-style union of spanning-tree edges; equal weights merge into one node.
LcaTree tree_from_spanning_edges(std::int64_t n, std::span<const double> leaf_values,
                                 std::vector<WeightedEdge> edges);

class Dissimilarity {
public:
    using Fn = std::function<double(std::int64_t, std::int64_t)>;
    static Dissimilarity from_matrix(std::vector<double> row_major, std::int64_t n);
    static Dissimilarity from_function(std::int64_t n, Fn fn);
    std::int64_t size() const { return n_; }
    double operator()(std::int64_t i, std::int64_t j) const;

private:
    std::int64_t n_ = 0;
    std::vector<double> matrix_;
    Fn fn_;
};

// Throws NotUltrametric with a witness when src is not a relaxed ultrametric.
LcaTree build_from_dissimilarity(const Dissimilarity& src);

inline constexpr std::int64_t default_node_budget = std::int64_t{1} << 24;
LcaTree make_worstcase_tree(int depth, std::int64_t node_budget = default_node_budget);

}  // namespace ship
