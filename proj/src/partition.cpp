#include "ship/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ship {

std::vector<double> elbow_angles(const std::vector<double>& losses) {
    const auto n = static_cast<std::int64_t>(losses.size());
    if (n < 3) throw InvalidArgument("elbow needs at least three curve points");
    const auto [lo_it, hi_it] = std::minmax_element(losses.begin(), losses.end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    auto x = [&](std::int64_t i) { return static_cast<double>(i) / static_cast<double>(n - 1); };
    auto y = [&](std::int64_t i) { return range > 0 ? (losses[i] - lo) / range : 0.0; };
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n - 2));
    for (std::int64_t i = 1; i + 1 < n; ++i) {
        const double ax = x(0) - x(i), ay = y(0) - y(i);
        const double bx = x(i) - x(n - 1), by = y(i) - y(n - 1);
        const double cross = ax * by - ay * bx;
        const double dot = ax * bx + ay * by;
        out.push_back(std::atan2(std::abs(cross), dot) * 180.0 / std::numbers::pi);
    }
    return out;
}

std::int64_t elbow_index(const std::vector<double>& losses) {
    const auto angles = elbow_angles(losses);
    std::size_t best = 0;
    for (std::size_t i = 1; i < angles.size(); ++i)
        if (std::abs(angles[i] - 90.0) < std::abs(angles[best] - 90.0) - 1e-12) best = i;
    return static_cast<std::int64_t>(best) + 2;
}

std::int64_t lower_median(std::vector<std::int64_t> values) {
    if (values.empty()) throw InvalidArgument("median of an empty list");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

MedianOfElbows median_of_elbows(const LcaTree& tree, const std::vector<int>& zs) {
    if (zs.empty()) throw InvalidArgument("median of elbows needs at least one z");
    MedianOfElbows m;
    m.zs = zs;
    for (int z : zs) m.elbows.push_back(elbow_index(cost_curve(tree, Objective::power(z))));
    m.k = lower_median(m.elbows);
    return m;
}

Partition threshold_partition(const LcaTree& tree, double eps) {
    if (!(eps >= 0)) throw InvalidArgument("eps must be non-negative");
    Partition p;
    p.labels.assign(static_cast<std::size_t>(tree.n_points()), noise);
    std::vector<node_t> stack{tree.root()};
    while (!stack.empty()) {
        node_t v = stack.back();
        stack.pop_back();
        if (tree.value(v) < eps) {
            const auto label = static_cast<std::int64_t>(p.centers.size());
            auto leaves = tree.leaves_of(v);
            p.centers.push_back(leaves.front());
            for (node_t x : leaves) p.labels[x] = label;
            continue;
        }
        auto ch = tree.children(v);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    canonicalize(p);
    return p;
}

Partition threshold_partition(const ClusterHierarchy& h, double eps) {
    if (!(eps >= 0)) throw InvalidArgument("eps must be non-negative");
    Partition p;
    p.labels.assign(static_cast<std::size_t>(h.n_points), noise);
    std::vector<node_t> stack{h.root()};
    while (!stack.empty()) {
        node_t v = stack.back();
        stack.pop_back();
        const auto& nd = h.nodes[v];
        if (nd.cost < eps) {
            const auto label = static_cast<std::int64_t>(p.centers.size());
            p.centers.push_back(nd.center);
            for (std::int64_t s = nd.span_begin; s < nd.span_begin + nd.span_size; ++s)
                p.labels[h.leaf_order[static_cast<std::size_t>(s)]] = label;
            continue;
        }
        for (auto it = nd.children.rbegin(); it != nd.children.rend(); ++it) stack.push_back(*it);
    }
    canonicalize(p);
    return p;
}

double stability_value(std::int64_t size, double cost, double parent_cost, double cap) {
    if (cost == parent_cost) return 0.0;
    if (cost == 0) return cap * static_cast<double>(size);
    const double v = static_cast<double>(size) * (1.0 / cost - 1.0 / parent_cost);
    return v > 0 ? v : 0.0;
}

Selection best_antichain(const std::vector<std::int64_t>& parent, const std::vector<double>& value) {
    const std::size_t m = parent.size();
    if (value.size() != m) throw InvalidArgument("value and parent arrays differ in length");
    std::vector<std::vector<std::int64_t>> kids(m);
    std::vector<std::int64_t> roots;
    for (std::size_t v = 0; v < m; ++v) {
        if (value[v] < 0 || std::isnan(value[v])) throw InvalidArgument("cluster values must be non-negative");
        if (parent[v] < 0)
            roots.push_back(static_cast<std::int64_t>(v));
        else if (parent[v] >= static_cast<std::int64_t>(m))
            throw InvalidArgument("parent index out of range");
        else
            kids[static_cast<std::size_t>(parent[v])].push_back(static_cast<std::int64_t>(v));
    }
    std::vector<std::int64_t> order;
    order.reserve(m);
    std::vector<std::int64_t> stack(roots.rbegin(), roots.rend());
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (auto c : kids[v]) stack.push_back(c);
    }
    if (order.size() != m) throw InvalidArgument("parent links contain a cycle");
    std::vector<double> best(m, 0);
    std::vector<char> keep(m, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto v = static_cast<std::size_t>(*it);
        double sum = 0;
        for (auto c : kids[v]) sum += best[c];
        if (kids[v].empty() || value[v] > sum) {
            keep[v] = 1;
            best[v] = value[v];
        } else {
            best[v] = sum;
        }
    }
    Selection s;
    stack.assign(roots.rbegin(), roots.rend());
    for (auto r : roots) s.total += best[r];
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (keep[v]) {
            s.chosen.push_back(v);
            continue;
        }
        for (auto it = kids[v].rbegin(); it != kids[v].rend(); ++it) stack.push_back(*it);
    }
    return s;
}

std::vector<double> stability_values(const ClusterHierarchy& h) {
    std::vector<double> v(h.nodes.size(), 0.0);
    for (std::size_t i = 1; i < h.nodes.size(); ++i) {
        const auto& nd = h.nodes[i];
        v[i] = stability_value(nd.span_size, nd.cost, h.nodes[nd.parent].cost);
    }
    return v;
}

StabilityResult best_partition(const ClusterHierarchy& h, const std::vector<double>& node_values,
                               std::int64_t min_cluster_size, StabilityMode mode) {
    if (min_cluster_size < 1) throw InvalidArgument("min_cluster_size must be at least 1");
    if (node_values.size() != h.nodes.size()) throw InvalidArgument("one value per hierarchy node required");
    StabilityResult r;
    r.partition.labels.assign(static_cast<std::size_t>(h.n_points), noise);
    if (h.nodes.front().span_size < min_cluster_size) {
        r.all_pruned = true;
        return r;
    }
    const std::size_t m = h.nodes.size();
    auto kept = [&](std::size_t v) { return h.nodes[v].span_size >= min_cluster_size; };
    std::vector<std::int64_t> kept_children(m, 0);
    for (std::size_t v = 1; v < m; ++v)
        if (kept(v)) ++kept_children[static_cast<std::size_t>(h.nodes[v].parent)];

    // Candidate clusters: each kept node, or each maximal unary chain when condensed.
    std::vector<std::int64_t> cand(m, -1);
    std::vector<std::int64_t> cand_parent;
    std::vector<double> cand_value;
    std::vector<node_t> cand_top;
    for (std::size_t v = 0; v < m; ++v) {
        if (!kept(v)) continue;
        const node_t p = h.nodes[v].parent;
        if (p != no_node && mode == StabilityMode::condensed && kept_children[p] == 1) {
            cand[v] = cand[p];
            cand_value[static_cast<std::size_t>(cand[v])] += node_values[v];
            continue;
        }
        cand[v] = static_cast<std::int64_t>(cand_top.size());
        cand_parent.push_back(p == no_node ? -1 : cand[p]);
        cand_value.push_back(node_values[v]);
        cand_top.push_back(static_cast<node_t>(v));
    }
    Selection s = best_antichain(cand_parent, cand_value);
    r.total_value = s.total;
    auto& part = r.partition;
    for (auto c : s.chosen) {
        const auto& nd = h.nodes[cand_top[static_cast<std::size_t>(c)]];
        const auto label = static_cast<std::int64_t>(part.centers.size());
        part.centers.push_back(nd.center);
        for (std::int64_t i = nd.span_begin; i < nd.span_begin + nd.span_size; ++i)
            part.labels[h.leaf_order[static_cast<std::size_t>(i)]] = label;
    }
    canonicalize(part);
    return r;
}

StabilityResult best_partition(const ClusterHierarchy& h, std::int64_t min_cluster_size, StabilityMode mode) {
    return best_partition(h, stability_values(h), min_cluster_size, mode);
}

}  // namespace ship
