#include "ship/hierarchy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace ship {

Objective Objective::power(int z) {
    if (z < 1 || z > max_power) throw InvalidArgument("z must be in [1, " + std::to_string(max_power) + "]");
    return {Kind::power, z};
}

Objective Objective::parse(std::string_view text) {
    if (text == "center" || text == "k-center" || text == "kcenter") return center();
    if (text == "median") return power(1);
    if (text == "means") return power(2);
    std::string_view num = text;
    if (num.starts_with("z=")) num.remove_prefix(2);
    int z = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), z);
    if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty())
        throw InvalidArgument("unknown objective '" + std::string(text) + "'");
    return power(z);
}

std::string Objective::tag() const { return is_center() ? "center" : "z=" + std::to_string(z); }

double power_of(double x, int z) {
    double r = x;
    for (int i = 1; i < z; ++i) r *= x;
    return r;
}

bool annotation_before(const CenterAnnotation& a, const CenterAnnotation& b) {
    if (a.root != b.root) return a.root;
    if (a.cost_decrease != b.cost_decrease) return a.cost_decrease > b.cost_decrease;
    if (a.span_begin != b.span_begin) return a.span_begin < b.span_begin;
    if (a.size != b.size) return a.size > b.size;
    return a.center < b.center;
}

void sort_annotations(std::vector<CenterAnnotation>& annotations) {
    std::stable_sort(annotations.begin(), annotations.end(), annotation_before);
}

namespace {

CenterAnnotation make_annotation(const LcaTree& t, node_t node, node_t center, node_t parent_center, double cd,
                                 double subtree, double self) {
    CenterAnnotation a;
    a.cost_decrease = cd;
    a.center = center;
    a.parent_center = parent_center;
    a.node = node;
    a.subtree_cost = subtree;
    a.self_cost = self;
    a.span_begin = t.span_begin(node);
    a.size = t.size(node);
    return a;
}

struct ZPass {
    std::vector<node_t> center;
    std::vector<double> cost;
    std::vector<node_t> chosen;  // chosen child per internal node
};

ZPass z_pass(const LcaTree& t, int z) {
    ZPass p;
    const auto m = static_cast<std::size_t>(t.n_nodes());
    p.center.assign(m, no_node);
    p.cost.assign(m, 0);
    p.chosen.assign(m, no_node);
    for (node_t v : t.postorder()) {
        if (t.is_leaf(v)) {
            p.center[v] = v;
            p.cost[v] = power_of(t.value(v), z);
            continue;
        }
        const double dz = power_of(t.value(v), z);
        const auto sz = static_cast<double>(t.size(v));
        double best = 0;
        node_t pick = no_node;
        for (node_t c : t.children(v)) {
            const double here = p.cost[c] + dz * (sz - static_cast<double>(t.size(c)));
            if (pick == no_node || here < best) {
                best = here;
                pick = c;
            }
        }
        p.chosen[v] = pick;
        p.center[v] = p.center[pick];
        p.cost[v] = best;
    }
    return p;
}

}  // namespace

std::vector<CenterAnnotation> kz_annotate(const LcaTree& t, int z) {
    Objective::power(z);
    ZPass p = z_pass(t, z);
    std::vector<CenterAnnotation> out;
    out.reserve(static_cast<std::size_t>(t.n_points()));
    for (node_t v : t.postorder()) {
        if (t.is_leaf(v)) continue;
        const double dz = power_of(t.value(v), z);
        for (node_t c : t.children(v)) {
            if (c == p.chosen[v]) continue;
            const double cd = static_cast<double>(t.size(c)) * dz - p.cost[c];
            const node_t ctr = p.center[c];
            out.push_back(make_annotation(t, c, ctr, p.center[v], cd, p.cost[c], power_of(t.value(ctr), z)));
        }
    }
    const node_t r = t.root();
    auto ra = make_annotation(t, r, p.center[r], no_node, 0, p.cost[r], power_of(t.value(p.center[r]), z));
    ra.root = true;
    out.push_back(ra);
    return out;
}

std::vector<double> node_cost_decreases(const LcaTree& t, int z) {
    ZPass p = z_pass(t, z);
    std::vector<double> out(static_cast<std::size_t>(t.n_nodes()));
    for (node_t v = 0; v < t.n_nodes(); ++v) {
        const node_t par = t.parent(v);
        out[v] = par == no_node ? std::numeric_limits<double>::infinity()
                                : static_cast<double>(t.size(v)) * power_of(t.value(par), z) - p.cost[v];
    }
    return out;
}

std::vector<CenterAnnotation> kcenter_order(const LcaTree& t) {
    std::vector<node_t> center(static_cast<std::size_t>(t.n_nodes()), no_node);
    for (node_t v : t.postorder()) center[v] = t.is_leaf(v) ? v : center[t.children(v).front()];
    std::vector<CenterAnnotation> out;
    out.reserve(static_cast<std::size_t>(t.n_points()));
    for (node_t v = static_cast<node_t>(t.n_points()); v < t.n_nodes(); ++v) {
        auto ch = t.children(v);
        for (std::size_t k = 1; k < ch.size(); ++k) {
            const node_t ctr = center[ch[k]];
            out.push_back(make_annotation(t, ch[k], ctr, center[v], t.value(v), t.value(ch[k]), t.value(ctr)));
        }
    }
    const node_t r = t.root();
    auto ra = make_annotation(t, r, center[r], no_node, 0, t.value(r), t.value(center[r]));
    ra.root = true;
    out.push_back(ra);
    sort_annotations(out);
    return out;
}

std::vector<CenterAnnotation> annotate_sorted(const LcaTree& tree, Objective objective) {
    if (objective.is_center()) return kcenter_order(tree);
    auto a = kz_annotate(tree, objective.z);
    sort_annotations(a);
    return a;
}

void optimize_annotations(std::vector<CenterAnnotation>& sorted, const LcaTree& t, const PointSet& points) {
    if (points.size() != t.n_points()) throw InvalidArgument("point count does not match tree");
    const auto m = static_cast<std::size_t>(t.n_nodes());
    const auto d = static_cast<std::size_t>(points.dim());
    std::vector<double> rep(m * d, 0.0);
    for (node_t v : t.postorder()) {
        double* r = rep.data() + static_cast<std::size_t>(v) * d;
        if (t.is_leaf(v)) {
            for (std::size_t k = 0; k < d; ++k) r[k] = points.at(v, static_cast<std::int64_t>(k));
            continue;
        }
        for (node_t c : t.children(v)) {
            const double* rc = rep.data() + static_cast<std::size_t>(c) * d;
            const auto w = static_cast<double>(t.size(c));
            for (std::size_t k = 0; k < d; ++k) r[k] += rc[k] * w;
        }
        const auto sz = static_cast<double>(t.size(v));
        for (std::size_t k = 0; k < d; ++k) r[k] /= sz;
    }
    std::vector<std::int64_t> anno_at(m, -1);
    for (std::size_t i = 0; i < sorted.size(); ++i) anno_at[sorted[i].node] = static_cast<std::int64_t>(i);
    std::vector<double> best(sorted.size(), std::numeric_limits<double>::infinity());
    std::vector<char> mark(m, 0);
    for (const auto& a : sorted) {
        const double* cp = points.row(a.center);
        for (node_t v = a.center; v != no_node; v = t.parent(v)) {
            mark[v] = 1;
            for (node_t c : t.children(v)) {
                if (mark[c] || anno_at[c] < 0) continue;
                const double* rc = rep.data() + static_cast<std::size_t>(c) * d;
                double s = 0;
                for (std::size_t k = 0; k < d; ++k) s += (rc[k] - cp[k]) * (rc[k] - cp[k]);
                auto& target = sorted[static_cast<std::size_t>(anno_at[c])];
                if (s < best[anno_at[c]]) {
                    best[anno_at[c]] = s;
                    target.parent_center = a.center;
                }
            }
        }
    }
}

CostCurve cost_curve(const std::vector<CenterAnnotation>& sorted, Objective objective) {
    CostCurve c;
    c.objective = objective;
    const std::size_t n = sorted.size();
    if (n == 0) return c;
    c.losses.assign(n, 0);
    if (objective.is_center()) {
        double self = 0;
        for (const auto& a : sorted) self = std::max(self, a.self_cost);
        c.losses[n - 1] = self;
        for (std::size_t k = 0; k + 1 < n; ++k) c.losses[k] = std::max(sorted[k + 1].cost_decrease, self);
    } else {
        double tail = 0;
        for (const auto& a : sorted) tail += a.self_cost;
        c.losses[n - 1] = tail;
        for (std::size_t k = n - 1; k-- > 0;) c.losses[k] = c.losses[k + 1] + sorted[k + 1].cost_decrease;
    }
    c.deltas.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        c.deltas[k] = objective.is_center() ? c.losses[k + 1] - c.losses[k] : -sorted[k + 1].cost_decrease;
    return c;
}

CostCurve cost_curve(const LcaTree& tree, Objective objective) {
    return cost_curve(annotate_sorted(tree, objective), objective);
}

void ClusterHierarchy::finalize_spans() {
    leaf_order.clear();
    leaf_order.reserve(static_cast<std::size_t>(n_points));
    std::vector<std::pair<node_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        auto& nd = nodes[v];
        if (next == 0) nd.span_begin = static_cast<std::int64_t>(leaf_order.size());
        if (nd.children.empty()) leaf_order.push_back(nd.center);
        if (next < nd.children.size()) {
            node_t c = nd.children[next++];
            stack.emplace_back(c, 0);
            continue;
        }
        nd.span_size = static_cast<std::int64_t>(leaf_order.size()) - nd.span_begin;
        stack.pop_back();
    }
}

ClusterHierarchy build_hierarchy(const std::vector<CenterAnnotation>& sorted, Objective objective) {
    const auto n = static_cast<std::int64_t>(sorted.size());
    if (n == 0 || !sorted.front().root) throw InvalidArgument("annotations lack a leading root annotation");
    ClusterHierarchy h;
    h.objective = objective;
    h.n_points = n;
    h.nodes.reserve(static_cast<std::size_t>(2 * n - 1));
    std::vector<node_t> active(static_cast<std::size_t>(n), no_node);
    std::vector<char> split(static_cast<std::size_t>(2 * n), 0);
    std::vector<double> split_gain(static_cast<std::size_t>(2 * n), 0);
    std::vector<double> subtree(static_cast<std::size_t>(n), 0);
    std::vector<double> self(static_cast<std::size_t>(n), 0);

    auto check_center = [&](node_t c) {
        if (c < 0 || c >= n) throw InvalidArgument("annotation center out of range");
        if (active[c] != no_node) throw InvalidArgument("duplicate center " + std::to_string(c));
    };
    const auto& r = sorted.front();
    check_center(r.center);
    h.nodes.push_back({r.center, 1, 0, std::nullopt, no_node, {}, 0, 0});
    active[r.center] = 0;
    subtree[r.center] = r.subtree_cost;
    self[r.center] = r.self_cost;

    auto add_node = [&](node_t center, std::int64_t k, double gain, node_t parent) {
        const auto id = static_cast<node_t>(h.nodes.size());
        h.nodes.push_back({center, k, 0, gain, parent, {}, 0, 0});
        h.nodes[parent].children.push_back(id);
        return id;
    };
    for (std::int64_t i = 1; i < n; ++i) {
        const auto& a = sorted[i];
        if (a.root) throw InvalidArgument("more than one root annotation");
        check_center(a.center);
        if (a.parent_center < 0 || a.parent_center >= n || active[a.parent_center] == no_node)
            throw InvalidArgument("annotation for center " + std::to_string(a.center) + " precedes its parent center");
        const std::int64_t k = i + 1;
        const node_t pc = a.parent_center;
        node_t at = active[pc];
        node_t fresh;
        if (split[at] && split_gain[at] == a.cost_decrease) {
            fresh = add_node(a.center, k, a.cost_decrease, at);
        } else {
            if (split[at]) {
                at = h.nodes[at].children.front();
                active[pc] = at;
            }
            add_node(pc, k, a.cost_decrease, at);
            fresh = add_node(a.center, k, a.cost_decrease, at);
            split[at] = 1;
            split_gain[at] = a.cost_decrease;
        }
        active[a.center] = fresh;
        subtree[a.center] = a.subtree_cost;
        self[a.center] = a.self_cost;
    }

    // Bottom-up costs: a split-off child contributes gain + its own subtree cost.
    for (std::size_t v = h.nodes.size(); v-- > 0;) {
        auto& nd = h.nodes[v];
        if (nd.children.empty()) {
            nd.cost = self[nd.center];
            continue;
        }
        double c = h.nodes[nd.children.front()].cost;
        for (std::size_t j = 1; j < nd.children.size(); ++j) {
            const auto& ch = h.nodes[nd.children[j]];
            if (objective.is_center())
                c = std::max(c, *ch.gain);
            else
                c += *ch.gain + subtree[ch.center];
        }
        nd.cost = c;
    }
    h.finalize_spans();
    h.losses = cost_curve(sorted, objective).losses;
    return h;
}

void recompute_costs(ClusterHierarchy& h, const LcaTree& tree) {
    if (tree.n_points() != h.n_points) throw InvalidArgument("hierarchy and tree sizes differ");
    LcaIndex idx(tree);
    for (auto& nd : h.nodes) {
        double c = 0;
        for (std::int64_t s = nd.span_begin; s < nd.span_begin + nd.span_size; ++s) {
            const double d = idx.distance(h.leaf_order[static_cast<std::size_t>(s)], nd.center);
            if (h.objective.is_center())
                c = std::max(c, d);
            else
                c += power_of(d, h.objective.z);
        }
        nd.cost = c;
    }
}

ClusterHierarchy make_hierarchy(const LcaTree& tree, Objective objective, const PointSet* tiebreak) {
    auto a = annotate_sorted(tree, objective);
    if (tiebreak) optimize_annotations(a, tree, *tiebreak);
    auto h = build_hierarchy(a, objective);
    if (tiebreak) recompute_costs(h, tree);
    return h;
}

void canonicalize(Partition& p) {
    std::vector<std::int64_t> remap;
    std::vector<node_t> centers;
    std::int64_t next = 0;
    std::vector<std::int64_t> seen;
    for (auto& l : p.labels) {
        if (l == noise) continue;
        if (l >= static_cast<std::int64_t>(seen.size())) seen.resize(static_cast<std::size_t>(l + 1), -1);
        if (seen[l] < 0) {
            seen[l] = next++;
            if (!p.centers.empty()) centers.push_back(p.centers[static_cast<std::size_t>(l)]);
        }
        l = seen[l];
    }
    p.centers = std::move(centers);
    p.k = next;
}

Partition extract_partition(const ClusterHierarchy& h, std::int64_t k) {
    if (k < 1 || k > h.n_points)
        throw OutOfRange("k must be in [1, " + std::to_string(h.n_points) + "]; got " + std::to_string(k));
    Partition p;
    std::vector<std::int64_t> label(h.nodes.size(), 0);
    p.centers.push_back(h.nodes[0].center);
    for (std::size_t v = 1; v < h.nodes.size(); ++v) {
        const auto& nd = h.nodes[v];
        if (!h.is_continuation(static_cast<node_t>(v)) && nd.split_k <= k) {
            label[v] = static_cast<std::int64_t>(p.centers.size());
            p.centers.push_back(nd.center);
        } else {
            label[v] = label[nd.parent];
        }
    }
    p.labels.assign(static_cast<std::size_t>(h.n_points), noise);
    for (std::size_t v = 0; v < h.nodes.size(); ++v)
        if (h.nodes[v].children.empty()) p.labels[h.nodes[v].center] = label[v];
    canonicalize(p);
    if (k <= static_cast<std::int64_t>(h.losses.size())) p.cost = h.losses[static_cast<std::size_t>(k - 1)];
    return p;
}

Partition kcenter_solution(const LcaTree& t, std::int64_t k) {
    if (k < 1 || k > t.n_points())
        throw OutOfRange("k must be in [1, " + std::to_string(t.n_points()) + "]; got " + std::to_string(k));
    auto order = kcenter_order(t);
    std::vector<node_t> owner(static_cast<std::size_t>(t.n_nodes()), no_node);
    for (std::int64_t i = 0; i < k; ++i)
        for (node_t v = order[i].center; v != no_node && owner[v] == no_node; v = t.parent(v)) owner[v] = order[i].center;
    auto top_down = t.postorder();
    for (auto it = top_down.rbegin(); it != top_down.rend(); ++it)
        if (owner[*it] == no_node) owner[*it] = owner[t.parent(*it)];
    Partition p;
    p.labels.resize(static_cast<std::size_t>(t.n_points()));
    std::vector<std::int64_t> label_of(static_cast<std::size_t>(t.n_points()), -1);
    for (std::int64_t i = 0; i < k; ++i) {
        label_of[order[i].center] = i;
        p.centers.push_back(order[i].center);
    }
    double cost = 0;
    for (node_t x = 0; x < t.n_points(); ++x) {
        p.labels[x] = label_of[owner[x]];
        cost = std::max(cost, t.lca_distance(x, owner[x]));
    }
    canonicalize(p);
    p.cost = cost;
    return p;
}

}  // namespace ship
