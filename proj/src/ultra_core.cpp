#include "ship/ultra_core.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace ship {

namespace {

std::string structural_error(const TreeParts& p) {
    std::ostringstream os;
    const std::int64_t n = p.n_points;
    const auto m = static_cast<std::int64_t>(p.values.size());
    if (n < 1) return "tree has no points";
    if (m < n) return "fewer nodes than points";
    if (static_cast<std::int64_t>(p.parents.size()) != m ||
        static_cast<std::int64_t>(p.children.size()) != m)
        return "node arrays differ in length";
    if (p.root < 0 || p.root >= m) return "root index out of range";
    if (p.parents[p.root] != no_node) return "root has a parent";
    if (m == 1 ? p.root != 0 : p.root < n) return "root must be internal unless n_points is 1";

    std::vector<std::int64_t> seen_as_child(m, 0);
    for (std::int64_t v = 0; v < m; ++v) {
        const auto& ch = p.children[v];
        if (v < n && !ch.empty()) {
            os << "leaf " << v << " has children";
            return os.str();
        }
        if (v >= n && ch.size() < 2) {
            os << "internal node " << v << " has fewer than two children";
            return os.str();
        }
        for (node_t c : ch) {
            if (c < 0 || c >= m) {
                os << "node " << v << " lists child " << c << " out of range";
                return os.str();
            }
            if (p.parents[c] != v) {
                os << "node " << c << " is a child of " << v << " but its parent is " << p.parents[c];
                return os.str();
            }
            if (++seen_as_child[c] > 1) {
                os << "node " << c << " listed as a child more than once";
                return os.str();
            }
        }
    }
    for (std::int64_t v = 0; v < m; ++v) {
        if (v == p.root) continue;
        const node_t par = p.parents[v];
        if (par == no_node) {
            os << "orphan node " << v;
            return os.str();
        }
        if (par < 0 || par >= m || seen_as_child[v] != 1) {
            os << "node " << v << " has parent " << par << " which does not list it";
            return os.str();
        }
    }
    // Reachability from the root rules out cycles among non-root nodes.
    std::vector<node_t> stack{p.root};
    std::int64_t reached = 0;
    std::vector<char> mark(m, 0);
    mark[p.root] = 1;
    while (!stack.empty()) {
        node_t v = stack.back();
        stack.pop_back();
        ++reached;
        for (node_t c : p.children[v]) {
            if (mark[c]) return "cycle in parent chain";
            mark[c] = 1;
            stack.push_back(c);
        }
    }
    if (reached != m) {
        for (std::int64_t v = 0; v < m; ++v)
            if (!mark[v]) {
                os << "node " << v << " unreachable from root (cyclic parent chain)";
                return os.str();
            }
    }
    return {};
}

template <class ValueAt, class ParentAt>
std::vector<Violation> condition_violations(std::int64_t n_points, std::int64_t n_nodes, ValueAt value,
                                            ParentAt parent) {
    std::vector<Violation> out;
    for (std::int64_t v = 0; v < n_nodes; ++v) {
        const double x = value(v);
        if (std::isnan(x)) {
            out.push_back({Violation::Kind::not_a_number, static_cast<node_t>(v), no_node, x, 0.0});
            continue;
        }
        if (v < n_points && x < 0.0)
            out.push_back({Violation::Kind::negative_leaf, static_cast<node_t>(v), no_node, x, 0.0});
        const node_t p = parent(v);
        if (p != no_node && !std::isnan(value(p)) && x > value(p))
            out.push_back({Violation::Kind::non_monotone, static_cast<node_t>(v), p, x, value(p)});
    }
    return out;
}

struct Dsu {
    std::vector<node_t> up;
    explicit Dsu(std::int64_t n) : up(n) { std::iota(up.begin(), up.end(), 0); }
    node_t find(node_t x) {
        while (up[x] != x) {
            up[x] = up[up[x]];
            x = up[x];
        }
        return x;
    }
    bool join(node_t a, node_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        up[b] = a;
        return true;
    }
};

}  // namespace

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::negative_leaf: os << "leaf " << node << " has negative value " << node_value; break;
        case Kind::not_a_number: os << "node " << node << " has a NaN value"; break;
        case Kind::non_monotone:
            os << "node " << node << " value " << node_value << " exceeds ancestor " << ancestor << " value "
               << ancestor_value;
            break;
    }
    return os.str();
}

node_t LcaTree::check(node_t v) const {
    if (v < 0 || v >= static_cast<node_t>(value_.size())) throw OutOfRange("node index " + std::to_string(v) + " out of range");
    return v;
}

node_t LcaTree::check_point(node_t i) const {
    if (i < 0 || i >= n_points_) throw OutOfRange("point index " + std::to_string(i) + " out of range");
    return i;
}

std::span<const node_t> LcaTree::children(node_t v) const {
    check(v);
    return {child_list_.data() + child_off_[v], static_cast<std::size_t>(child_off_[v + 1] - child_off_[v])};
}

std::span<const node_t> LcaTree::leaves_of(node_t v) const {
    check(v);
    return {leaf_order_.data() + begin_[v], static_cast<std::size_t>(size_[v])};
}

LcaTree LcaTree::from_parts(const TreeParts& parts) {
    if (auto err = structural_error(parts); !err.empty()) throw StructureError(err);
    LcaTree t;
    t.n_points_ = parts.n_points;
    t.root_ = parts.root;
    t.value_ = parts.values;
    t.parent_ = parts.parents;
    const auto m = parts.values.size();
    t.child_off_.assign(m + 1, 0);
    for (std::size_t v = 0; v < m; ++v) t.child_off_[v + 1] = t.child_off_[v] + static_cast<std::int64_t>(parts.children[v].size());
    t.child_list_.reserve(static_cast<std::size_t>(t.child_off_[m]));
    for (const auto& ch : parts.children) t.child_list_.insert(t.child_list_.end(), ch.begin(), ch.end());
    t.finalize();
    return t;
}

void LcaTree::finalize() {
    const auto m = value_.size();
    size_.assign(m, 0);
    begin_.assign(m, 0);
    leaf_order_.clear();
    leaf_order_.reserve(static_cast<std::size_t>(n_points_));
    std::vector<std::pair<node_t, std::int64_t>> stack;
    stack.emplace_back(root_, child_off_[root_]);
    begin_[root_] = 0;
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (v < n_points_) {
            begin_[v] = static_cast<std::int64_t>(leaf_order_.size());
            size_[v] = 1;
            leaf_order_.push_back(v);
            stack.pop_back();
            continue;
        }
        if (next < child_off_[v + 1]) {
            node_t c = child_list_[next++];
            if (next - 1 == child_off_[v]) begin_[v] = static_cast<std::int64_t>(leaf_order_.size());
            stack.emplace_back(c, child_off_[c]);
            continue;
        }
        size_[v] = static_cast<std::int64_t>(leaf_order_.size()) - begin_[v];
        stack.pop_back();
    }
    pos_.assign(static_cast<std::size_t>(n_points_), 0);
    for (std::size_t k = 0; k < leaf_order_.size(); ++k) pos_[leaf_order_[k]] = static_cast<std::int64_t>(k);
}

TreeParts LcaTree::parts() const {
    TreeParts p;
    p.n_points = n_points_;
    p.root = root_;
    p.values = value_;
    p.parents = parent_;
    p.children.resize(value_.size());
    for (std::size_t v = 0; v < value_.size(); ++v) {
        auto ch = children(static_cast<node_t>(v));
        p.children[v].assign(ch.begin(), ch.end());
    }
    return p;
}

LcaTree LcaTree::with_values(std::vector<double> values) const {
    if (values.size() != value_.size()) throw InvalidArgument("value array length does not match node count");
    LcaTree t = *this;
    t.value_ = std::move(values);
    return t;
}

node_t LcaTree::lca(node_t i, node_t j) const {
    check_point(i);
    const std::int64_t pj = pos_[check_point(j)];
    node_t v = i;
    while (!(begin_[v] <= pj && pj < begin_[v] + size_[v])) v = parent_[v];
    return v;
}

std::vector<node_t> LcaTree::postorder() const {
    std::vector<node_t> out;
    out.reserve(value_.size());
    std::vector<node_t> stack{root_};
    while (!stack.empty()) {
        node_t v = stack.back();
        stack.pop_back();
        out.push_back(v);
        for (std::int64_t k = child_off_[v]; k < child_off_[v + 1]; ++k) stack.push_back(child_list_[k]);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

TreeBuilder::TreeBuilder(std::int64_t n_points) : n_points_(n_points) {
    if (n_points < 1) throw InvalidArgument("tree needs at least one point");
    if (n_points > (std::int64_t{1} << 30)) throw BudgetError("too many points");
    values_.assign(static_cast<std::size_t>(n_points), 0.0);
    parents_.assign(static_cast<std::size_t>(n_points), no_node);
    children_.resize(static_cast<std::size_t>(n_points));
}

void TreeBuilder::set_leaf_value(node_t i, double value) {
    if (i < 0 || i >= n_points_) throw OutOfRange("leaf index out of range");
    values_[i] = value;
}

node_t TreeBuilder::add_internal(double value, std::span<const node_t> children) {
    if (children.size() < 2) throw StructureError("internal node needs at least two children");
    const auto id = static_cast<node_t>(values_.size());
    for (node_t c : children) {
        if (c < 0 || c >= id) throw StructureError("child index out of range");
        if (parents_[c] != no_node) throw StructureError("node " + std::to_string(c) + " already has a parent");
    }
    for (node_t c : children) parents_[c] = id;
    values_.push_back(value);
    parents_.push_back(no_node);
    children_.emplace_back(children.begin(), children.end());
    return id;
}

LcaTree TreeBuilder::finish() {
    TreeParts p;
    p.n_points = n_points_;
    const auto m = values_.size();
    std::vector<node_t> min_point(m);
    for (std::size_t v = 0; v < m; ++v) {
        if (static_cast<std::int64_t>(v) < n_points_) {
            min_point[v] = static_cast<node_t>(v);
            continue;
        }
        node_t best = min_point[children_[v].front()];
        for (node_t c : children_[v]) best = std::min(best, min_point[c]);
        min_point[v] = best;
        std::sort(children_[v].begin(), children_[v].end(),
                  [&](node_t a, node_t b) { return min_point[a] < min_point[b]; });
    }
    for (std::size_t v = 0; v < m; ++v)
        if (parents_[v] == no_node) {
            if (p.root != no_node) throw StructureError("more than one parentless node");
            p.root = static_cast<node_t>(v);
        }
    p.values = std::move(values_);
    p.parents = std::move(parents_);
    p.children = std::move(children_);
    return LcaTree::from_parts(p);
}

LcaIndex::LcaIndex(const LcaTree& tree) : tree_(&tree) {
    const auto m = static_cast<std::size_t>(tree.n_nodes());
    depth_.assign(m, 0);
    auto order = tree.postorder();
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (node_t c : tree.children(*it)) depth_[c] = depth_[*it] + 1;
    const auto n = static_cast<std::size_t>(tree.n_points());
    if (n < 2) return;
    std::vector<node_t> adj(n - 1, no_node);
    for (std::size_t v = n; v < m; ++v) {
        auto ch = tree.children(static_cast<node_t>(v));
        for (std::size_t k = 1; k < ch.size(); ++k) adj[static_cast<std::size_t>(tree.span_begin(ch[k])) - 1] = static_cast<node_t>(v);
    }
    table_.push_back(std::move(adj));
    for (std::size_t len = 2; len <= n - 1; len <<= 1) {
        const auto& prev = table_.back();
        std::vector<node_t> next(n - len);
        for (std::size_t i = 0; i + len <= n - 1; ++i) {
            node_t a = prev[i], b = prev[i + len / 2];
            next[i] = depth_[a] <= depth_[b] ? a : b;
        }
        table_.push_back(std::move(next));
    }
}

node_t LcaIndex::lca(node_t i, node_t j) const {
    auto p = tree_->position(i), q = tree_->position(j);
    if (p == q) return i;
    if (p > q) std::swap(p, q);
    const auto len = static_cast<std::size_t>(q - p);
    const int level = std::bit_width(len) - 1;
    node_t a = table_[level][p], b = table_[level][q - (std::size_t{1} << level)];
    return depth_[a] <= depth_[b] ? a : b;
}

ValidationReport validate(const TreeParts& parts) {
    ValidationReport r;
    if (auto err = structural_error(parts); !err.empty()) {
        r.status = ValidationStatus::structural;
        r.structural_error = std::move(err);
        return r;
    }
    r.violations = condition_violations(
        parts.n_points, static_cast<std::int64_t>(parts.values.size()),
        [&](std::int64_t v) { return parts.values[v]; }, [&](std::int64_t v) { return parts.parents[v]; });
    if (!r.violations.empty()) r.status = ValidationStatus::violations;
    return r;
}

ValidationReport validate(const LcaTree& tree) {
    ValidationReport r;
    r.violations = condition_violations(
        tree.n_points(), tree.n_nodes(), [&](std::int64_t v) { return tree.value(static_cast<node_t>(v)); },
        [&](std::int64_t v) { return tree.parent(static_cast<node_t>(v)); });
    if (!r.violations.empty()) r.status = ValidationStatus::violations;
    return r;
}

LcaTree tree_from_spanning_edges(std::int64_t n, std::span<const double> leaf_values, std::vector<WeightedEdge> edges) {
    if (static_cast<std::int64_t>(leaf_values.size()) != n) throw InvalidArgument("leaf value count does not match n");
    if (static_cast<std::int64_t>(edges.size()) != n - 1) throw StructureError("spanning tree needs n-1 edges");
    TreeBuilder b(n);
    for (std::int64_t i = 0; i < n; ++i) b.set_leaf_value(static_cast<node_t>(i), leaf_values[i]);
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
        if (x.w != y.w) return x.w < y.w;
        if (x.u != y.u) return x.u < y.u;
        return x.v < y.v;
    });
    Dsu dsu(n);
    std::vector<node_t> comp(static_cast<std::size_t>(n));
    std::iota(comp.begin(), comp.end(), 0);
    std::vector<node_t> pre;
    std::unordered_map<node_t, std::vector<node_t>> bucket;
    std::vector<node_t> bucket_keys;
    for (std::size_t g = 0; g < edges.size();) {
        std::size_t h = g;
        while (h < edges.size() && edges[h].w == edges[g].w) ++h;
        pre.clear();
        for (std::size_t e = g; e < h; ++e) {
            const auto& ed = edges[e];
            if (ed.u < 0 || ed.u >= n || ed.v < 0 || ed.v >= n) throw StructureError("edge endpoint out of range");
            if (std::isnan(ed.w)) throw InvalidArgument("NaN edge weight");
            pre.push_back(dsu.find(ed.u));
            pre.push_back(dsu.find(ed.v));
        }
        std::sort(pre.begin(), pre.end());
        pre.erase(std::unique(pre.begin(), pre.end()), pre.end());
        std::vector<node_t> pre_comp(pre.size());
        for (std::size_t k = 0; k < pre.size(); ++k) pre_comp[k] = comp[pre[k]];
        for (std::size_t e = g; e < h; ++e)
            if (!dsu.join(edges[e].u, edges[e].v)) throw StructureError("edge list contains a cycle");
        bucket.clear();
        bucket_keys.clear();
        for (std::size_t k = 0; k < pre.size(); ++k) {
            node_t r = dsu.find(pre[k]);
            auto [it, fresh] = bucket.try_emplace(r);
            if (fresh) bucket_keys.push_back(r);
            it->second.push_back(pre_comp[k]);
        }
        for (node_t r : bucket_keys) comp[r] = b.add_internal(edges[g].w, bucket[r]);
        g = h;
    }
    return b.finish();
}

Dissimilarity Dissimilarity::from_matrix(std::vector<double> row_major, std::int64_t n) {
    if (n < 1) throw InvalidArgument("dissimilarity needs at least one point");
    if (static_cast<std::int64_t>(row_major.size()) != n * n) throw InvalidArgument("matrix is not n x n");
    Dissimilarity d;
    d.n_ = n;
    d.matrix_ = std::move(row_major);
    return d;
}

Dissimilarity Dissimilarity::from_function(std::int64_t n, Fn fn) {
    if (n < 1) throw InvalidArgument("dissimilarity needs at least one point");
    Dissimilarity d;
    d.n_ = n;
    d.fn_ = std::move(fn);
    return d;
}

double Dissimilarity::operator()(std::int64_t i, std::int64_t j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw OutOfRange("dissimilarity index out of range");
    return fn_ ? fn_(i, j) : matrix_[static_cast<std::size_t>(i * n_ + j)];
}

LcaTree build_from_dissimilarity(const Dissimilarity& src) {
    const std::int64_t n = src.size();
    auto idx = [](std::int64_t a, std::int64_t b, std::int64_t c) { return std::array<long long, 3>{a, b, c}; };
    for (std::int64_t i = 0; i < n; ++i) {
        const double self = src(i, i);
        if (std::isnan(self)) throw InvalidArgument("NaN dissimilarity");
        if (self < 0) throw NotUltrametric("negative self-dissimilarity at " + std::to_string(i), idx(i, i, -1));
        for (std::int64_t j = i + 1; j < n; ++j) {
            const double a = src(i, j), b = src(j, i);
            if (std::isnan(a) || std::isnan(b)) throw InvalidArgument("NaN dissimilarity");
            if (a != b)
                throw NotUltrametric("not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")", idx(i, j, -1));
            if (a < 0)
                throw NotUltrametric("negative dissimilarity at (" + std::to_string(i) + "," + std::to_string(j) + ")", idx(i, j, -1));
        }
    }
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            if (i != j && src(i, i) > src(i, j))
                throw NotUltrametric("self-dissimilarity of " + std::to_string(i) + " exceeds d(" + std::to_string(i) + "," +
                                         std::to_string(j) + ")",
                                     idx(i, i, j));

    // Dense Prim over off-diagonal entries.
    std::vector<WeightedEdge> edges;
    edges.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<node_t> from(static_cast<std::size_t>(n), no_node);
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    std::int64_t cur = 0;
    in[0] = 1;
    for (std::int64_t step = 1; step < n; ++step) {
        std::int64_t pick = -1;
        for (std::int64_t j = 0; j < n; ++j) {
            if (in[j]) continue;
            const double w = src(cur, j);
            if (w < best[j]) {
                best[j] = w;
                from[j] = static_cast<node_t>(cur);
            }
            if (pick < 0 || best[j] < best[pick]) pick = j;
        }
        in[pick] = 1;
        edges.push_back({from[pick], static_cast<node_t>(pick), best[pick]});
        cur = pick;
    }
    std::vector<double> leaf(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) leaf[i] = src(i, i);
    const auto mst = edges;
    LcaTree tree = tree_from_spanning_edges(n, leaf, std::move(edges));

    for (std::int64_t v = n; v < tree.n_nodes(); ++v) {
        auto ch = tree.children(static_cast<node_t>(v));
        const double val = tree.value(static_cast<node_t>(v));
        for (std::size_t a = 0; a < ch.size(); ++a)
            for (std::size_t b = a + 1; b < ch.size(); ++b)
                for (node_t x : tree.leaves_of(ch[a]))
                    for (node_t y : tree.leaves_of(ch[b])) {
                        if (src(x, y) == val) continue;
                        // d(x,y) exceeds the bottleneck of the spanning-tree path; walk it for a witness.
                        std::vector<std::vector<node_t>> adj(static_cast<std::size_t>(n));
                        for (const auto& e : mst) {
                            adj[e.u].push_back(e.v);
                            adj[e.v].push_back(e.u);
                        }
                        std::vector<node_t> prev(static_cast<std::size_t>(n), no_node);
                        std::vector<node_t> q{x};
                        prev[x] = x;
                        for (std::size_t h = 0; h < q.size(); ++h)
                            for (node_t w : adj[q[h]])
                                if (prev[w] == no_node) {
                                    prev[w] = q[h];
                                    q.push_back(w);
                                }
                        std::vector<node_t> path{y};
                        while (path.back() != x) path.push_back(prev[path.back()]);
                        std::reverse(path.begin(), path.end());
                        for (std::size_t k = 2; k < path.size(); ++k) {
                            const node_t mid = path[k - 1], far = path[k];
                            if (src(x, far) > std::max(src(x, mid), src(mid, far)))
                                throw NotUltrametric("strong triangle inequality fails on (" + std::to_string(x) + "," +
                                                         std::to_string(mid) + "," + std::to_string(far) + ")",
                                                     idx(x, mid, far));
                        }
                        throw Error(ErrorCode::internal, "ultrametric check found no witness");
                    }
    }
    return tree;
}

LcaTree make_worstcase_tree(int depth, std::int64_t node_budget) {
    if (depth < 1) throw InvalidArgument("worst-case depth must be at least 1");
    if (depth > 40 || (std::int64_t{2} << depth) - 1 > node_budget)
        throw BudgetError("worst-case tree of depth " + std::to_string(depth) + " exceeds node budget");
    const std::int64_t leaves = std::int64_t{1} << depth;
    TreeBuilder b(leaves);
    double counter = 1;
    std::vector<node_t> level(static_cast<std::size_t>(leaves));
    for (std::int64_t i = 0; i < leaves; ++i) {
        b.set_leaf_value(static_cast<node_t>(i), counter++);
        level[i] = static_cast<node_t>(i);
    }
    while (level.size() > 1) {
        std::vector<node_t> up;
        for (std::size_t k = 0; k < level.size(); k += 2) {
            const node_t pair[2] = {level[k], level[k + 1]};
            const double v = level.size() == 2 ? static_cast<double>(std::int64_t{2} << depth) : counter++;
            up.push_back(b.add_internal(v, pair));
        }
        level = std::move(up);
    }
    return b.finish();
}

}  // namespace ship
