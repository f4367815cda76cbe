#include "ship/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace ship::oracle {

namespace {

bool integral_values(const LcaTree& t) {
    for (node_t v = 0; v < t.n_nodes(); ++v) {
        const double x = t.value(v);
        if (x != std::floor(x) || std::abs(x) > 1e6) return false;
    }
    return true;
}

// Powered pairwise distances, as exact integers or long doubles.
template <class Num>
std::vector<Num> powered(const std::vector<double>& dist, Objective obj) {
    std::vector<Num> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        Num x = static_cast<Num>(dist[i]);
        Num r = x;
        if (!obj.is_center())
            for (int k = 1; k < obj.z; ++k) r *= x;
        out[i] = r;
    }
    return out;
}

template <class Num>
Num cost_of(const std::vector<Num>& pd, std::int64_t n, const std::vector<node_t>& centers, bool is_max) {
    Num total = 0;
    for (std::int64_t x = 0; x < n; ++x) {
        Num best = pd[static_cast<std::size_t>(x * n + centers.front())];
        for (node_t c : centers) best = std::min(best, pd[static_cast<std::size_t>(x * n + c)]);
        total = is_max ? std::max(total, best) : total + best;
    }
    return total;
}

template <class Num>
OracleResult optimum(const std::vector<Num>& pd, std::int64_t n, std::int64_t k, bool is_max) {
    OracleResult r;
    std::vector<node_t> pick(static_cast<std::size_t>(k));
    std::iota(pick.begin(), pick.end(), 0);
    bool first = true;
    Num best = 0;
    while (true) {
        const Num c = cost_of(pd, n, pick, is_max);
        if (first || c < best) {
            best = c;
            r.centers = pick;
            r.optimal_sets = 1;
            first = false;
        } else if (c == best) {
            ++r.optimal_sets;
        }
        std::int64_t i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (std::int64_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    r.cost = static_cast<double>(best);
    return r;
}

double binomial(std::int64_t n, std::int64_t k) {
    double r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

struct Dsu {
    std::vector<std::int64_t> up;
    explicit Dsu(std::int64_t n) : up(static_cast<std::size_t>(n)) { std::iota(up.begin(), up.end(), 0); }
    std::int64_t find(std::int64_t x) { return up[x] == x ? x : up[x] = find(up[x]); }
};

}  // namespace

std::vector<double> distance_matrix(const LcaTree& t) {
    const std::int64_t n = t.n_points();
    std::vector<std::int64_t> depth(static_cast<std::size_t>(t.n_nodes()), -1);
    std::function<std::int64_t(node_t)> depth_of = [&](node_t v) -> std::int64_t {
        std::int64_t d = 0;
        for (node_t u = v; t.parent(u) != no_node; u = t.parent(u)) ++d;
        return d;
    };
    for (node_t v = 0; v < t.n_nodes(); ++v) depth[v] = depth_of(v);
    std::vector<double> out(static_cast<std::size_t>(n * n));
    for (node_t i = 0; i < n; ++i)
        for (node_t j = 0; j < n; ++j) {
            node_t a = i, b = j;
            while (depth[a] > depth[b]) a = t.parent(a);
            while (depth[b] > depth[a]) b = t.parent(b);
            while (a != b) {
                a = t.parent(a);
                b = t.parent(b);
            }
            out[static_cast<std::size_t>(i * n + j)] = t.value(a);
        }
    return out;
}

double brute_cost(const LcaTree& t, const std::vector<node_t>& centers, Objective obj) {
    if (centers.empty()) throw InvalidArgument("brute_cost needs at least one center");
    for (node_t c : centers)
        if (c < 0 || c >= t.n_points()) throw OutOfRange("center out of range");
    const auto dist = distance_matrix(t);
    if (integral_values(t))
        return static_cast<double>(cost_of(powered<__int128>(dist, obj), t.n_points(), centers, obj.is_center()));
    return static_cast<double>(cost_of(powered<long double>(dist, obj), t.n_points(), centers, obj.is_center()));
}

double assignment_cost(const LcaTree& t, const std::vector<std::int64_t>& labels, const std::vector<node_t>& centers,
                       Objective obj) {
    const auto dist = distance_matrix(t);
    const std::int64_t n = t.n_points();
    if (static_cast<std::int64_t>(labels.size()) != n) throw InvalidArgument("label count does not match tree");
    long double total = 0;
    for (std::int64_t x = 0; x < n; ++x) {
        const auto l = labels[x];
        if (l < 0 || l >= static_cast<std::int64_t>(centers.size())) throw InvalidArgument("label without a center");
        long double d = dist[static_cast<std::size_t>(x * n + centers[l])];
        long double p = d;
        if (!obj.is_center())
            for (int k = 1; k < obj.z; ++k) p *= d;
        total = obj.is_center() ? std::max(total, p) : total + p;
    }
    return static_cast<double>(total);
}

OracleResult brute_optimum(const LcaTree& t, std::int64_t k, Objective obj, std::int64_t budget) {
    const std::int64_t n = t.n_points();
    if (k < 1 || k > n) throw OutOfRange("k out of range");
    if (binomial(n, k) > static_cast<double>(budget)) throw BudgetError("subset enumeration exceeds budget");
    const auto dist = distance_matrix(t);
    if (integral_values(t)) return optimum(powered<__int128>(dist, obj), n, k, obj.is_center());
    return optimum(powered<long double>(dist, obj), n, k, obj.is_center());
}

std::vector<double> brute_minimax(std::int64_t n, const std::vector<WeightedEdge>& edges) {
    std::vector<std::vector<std::pair<std::int64_t, double>>> adj(static_cast<std::size_t>(n));
    for (const auto& e : edges) {
        adj[e.u].emplace_back(e.v, e.w);
        adj[e.v].emplace_back(e.u, e.w);
    }
    std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n));
    for (std::int64_t s = 0; s < n; ++s) {
        std::fill(seen.begin(), seen.end(), 0);
        std::vector<std::pair<std::int64_t, double>> stack{{s, 0.0}};
        seen[s] = 1;
        std::int64_t reached = 0;
        while (!stack.empty()) {
            auto [v, worst] = stack.back();
            stack.pop_back();
            ++reached;
            out[static_cast<std::size_t>(s * n + v)] = worst;
            for (auto [u, w] : adj[v])
                if (!seen[u]) {
                    seen[u] = 1;
                    stack.emplace_back(u, std::max(worst, w));
                }
        }
        if (reached != n) throw InvalidArgument("edge list is not connected");
    }
    return out;
}

std::vector<double> core_distances_sorted(const PointSet& p, int mu) {
    const std::int64_t n = p.size();
    if (mu < 1 || mu > n - 1) throw InvalidArgument("mu out of range");
    std::vector<double> k(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        std::vector<double> row;
        for (std::int64_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0;
            for (std::int64_t c = 0; c < p.dim(); ++c) {
                const double t = p.at(i, c) - p.at(j, c);
                s += t * t;
            }
            row.push_back(std::sqrt(s));
        }
        std::sort(row.begin(), row.end());
        k[i] = row[static_cast<std::size_t>(mu - 1)];
    }
    return k;
}

std::vector<double> mutual_reachability_matrix(const PointSet& p, int mu) {
    const std::int64_t n = p.size();
    const auto k = core_distances_sorted(p, mu);
    std::vector<double> m(static_cast<std::size_t>(n * n));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::int64_t c = 0; c < p.dim(); ++c) {
                const double t = p.at(i, c) - p.at(j, c);
                s += t * t;
            }
            m[static_cast<std::size_t>(i * n + j)] = i == j ? k[i] : std::max({std::sqrt(s), k[i], k[j]});
        }
    return m;
}

std::vector<WeightedEdge> kruskal_mst(std::int64_t n, const std::vector<double>& m) {
    std::vector<WeightedEdge> all;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j)
            all.push_back({static_cast<node_t>(i), static_cast<node_t>(j), m[static_cast<std::size_t>(i * n + j)]});
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.w < b.w; });
    Dsu d(n);
    std::vector<WeightedEdge> out;
    for (const auto& e : all) {
        auto a = d.find(e.u), b = d.find(e.v);
        if (a == b) continue;
        d.up[a] = b;
        out.push_back(e);
    }
    return out;
}

double exhaustive_antichain_max(const std::vector<std::int64_t>& parent, const std::vector<double>& value) {
    const std::size_t m = parent.size();
    std::vector<std::vector<std::int64_t>> kids(m);
    std::vector<std::int64_t> roots;
    for (std::size_t v = 0; v < m; ++v) {
        if (parent[v] < 0)
            roots.push_back(static_cast<std::int64_t>(v));
        else
            kids[static_cast<std::size_t>(parent[v])].push_back(static_cast<std::int64_t>(v));
    }
    // Every antichain total reachable inside a subtree (the empty antichain included).
    std::function<std::vector<double>(std::int64_t)> totals = [&](std::int64_t v) {
        std::vector<double> combos{0.0};
        for (auto c : kids[v]) {
            auto sub = totals(c);
            std::vector<double> next;
            for (double a : combos)
                for (double b : sub) next.push_back(a + b);
            combos = std::move(next);
        }
        combos.push_back(value[v]);
        return combos;
    };
    double best = 0;
    std::vector<double> all{0.0};
    for (auto r : roots) {
        auto sub = totals(r);
        std::vector<double> next;
        for (double a : all)
            for (double b : sub) next.push_back(a + b);
        all = std::move(next);
    }
    for (double x : all) best = std::max(best, x);
    return best;
}

bool splits_exactly_one(const std::vector<std::int64_t>& coarser, const std::vector<std::int64_t>& finer) {
    if (coarser.size() != finer.size()) return false;
    std::int64_t kc = 0, kf = 0;
    for (auto l : coarser) {
        if (l < 0) return false;
        kc = std::max(kc, l + 1);
    }
    for (auto l : finer) {
        if (l < 0) return false;
        kf = std::max(kf, l + 1);
    }
    if (kf != kc + 1) return false;
    std::vector<std::int64_t> inside(static_cast<std::size_t>(kf), -1);
    for (std::size_t i = 0; i < finer.size(); ++i) {
        auto& slot = inside[static_cast<std::size_t>(finer[i])];
        if (slot == -1)
            slot = coarser[i];
        else if (slot != coarser[i])
            return false;
    }
    std::vector<std::int64_t> pieces(static_cast<std::size_t>(kc), 0);
    for (auto c : inside) ++pieces[static_cast<std::size_t>(c)];
    std::int64_t split = 0;
    for (auto p : pieces) {
        if (p == 0 || p > 2) return false;
        split += p == 2;
    }
    return split == 1;
}

LcaTree random_tree(std::mt19937_64& rng, const TreeShape& s) {
    std::uniform_int_distribution<std::int64_t> size_dist(s.min_points, s.max_points);
    const std::int64_t n = size_dist(rng);
    TreeBuilder b(n);
    struct Comp {
        node_t node;
        double value;  // -1 for a bare leaf
    };
    std::vector<Comp> comps;
    for (std::int64_t i = 0; i < n; ++i) comps.push_back({static_cast<node_t>(i), -1});
    std::vector<double> parent_value(static_cast<std::size_t>(n), 0);
    if (n == 1) return b.finish();
    while (comps.size() > 1) {
        std::shuffle(comps.begin(), comps.end(), rng);
        const int most = std::min<int>(s.max_fanout, static_cast<int>(comps.size()));
        const int take = std::uniform_int_distribution<int>(2, most)(rng);
        std::vector<node_t> kids;
        double floor_value = -1;
        for (int i = 0; i < take; ++i) {
            kids.push_back(comps.back().node);
            floor_value = std::max(floor_value, comps.back().value);
            comps.pop_back();
        }
        const int lo = s.canonical ? 1 : 0;
        double v = std::max(0.0, floor_value) + std::uniform_int_distribution<int>(lo, s.max_step)(rng);
        if (floor_value < 0 && s.canonical) v -= 1;  // all-leaf children may sit at 0
        const node_t id = b.add_internal(v, kids);
        for (node_t c : kids)
            if (c < n) parent_value[c] = v;
        comps.push_back({id, v});
    }
    for (std::int64_t i = 0; i < n; ++i) {
        const bool zero = std::bernoulli_distribution(0.5)(rng);
        const double pv = parent_value[i];
        b.set_leaf_value(static_cast<node_t>(i),
                         zero ? 0.0 : static_cast<double>(std::uniform_int_distribution<int>(0, static_cast<int>(pv))(rng)));
    }
    return b.finish();
}

std::vector<std::int64_t> random_forest(std::mt19937_64& rng, std::int64_t max_leaves) {
    const std::int64_t leaves = std::uniform_int_distribution<std::int64_t>(1, max_leaves)(rng);
    std::vector<std::int64_t> parent(static_cast<std::size_t>(leaves), -1);
    std::vector<std::int64_t> comps(static_cast<std::size_t>(leaves));
    std::iota(comps.begin(), comps.end(), 0);
    std::bernoulli_distribution stop(0.1);
    while (comps.size() > 1 && !stop(rng)) {
        std::shuffle(comps.begin(), comps.end(), rng);
        const int take = std::uniform_int_distribution<int>(1, std::min<int>(3, static_cast<int>(comps.size())))(rng);
        const auto id = static_cast<std::int64_t>(parent.size());
        parent.push_back(-1);
        for (int i = 0; i < take; ++i) {
            parent[static_cast<std::size_t>(comps.back())] = id;
            comps.pop_back();
        }
        comps.push_back(id);
    }
    return parent;
}

PointSet random_points(std::mt19937_64& rng, std::int64_t n, std::int64_t dim, bool integer_grid) {
    std::vector<double> c(static_cast<std::size_t>(n * dim));
    std::uniform_int_distribution<int> grid(0, 20);
    std::uniform_real_distribution<double> real(0.0, 100.0);
    for (auto& x : c) x = integer_grid ? grid(rng) : real(rng);
    return PointSet(n, dim, std::move(c));
}

PointSet gaussian_blobs(std::mt19937_64& rng, const std::vector<std::vector<double>>& means, double stddev,
                        std::int64_t per_blob) {
    if (means.empty()) throw InvalidArgument("no blob centers");
    const auto d = static_cast<std::int64_t>(means.front().size());
    std::normal_distribution<double> noise_d(0.0, stddev);
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(per_blob) * means.size() * static_cast<std::size_t>(d));
    for (const auto& m : means)
        for (std::int64_t i = 0; i < per_blob; ++i)
            for (std::int64_t k = 0; k < d; ++k) c.push_back(m[static_cast<std::size_t>(k)] + noise_d(rng));
    return PointSet(static_cast<std::int64_t>(means.size()) * per_blob, d, std::move(c));
}

}  // namespace ship::oracle
