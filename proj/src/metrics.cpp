#include "ship/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ship {

PointSet::PointSet(std::int64_t n, std::int64_t dim, std::vector<double> coords)
    : n_(n), dim_(dim), coords_(std::move(coords)) {
    if (n < 0 || dim < 1) throw InvalidArgument("point set needs dimension >= 1");
    if (static_cast<std::int64_t>(coords_.size()) != n * dim) throw InvalidArgument("coordinate count is not n*d");
    for (double x : coords_)
        if (!std::isfinite(x)) throw InvalidArgument("non-finite coordinate");
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidArgument("no points");
    const auto d = static_cast<std::int64_t>(rows.front().size());
    std::vector<double> c;
    c.reserve(rows.size() * rows.front().size());
    for (const auto& r : rows) {
        if (static_cast<std::int64_t>(r.size()) != d) throw InvalidArgument("points differ in dimension");
        c.insert(c.end(), r.begin(), r.end());
    }
    return PointSet(static_cast<std::int64_t>(rows.size()), d, std::move(c));
}

double PointSet::distance(std::int64_t i, std::int64_t j) const {
    const double* a = row(i);
    const double* b = row(j);
    double s = 0;
    for (std::int64_t k = 0; k < dim_; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return std::sqrt(s);
}

CoreDistances core_distances(const PointSet& points, int mu) {
    const std::int64_t n = points.size();
    if (mu < 1 || mu > n - 1)
        throw InvalidArgument("mu must be in [1, n-1]; got " + std::to_string(mu) + " for n=" + std::to_string(n));
    CoreDistances out;
    out.mu = mu;
    out.kappa.resize(static_cast<std::size_t>(n));
    if (mu <= 32) {
        // Bounded sorted lists of the mu smallest distances, filled from one symmetric sweep.
        const auto m = static_cast<std::size_t>(mu);
        std::vector<double> near(static_cast<std::size_t>(n) * m, std::numeric_limits<double>::infinity());
        auto offer = [&](std::int64_t i, double d) {
            double* l = near.data() + static_cast<std::size_t>(i) * m;
            if (d >= l[m - 1]) return;
            std::size_t k = m - 1;
            while (k > 0 && l[k - 1] > d) {
                l[k] = l[k - 1];
                --k;
            }
            l[k] = d;
        };
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = i + 1; j < n; ++j) {
                const double d = points.distance(i, j);
                offer(i, d);
                offer(j, d);
            }
        for (std::int64_t i = 0; i < n; ++i) out.kappa[i] = near[static_cast<std::size_t>(i) * m + m - 1];
    } else {
        std::vector<double> row(static_cast<std::size_t>(n - 1));
        for (std::int64_t i = 0; i < n; ++i) {
            std::size_t k = 0;
            for (std::int64_t j = 0; j < n; ++j)
                if (j != i) row[k++] = points.distance(i, j);
            std::nth_element(row.begin(), row.begin() + (mu - 1), row.end());
            out.kappa[i] = row[static_cast<std::size_t>(mu - 1)];
        }
    }
    return out;
}

double mutual_reachability(const PointSet& points, const CoreDistances& core, std::int64_t i, std::int64_t j) {
    if (i < 0 || j < 0 || i >= points.size() || j >= points.size()) throw OutOfRange("point index out of range");
    if (static_cast<std::int64_t>(core.kappa.size()) != points.size()) throw InvalidArgument("core distances do not match points");
    return std::max({points.distance(i, j), core.kappa[i], core.kappa[j]});
}

std::vector<WeightedEdge> mutual_reachability_mst(const PointSet& points, const CoreDistances& core) {
    const std::int64_t n = points.size();
    if (static_cast<std::int64_t>(core.kappa.size()) != n) throw InvalidArgument("core distances do not match points");
    std::vector<WeightedEdge> edges;
    if (n < 2) return edges;
    edges.reserve(static_cast<std::size_t>(n - 1));
    const double* kappa = core.kappa.data();
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<node_t> from(static_cast<std::size_t>(n), no_node);
    // Points not yet in the tree, kept compact so each sweep only touches live entries.
    std::vector<node_t> out(static_cast<std::size_t>(n - 1));
    for (std::int64_t j = 1; j < n; ++j) out[j - 1] = static_cast<node_t>(j);
    node_t cur = 0;
    while (!out.empty()) {
        std::size_t pick = 0;
        const double kc = kappa[cur];
        for (std::size_t t = 0; t < out.size(); ++t) {
            const node_t j = out[t];
            const double w = std::max({points.distance(cur, j), kc, kappa[j]});
            if (w < best[j]) {
                best[j] = w;
                from[j] = cur;
            }
            const node_t p = out[pick];
            if (best[j] < best[p] || (best[j] == best[p] && j < p)) pick = t;
        }
        const node_t j = out[pick];
        edges.push_back({from[j], j, best[j]});
        out[pick] = out.back();
        out.pop_back();
        cur = j;
    }
    return edges;
}

LcaTree build_dc_tree(const PointSet& points, int mu) {
    const std::int64_t n = points.size();
    if (n < 1) throw InvalidArgument("no points");
    if (n == 1) {
        if (mu < 1) throw InvalidArgument("mu must be positive");
        return TreeBuilder(1).finish();
    }
    CoreDistances core = core_distances(points, mu);
    auto edges = mutual_reachability_mst(points, core);
    return tree_from_spanning_edges(n, core.kappa, std::move(edges));
}

LcaTree build_hst_tree(const PointSet& points, int max_depth) {
    const std::int64_t n = points.size();
    const std::int64_t d = points.dim();
    if (n < 1) throw InvalidArgument("no points");
    if (max_depth < 1 || max_depth > 60) throw InvalidArgument("max_depth must be in [1, 60]");
    if (n == 1) return TreeBuilder(1).finish();

    std::vector<double> lo(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], points.at(i, k));
            hi[k] = std::max(hi[k], points.at(i, k));
        }
    double side = 0;
    for (std::int64_t k = 0; k < d; ++k) side = std::max(side, hi[k] - lo[k]);
    TreeBuilder b(n);
    if (side == 0) {
        std::vector<node_t> all(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) all[i] = static_cast<node_t>(i);
        b.add_internal(0.0, all);
        return b.finish();
    }

    const auto cells_per_axis = static_cast<double>(std::uint64_t{1} << max_depth);
    const std::uint64_t top = (std::uint64_t{1} << max_depth) - 1;
    std::vector<std::uint64_t> q(static_cast<std::size_t>(n * d));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t k = 0; k < d; ++k) {
            const double t = (points.at(i, k) - lo[k]) / side * cells_per_axis;
            q[static_cast<std::size_t>(i * d + k)] = std::min<std::uint64_t>(static_cast<std::uint64_t>(t), top);
        }
    auto cell_less = [&](node_t a, node_t c, int level) {
        const int shift = max_depth - level;
        for (std::int64_t k = 0; k < d; ++k) {
            const auto x = q[static_cast<std::size_t>(a * d + k)] >> shift;
            const auto y = q[static_cast<std::size_t>(c * d + k)] >> shift;
            if (x != y) return x < y;
        }
        return false;
    };
    const double diag = side * std::sqrt(static_cast<double>(d));

    // Split cells found top-down; each holds the range of `order` it covers.
    struct Cell {
        int level;
        std::int64_t lo, hi;
        std::vector<std::int64_t> kids;  // >= 0: cell index; < 0: -(point + 1)
    };
    std::vector<node_t> order(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) order[i] = static_cast<node_t>(i);
    std::vector<Cell> cells;
    struct Pending {
        int level;
        std::int64_t lo, hi;
        std::int64_t parent;
    };
    std::vector<Pending> work{{0, 0, n, -1}};
    while (!work.empty()) {
        Pending w = work.back();
        work.pop_back();
        if (w.hi - w.lo == 1) {
            cells[w.parent].kids.push_back(-(static_cast<std::int64_t>(order[w.lo]) + 1));
            continue;
        }
        int level = w.level;
        std::vector<std::pair<std::int64_t, std::int64_t>> runs;
        while (level < max_depth) {
            const int next = level + 1;
            std::sort(order.begin() + w.lo, order.begin() + w.hi,
                      [&](node_t a, node_t c) { return cell_less(a, c, next); });
            runs.clear();
            std::int64_t s = w.lo;
            for (std::int64_t t = w.lo + 1; t <= w.hi; ++t)
                if (t == w.hi || cell_less(order[t - 1], order[t], next)) {
                    runs.emplace_back(s, t);
                    s = t;
                }
            if (runs.size() > 1) break;
            level = next;
        }
        const auto id = static_cast<std::int64_t>(cells.size());
        cells.push_back({level, w.lo, w.hi, {}});
        if (w.parent >= 0) cells[w.parent].kids.push_back(id);
        if (level == max_depth) {
            for (std::int64_t t = w.lo; t < w.hi; ++t) cells[id].kids.push_back(-(static_cast<std::int64_t>(order[t]) + 1));
            continue;
        }
        for (auto it = runs.rbegin(); it != runs.rend(); ++it) work.push_back({level + 1, it->first, it->second, id});
    }
    std::vector<node_t> node_of(cells.size(), no_node);
    std::vector<node_t> ch;
    for (std::size_t c = cells.size(); c-- > 0;) {
        ch.clear();
        for (std::int64_t k : cells[c].kids) ch.push_back(k < 0 ? static_cast<node_t>(-k - 1) : node_of[k]);
        node_of[c] = b.add_internal(diag * std::ldexp(1.0, -cells[c].level), ch);
    }
    return b.finish();
}

}  // namespace ship
