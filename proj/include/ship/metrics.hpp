#pragma once

#include <cstdint>
#include <vector>

#include "ship/ultra_core.hpp"

namespace ship {

// Row-major n x d coordinates, Euclidean ambient metric.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::int64_t n, std::int64_t dim, std::vector<double> coords);
    static PointSet from_rows(const std::vector<std::vector<double>>& rows);

    std::int64_t size() const { return n_; }
    std::int64_t dim() const { return dim_; }
    const double* row(std::int64_t i) const { return coords_.data() + i * dim_; }
    double at(std::int64_t i, std::int64_t k) const { return coords_[static_cast<std::size_t>(i * dim_ + k)]; }
    const std::vector<double>& coords() const { return coords_; }
    double distance(std::int64_t i, std::int64_t j) const;

private:
    std::int64_t n_ = 0;
    std::int64_t dim_ = 0;
    std::vector<double> coords_;
};

struct CoreDistances {
    int mu = 0;
    std::vector<double> kappa;
};

CoreDistances core_distances(const PointSet& points, int mu);
double mutual_reachability(const PointSet& points, const CoreDistances& core, std::int64_t i, std::int64_t j);

// Prim over the dense mutual-reachability graph.
std::vector<WeightedEdge> mutual_reachability_mst(const PointSet& points, const CoreDistances& core);

LcaTree build_dc_tree(const PointSet& points, int mu);
LcaTree build_hst_tree(const PointSet& points, int max_depth);

}  // namespace ship
