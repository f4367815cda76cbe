#pragma once
#include <cstdint>
#include <vector>

#include "ship/metrics.hpp"
#include "ship/ultra_core.hpp"

namespace fixtures {

// T4: root 5 over A (2: points 0,1) and B (3: points 2,3); leaf values 0.
struct T4 {
    ship::LcaTree tree;
    ship::node_t a, b, root;
};

inline T4 make_t4(double a_value = 2, double leaf0 = 0) {
    ship::TreeBuilder b(4);
    b.set_leaf_value(0, leaf0);
    const ship::node_t a_kids[] = {0, 1};
    const ship::node_t b_kids[] = {2, 3};
    const auto a = b.add_internal(a_value, a_kids);
    const auto bb = b.add_internal(3, b_kids);
    const ship::node_t r_kids[] = {a, bb};
    const auto r = b.add_internal(5, r_kids);
    return {b.finish(), a, bb, r};
}

inline std::vector<double> t4_matrix() {
    return {0, 2, 5, 5,  //
            2, 0, 5, 5,  //
            5, 5, 0, 3,  //
            5, 5, 3, 0};
}

inline ship::PointSet line3() { return ship::PointSet(3, 1, {0, 1, 10}); }

// Star: root value c over n leaves of value 0.
inline ship::LcaTree star(std::int64_t n, double c) {
    ship::TreeBuilder b(n);
    std::vector<ship::node_t> kids;
    for (std::int64_t i = 0; i < n; ++i) kids.push_back(static_cast<ship::node_t>(i));
    b.add_internal(c, kids);
    return b.finish();
}

}  // namespace fixtures
