#include "ship/ship.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "ship/hierarchy.hpp"
#include "ship/io.hpp"
#include "ship/partition.hpp"
#include "ship/session.hpp"

struct ship_points {
    ship::PointSet value;
};
struct ship_tree {
    ship::LcaTree value;
};
struct ship_hierarchy {
    ship::ClusterHierarchy value;
};
struct ship_session {
    std::unique_ptr<ship::Session> value;
};

namespace {

thread_local std::string last_error;

ship_status to_status(ship::ErrorCode c) {
    switch (c) {
        case ship::ErrorCode::invalid_argument: return SHIP_ERR_INVALID_ARGUMENT;
        case ship::ErrorCode::out_of_range: return SHIP_ERR_OUT_OF_RANGE;
        case ship::ErrorCode::io: return SHIP_ERR_IO;
        case ship::ErrorCode::parse: return SHIP_ERR_PARSE;
        case ship::ErrorCode::not_ultrametric: return SHIP_ERR_NOT_ULTRAMETRIC;
        case ship::ErrorCode::structure: return SHIP_ERR_STRUCTURE;
        case ship::ErrorCode::budget: return SHIP_ERR_BUDGET;
        case ship::ErrorCode::internal: return SHIP_ERR_INTERNAL;
    }
    return SHIP_ERR_INTERNAL;
}

template <class F>
ship_status guarded(F&& f, int64_t* witness = nullptr) {
    try {
        last_error.clear();
        f();
        return SHIP_OK;
    } catch (const ship::NotUltrametric& e) {
        last_error = e.what();
        if (witness)
            for (int i = 0; i < 3; ++i) witness[i] = e.witness[i];
        return SHIP_ERR_NOT_ULTRAMETRIC;
    } catch (const ship::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return SHIP_ERR_BUDGET;
    } catch (const std::exception& e) {
        last_error = e.what();
        return SHIP_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw ship::InvalidArgument(std::string(what) + " must not be NULL");
}

ship::Objective objective_of(ship_objective o) {
    if (o.kind == SHIP_OBJECTIVE_CENTER) return ship::Objective::center();
    if (o.kind == SHIP_OBJECTIVE_POWER) return ship::Objective::power(o.z);
    throw ship::InvalidArgument("unknown objective kind");
}

void copy_labels(const ship::Partition& p, int64_t* k_out, int64_t* labels) {
    need(labels, "labels");
    std::memcpy(labels, p.labels.data(), p.labels.size() * sizeof(int64_t));
    if (k_out) *k_out = p.k;
}

}  // namespace

extern "C" {

const char* ship_last_error(void) { return last_error.c_str(); }

const char* ship_status_name(ship_status s) {
    switch (s) {
        case SHIP_OK: return "ok";
        case SHIP_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case SHIP_ERR_OUT_OF_RANGE: return "out_of_range";
        case SHIP_ERR_IO: return "io";
        case SHIP_ERR_PARSE: return "parse";
        case SHIP_ERR_NOT_ULTRAMETRIC: return "not_ultrametric";
        case SHIP_ERR_STRUCTURE: return "structure";
        case SHIP_ERR_BUDGET: return "budget";
        case SHIP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* ship_version(void) { return "1.0.0"; }

void ship_string_free(char* s) { std::free(s); }

ship_status ship_objective_parse(const char* text, ship_objective* out) {
    return guarded([&] {
        need(text, "text");
        need(out, "out");
        auto o = ship::Objective::parse(text);
        *out = {o.is_center() ? SHIP_OBJECTIVE_CENTER : SHIP_OBJECTIVE_POWER, o.z};
    });
}

ship_status ship_points_load(const char* path, int64_t max_rows, int64_t max_cols, ship_points** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        ship::io::CsvLimits lim;
        if (max_rows > 0) lim.max_rows = max_rows;
        if (max_cols > 0) lim.max_cols = max_cols;
        *out = new ship_points{ship::io::load_points(path, lim)};
    });
}

ship_status ship_points_create(const double* coords, int64_t n, int64_t dim, ship_points** out) {
    return guarded([&] {
        need(coords, "coords");
        need(out, "out");
        if (n < 1 || dim < 1) throw ship::InvalidArgument("n and dim must be positive");
        *out = new ship_points{ship::PointSet(n, dim, std::vector<double>(coords, coords + n * dim))};
    });
}

int64_t ship_points_count(const ship_points* p) { return p ? p->value.size() : 0; }
int64_t ship_points_dim(const ship_points* p) { return p ? p->value.dim() : 0; }
void ship_points_free(ship_points* p) { delete p; }

ship_status ship_tree_fit_dc(const ship_points* p, int mu, ship_tree** out) {
    return guarded([&] {
        need(p, "points");
        need(out, "out");
        *out = new ship_tree{ship::build_dc_tree(p->value, mu)};
    });
}

ship_status ship_tree_fit_hst(const ship_points* p, int max_depth, ship_tree** out) {
    return guarded([&] {
        need(p, "points");
        need(out, "out");
        *out = new ship_tree{ship::build_hst_tree(p->value, max_depth)};
    });
}

ship_status ship_tree_from_matrix(const double* m, int64_t n, ship_tree** out, int64_t witness[3]) {
    return guarded(
        [&] {
            need(m, "matrix");
            need(out, "out");
            if (n < 1) throw ship::InvalidArgument("n must be positive");
            auto d = ship::Dissimilarity::from_matrix(std::vector<double>(m, m + n * n), n);
            *out = new ship_tree{ship::build_from_dissimilarity(d)};
        },
        witness);
}

ship_status ship_tree_load_dissimilarity(const char* path, ship_tree** out, int64_t witness[3]) {
    return guarded(
        [&] {
            need(path, "path");
            need(out, "out");
            *out = new ship_tree{ship::build_from_dissimilarity(ship::io::load_dissimilarity(path))};
        },
        witness);
}

ship_status ship_tree_worstcase(int depth, ship_tree** out) {
    return guarded([&] {
        need(out, "out");
        *out = new ship_tree{ship::make_worstcase_tree(depth)};
    });
}

ship_status ship_tree_load(const char* path, ship_tree** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ship_tree{ship::io::load_tree(path)};
    });
}

ship_status ship_tree_save(const ship_tree* t, const char* path) {
    return guarded([&] {
        need(t, "tree");
        need(path, "path");
        ship::io::save_tree(t->value, path);
    });
}

ship_status ship_tree_validate(const ship_tree* t, int64_t* violations) {
    return guarded([&] {
        need(t, "tree");
        auto r = ship::validate(t->value);
        if (violations) *violations = static_cast<int64_t>(r.violations.size());
        if (!r.ok()) last_error = r.violations.front().describe();
    });
}

int64_t ship_tree_n_points(const ship_tree* t) { return t ? t->value.n_points() : 0; }
int64_t ship_tree_n_nodes(const ship_tree* t) { return t ? t->value.n_nodes() : 0; }

ship_status ship_tree_lca_distance(const ship_tree* t, int64_t i, int64_t j, double* out) {
    return guarded([&] {
        need(t, "tree");
        need(out, "out");
        if (i < 0 || j < 0 || i >= t->value.n_points() || j >= t->value.n_points())
            throw ship::OutOfRange("point index out of range");
        *out = t->value.lca_distance(static_cast<ship::node_t>(i), static_cast<ship::node_t>(j));
    });
}

void ship_tree_free(ship_tree* t) { delete t; }

ship_status ship_hierarchy_build(const ship_tree* t, ship_objective objective, const ship_points* tiebreak,
                                 ship_hierarchy** out) {
    return guarded([&] {
        need(t, "tree");
        need(out, "out");
        *out = new ship_hierarchy{
            ship::make_hierarchy(t->value, objective_of(objective), tiebreak ? &tiebreak->value : nullptr)};
    });
}

ship_status ship_hierarchy_load(const char* path, ship_hierarchy** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ship_hierarchy{ship::io::load_hierarchy(path)};
    });
}

ship_status ship_hierarchy_save(const ship_hierarchy* h, const char* path) {
    return guarded([&] {
        need(h, "hierarchy");
        need(path, "path");
        ship::io::save_hierarchy(h->value, path);
    });
}

int64_t ship_hierarchy_n_points(const ship_hierarchy* h) { return h ? h->value.n_points : 0; }

ship_status ship_hierarchy_objective(const ship_hierarchy* h, ship_objective* out) {
    return guarded([&] {
        need(h, "hierarchy");
        need(out, "out");
        const auto& o = h->value.objective;
        *out = {o.is_center() ? SHIP_OBJECTIVE_CENTER : SHIP_OBJECTIVE_POWER, o.z};
    });
}

ship_status ship_hierarchy_curve(const ship_hierarchy* h, double* losses, int64_t capacity) {
    return guarded([&] {
        need(h, "hierarchy");
        need(losses, "losses");
        const auto& l = h->value.losses;
        if (l.empty()) throw ship::InvalidArgument("hierarchy carries no cost curve");
        const auto m = std::min<int64_t>(capacity, static_cast<int64_t>(l.size()));
        for (int64_t i = 0; i < m; ++i) losses[i] = l[static_cast<std::size_t>(i)];
    });
}

void ship_hierarchy_free(ship_hierarchy* h) { delete h; }

ship_status ship_partition_k(const ship_hierarchy* h, int64_t k, int64_t* labels) {
    return guarded([&] {
        need(h, "hierarchy");
        copy_labels(ship::extract_partition(h->value, k), nullptr, labels);
    });
}

ship_status ship_partition_elbow(const ship_hierarchy* h, int64_t* k_out, int64_t* labels) {
    return guarded([&] {
        need(h, "hierarchy");
        if (h->value.losses.empty()) throw ship::InvalidArgument("hierarchy carries no cost curve");
        copy_labels(ship::extract_partition(h->value, ship::elbow_index(h->value.losses)), k_out, labels);
    });
}

ship_status ship_partition_moe(const ship_tree* t, const ship_hierarchy* h, const int* zs, int64_t n_zs,
                               int64_t* k_out, int64_t* labels) {
    return guarded([&] {
        need(t, "tree");
        need(h, "hierarchy");
        if (t->value.n_points() != h->value.n_points) throw ship::InvalidArgument("tree and hierarchy sizes differ");
        std::vector<int> z = zs && n_zs > 0 ? std::vector<int>(zs, zs + n_zs) : std::vector<int>{1, 2, 3, 4, 5};
        auto m = ship::median_of_elbows(t->value, z);
        copy_labels(ship::extract_partition(h->value, m.k), k_out, labels);
    });
}

ship_status ship_partition_threshold(const ship_hierarchy* h, double eps, int64_t* k_out, int64_t* labels) {
    return guarded([&] {
        need(h, "hierarchy");
        copy_labels(ship::threshold_partition(h->value, eps), k_out, labels);
    });
}

ship_status ship_partition_stability(const ship_hierarchy* h, int64_t min_cluster_size, int64_t* k_out,
                                     int64_t* labels) {
    return guarded([&] {
        need(h, "hierarchy");
        copy_labels(ship::best_partition(h->value, min_cluster_size).partition, k_out, labels);
    });
}

ship_status ship_labels_write_csv(const int64_t* labels, int64_t n, const char* path) {
    return guarded([&] {
        need(labels, "labels");
        need(path, "path");
        ship::Partition p;
        p.labels.assign(labels, labels + n);
        ship::io::write_file(path, ship::io::partition_csv(p));
    });
}

ship_status ship_session_create(const ship_tree* t, const ship_points* p, int tiebreak, ship_session** out) {
    return guarded([&] {
        need(t, "tree");
        need(out, "out");
        std::optional<ship::PointSet> pts;
        if (p) pts = p->value;
        *out = new ship_session{std::make_unique<ship::Session>(t->value, std::move(pts), tiebreak != 0)};
    });
}

ship_status ship_session_handle(const ship_session* s, const char* path, const char* query, int* http_status,
                                char** body) {
    return guarded([&] {
        need(s, "session");
        need(path, "path");
        need(http_status, "http_status");
        need(body, "body");
        auto r = s->value->handle(path, query ? query : "");
        *http_status = r.status;
        char* buf = static_cast<char*>(std::malloc(r.body.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, r.body.c_str(), r.body.size() + 1);
        *body = buf;
    });
}

void ship_session_free(ship_session* s) { delete s; }

}  // extern "C"
