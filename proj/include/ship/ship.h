#ifndef SHIP_SHIP_H
#define SHIP_SHIP_H

#include <stdint.h>

#if defined(_WIN32)
#define SHIP_API __declspec(dllexport)
#else
#define SHIP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ship_points ship_points;
typedef struct ship_tree ship_tree;
typedef struct ship_hierarchy ship_hierarchy;
typedef struct ship_session ship_session;

typedef enum ship_status {
    SHIP_OK = 0,
    SHIP_ERR_INVALID_ARGUMENT = 1,
    SHIP_ERR_OUT_OF_RANGE = 2,
    SHIP_ERR_IO = 3,
    SHIP_ERR_PARSE = 4,
    SHIP_ERR_NOT_ULTRAMETRIC = 5,
    SHIP_ERR_STRUCTURE = 6,
    SHIP_ERR_BUDGET = 7,
    SHIP_ERR_INTERNAL = 8
} ship_status;

enum { SHIP_OBJECTIVE_CENTER = 0, SHIP_OBJECTIVE_POWER = 1 };

typedef struct ship_objective {
    int kind;
    int z;
} ship_objective;

#define SHIP_NOISE (-1)

/* Message for the last failure on this thread; empty after success. */
SHIP_API const char* ship_last_error(void);
SHIP_API const char* ship_status_name(ship_status status);
SHIP_API const char* ship_version(void);
SHIP_API void ship_string_free(char* s);

SHIP_API ship_status ship_objective_parse(const char* text, ship_objective* out);

/* max_rows / max_cols <= 0 select the defaults. */
SHIP_API ship_status ship_points_load(const char* path, int64_t max_rows, int64_t max_cols, ship_points** out);
SHIP_API ship_status ship_points_create(const double* coords, int64_t n, int64_t dim, ship_points** out);
SHIP_API int64_t ship_points_count(const ship_points* p);
SHIP_API int64_t ship_points_dim(const ship_points* p);
SHIP_API void ship_points_free(ship_points* p);

SHIP_API ship_status ship_tree_fit_dc(const ship_points* p, int mu, ship_tree** out);
SHIP_API ship_status ship_tree_fit_hst(const ship_points* p, int max_depth, ship_tree** out);
/* witness (may be NULL) receives the offending indices on SHIP_ERR_NOT_ULTRAMETRIC; unused slots are -1. */
SHIP_API ship_status ship_tree_from_matrix(const double* row_major, int64_t n, ship_tree** out, int64_t witness[3]);
SHIP_API ship_status ship_tree_load_dissimilarity(const char* path, ship_tree** out, int64_t witness[3]);
SHIP_API ship_status ship_tree_worstcase(int depth, ship_tree** out);
SHIP_API ship_status ship_tree_load(const char* path, ship_tree** out);
SHIP_API ship_status ship_tree_save(const ship_tree* t, const char* path);
/* SHIP_OK with *violations == 0 means the tree is a valid relaxed ultrametric. */
SHIP_API ship_status ship_tree_validate(const ship_tree* t, int64_t* violations);
SHIP_API int64_t ship_tree_n_points(const ship_tree* t);
SHIP_API int64_t ship_tree_n_nodes(const ship_tree* t);
SHIP_API ship_status ship_tree_lca_distance(const ship_tree* t, int64_t i, int64_t j, double* out);
SHIP_API void ship_tree_free(ship_tree* t);

/* tiebreak may be NULL; otherwise ties are resolved by Euclidean proximity. */
SHIP_API ship_status ship_hierarchy_build(const ship_tree* t, ship_objective objective, const ship_points* tiebreak,
                                          ship_hierarchy** out);
SHIP_API ship_status ship_hierarchy_load(const char* path, ship_hierarchy** out);
SHIP_API ship_status ship_hierarchy_save(const ship_hierarchy* h, const char* path);
SHIP_API int64_t ship_hierarchy_n_points(const ship_hierarchy* h);
SHIP_API ship_status ship_hierarchy_objective(const ship_hierarchy* h, ship_objective* out);
/* Writes min(capacity, n) losses L_1..L_n. */
SHIP_API ship_status ship_hierarchy_curve(const ship_hierarchy* h, double* losses, int64_t capacity);
SHIP_API void ship_hierarchy_free(ship_hierarchy* h);

/* labels must hold n entries; noise is SHIP_NOISE. k_out may be NULL. */
SHIP_API ship_status ship_partition_k(const ship_hierarchy* h, int64_t k, int64_t* labels);
SHIP_API ship_status ship_partition_elbow(const ship_hierarchy* h, int64_t* k_out, int64_t* labels);
SHIP_API ship_status ship_partition_moe(const ship_tree* t, const ship_hierarchy* h, const int* zs, int64_t n_zs,
                                        int64_t* k_out, int64_t* labels);
SHIP_API ship_status ship_partition_threshold(const ship_hierarchy* h, double eps, int64_t* k_out, int64_t* labels);
SHIP_API ship_status ship_partition_stability(const ship_hierarchy* h, int64_t min_cluster_size, int64_t* k_out,
                                              int64_t* labels);
SHIP_API ship_status ship_labels_write_csv(const int64_t* labels, int64_t n, const char* path);

SHIP_API ship_status ship_session_create(const ship_tree* t, const ship_points* p, int tiebreak, ship_session** out);
/* body is allocated by the library; release with ship_string_free. */
SHIP_API ship_status ship_session_handle(const ship_session* s, const char* path, const char* query, int* http_status,
                                         char** body);
SHIP_API void ship_session_free(ship_session* s);

#ifdef __cplusplus
}
#endif

#endif
