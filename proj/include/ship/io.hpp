#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ship/hierarchy.hpp"
#include "ship/metrics.hpp"
#include "ship/ultra_core.hpp"

namespace ship::io {

using json = nlohmann::json;

inline constexpr const char* tree_version = "ship-tree/1";
inline constexpr const char* hierarchy_version = "ship-hier/1";

// Integral values within 2^53 become JSON integers; everything else keeps full precision.
json number(double x);

json tree_to_json(const LcaTree& tree);
LcaTree tree_from_json(const json& doc);
void save_tree(const LcaTree& tree, const std::string& path);
LcaTree load_tree(const std::string& path);

json hierarchy_to_json(const ClusterHierarchy& hier);
ClusterHierarchy hierarchy_from_json(const json& doc);
void save_hierarchy(const ClusterHierarchy& hier, const std::string& path);
ClusterHierarchy load_hierarchy(const std::string& path);

struct CsvLimits {
    std::int64_t max_rows = 1'000'000;
    std::int64_t max_cols = 512;
};

PointSet parse_points_csv(std::string_view text, const CsvLimits& limits = {});
PointSet parse_points_json(std::string_view text);
// Picks the parser by extension (.json) or leading '{'.
PointSet load_points(const std::string& path, const CsvLimits& limits = {});

// Square matrix from JSON ({"matrix": [[...]]} or a bare array) or CSV.
Dissimilarity parse_dissimilarity(std::string_view text, bool as_json, const CsvLimits& limits = {});
Dissimilarity load_dissimilarity(const std::string& path, const CsvLimits& limits = {});

std::string partition_csv(const Partition& p);
json labels_json(const Partition& p);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ship::io
