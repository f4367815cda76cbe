#include "ship/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ship::io {

json number(double x) {
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) <= 9007199254740992.0 && !(x == 0 && std::signbit(x)))
        return static_cast<std::int64_t>(x);
    return x;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

void require_version(const json& doc, const char* version) {
    if (!doc.is_object() || !doc.contains("version") || doc["version"] != version)
        throw ParseError(std::string("missing or unsupported version tag; expected ") + version);
}

template <class T>
T field(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad field '") + key + "': " + e.what());
    }
}

double as_double(const json& v, const char* what) {
    if (!v.is_number()) throw ParseError(std::string(what) + " is not a number");
    return v.get<double>();
}

node_t optional_index(const json& v) { return v.is_null() ? no_node : v.get<node_t>(); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

// Rows of numeric cells; a leading non-numeric row is treated as a header.
std::vector<std::vector<double>> parse_numeric_csv(std::string_view text, const CsvLimits& limits) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool first = true;
    std::size_t pos = 0;
    std::vector<std::string_view> cells;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        cells.clear();
        std::size_t c = 0;
        while (true) {
            std::size_t comma = line.find(',', c);
            cells.push_back(line.substr(c, comma == std::string_view::npos ? std::string_view::npos : comma - c));
            if (comma == std::string_view::npos) break;
            c = comma + 1;
        }
        if (static_cast<std::int64_t>(cells.size()) > limits.max_cols)
            throw ParseError("line " + std::to_string(line_no) + ": more than " + std::to_string(limits.max_cols) + " columns");
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t k = 0; k < cells.size() && numeric; ++k) numeric = parse_double(cells[k], row[k]);
        if (!numeric) {
            if (first) {
                first = false;
                if (end == text.size()) break;
                continue;
            }
            throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell");
        }
        first = false;
        for (double x : row)
            if (!std::isfinite(x)) throw ParseError("line " + std::to_string(line_no) + ": non-finite value");
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
                             " columns, got " + std::to_string(row.size()));
        if (static_cast<std::int64_t>(rows.size()) >= limits.max_rows)
            throw ParseError("more than " + std::to_string(limits.max_rows) + " rows");
        rows.push_back(std::move(row));
        if (end == text.size()) break;
    }
    return rows;
}

bool looks_like_json(const std::string& path, std::string_view text) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) return true;
    auto t = trim(text);
    while (!t.empty() && (t.front() == '\n')) t.remove_prefix(1);
    return !t.empty() && (t.front() == '{' || t.front() == '[');
}

std::vector<std::vector<double>> rows_from_json(const json& arr, const char* what) {
    if (!arr.is_array()) throw ParseError(std::string(what) + " must be an array of arrays");
    std::vector<std::vector<double>> rows;
    rows.reserve(arr.size());
    for (const auto& r : arr) {
        if (!r.is_array()) throw ParseError(std::string(what) + " must be an array of arrays");
        std::vector<double> row;
        row.reserve(r.size());
        for (const auto& x : r) row.push_back(as_double(x, "coordinate"));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json tree_to_json(const LcaTree& t) {
    json nodes = json::array();
    for (node_t v = 0; v < t.n_nodes(); ++v) {
        json ch = json::array();
        for (node_t c : t.children(v)) ch.push_back(c);
        nodes.push_back({{"value", number(t.value(v))},
                         {"parent", t.parent(v) == no_node ? json(nullptr) : json(t.parent(v))},
                         {"children", std::move(ch)},
                         {"size", t.size(v)}});
    }
    json order = json::array();
    for (node_t x : t.leaf_order()) order.push_back(x);
    return {{"version", tree_version},
            {"n_points", t.n_points()},
            {"root", t.root()},
            {"nodes", std::move(nodes)},
            {"leaf_order", std::move(order)}};
}

LcaTree tree_from_json(const json& doc) {
    require_version(doc, tree_version);
    TreeParts p;
    p.n_points = field<std::int64_t>(doc, "n_points");
    p.root = field<node_t>(doc, "root");
    const auto& nodes = doc.contains("nodes") ? doc["nodes"] : throw ParseError("missing field 'nodes'");
    if (!nodes.is_array()) throw ParseError("'nodes' must be an array");
    std::vector<std::int64_t> sizes;
    try {
        for (const auto& nd : nodes) {
            p.values.push_back(as_double(nd.at("value"), "node value"));
            p.parents.push_back(optional_index(nd.at("parent")));
            p.children.push_back(nd.at("children").get<std::vector<node_t>>());
            sizes.push_back(nd.contains("size") ? nd["size"].get<std::int64_t>() : -1);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed node: ") + e.what());
    }
    LcaTree t = LcaTree::from_parts(p);
    for (node_t v = 0; v < t.n_nodes(); ++v)
        if (sizes[v] >= 0 && sizes[v] != t.size(v))
            throw StructureError("node " + std::to_string(v) + " size disagrees with its subtree");
    if (doc.contains("leaf_order")) {
        auto order = field<std::vector<node_t>>(doc, "leaf_order");
        auto have = t.leaf_order();
        if (!std::equal(order.begin(), order.end(), have.begin(), have.end()))
            throw StructureError("leaf_order disagrees with the tree's postfix order");
    }
    return t;
}

void save_tree(const LcaTree& t, const std::string& path) { write_file(path, tree_to_json(t).dump() + "\n"); }

LcaTree load_tree(const std::string& path) { return tree_from_json(parse_json(read_file(path), path)); }

json hierarchy_to_json(const ClusterHierarchy& h) {
    json nodes = json::array();
    for (const auto& nd : h.nodes) {
        nodes.push_back({{"center", nd.center},
                         {"split_k", nd.split_k},
                         {"cost", number(nd.cost)},
                         {"gain", nd.gain ? number(*nd.gain) : json(nullptr)},
                         {"parent", nd.parent == no_node ? json(nullptr) : json(nd.parent)},
                         {"children", nd.children},
                         {"span", {nd.span_begin, nd.span_size}}});
    }
    json losses = json::array();
    for (double x : h.losses) losses.push_back(number(x));
    return {{"version", hierarchy_version},
            {"objective", h.objective.tag()},
            {"n_points", h.n_points},
            {"nodes", std::move(nodes)},
            {"leaf_order", h.leaf_order},
            {"losses", std::move(losses)}};
}

ClusterHierarchy hierarchy_from_json(const json& doc) {
    require_version(doc, hierarchy_version);
    ClusterHierarchy h;
    h.objective = Objective::parse(field<std::string>(doc, "objective"));
    h.n_points = field<std::int64_t>(doc, "n_points");
    if (h.n_points < 1) throw StructureError("hierarchy has no points");
    const auto& nodes = doc.contains("nodes") ? doc["nodes"] : throw ParseError("missing field 'nodes'");
    if (!nodes.is_array() || nodes.empty()) throw ParseError("'nodes' must be a non-empty array");
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    try {
        for (const auto& j : nodes) {
            HierarchyNode nd;
            nd.center = j.at("center").get<node_t>();
            nd.split_k = j.at("split_k").get<std::int64_t>();
            nd.cost = as_double(j.at("cost"), "cost");
            if (j.contains("gain") && !j["gain"].is_null()) nd.gain = as_double(j["gain"], "gain");
            nd.parent = optional_index(j.at("parent"));
            nd.children = j.at("children").get<std::vector<node_t>>();
            auto span = j.at("span").get<std::vector<std::int64_t>>();
            if (span.size() != 2) throw ParseError("span must have two entries");
            spans.emplace_back(span[0], span[1]);
            h.nodes.push_back(std::move(nd));
        }
        if (doc.contains("losses")) {
            for (const auto& x : doc["losses"]) h.losses.push_back(as_double(x, "loss"));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed hierarchy node: ") + e.what());
    }
    const auto m = static_cast<node_t>(h.nodes.size());
    std::vector<char> leaf_for(static_cast<std::size_t>(h.n_points), 0);
    std::int64_t leaves = 0;
    for (node_t v = 0; v < m; ++v) {
        const auto& nd = h.nodes[v];
        if ((v == 0) != (nd.parent == no_node)) throw StructureError("node 0 must be the only root");
        if (nd.parent != no_node && (nd.parent < 0 || nd.parent >= v))
            throw StructureError("node " + std::to_string(v) + " must follow its parent");
        if (nd.center < 0 || nd.center >= h.n_points) throw StructureError("center out of range");
        if (nd.children.size() == 1) throw StructureError("hierarchy node with a single child");
        for (node_t c : nd.children)
            if (c <= v || c >= m || h.nodes[c].parent != v) throw StructureError("inconsistent child link at node " + std::to_string(v));
        if (nd.children.empty()) {
            if (leaf_for[nd.center]++) throw StructureError("two leaves share center " + std::to_string(nd.center));
            ++leaves;
        } else if (h.nodes[nd.children.front()].center != nd.center) {
            throw StructureError("first child of node " + std::to_string(v) + " must keep its center");
        }
    }
    if (leaves != h.n_points) throw StructureError("hierarchy leaf count differs from n_points");
    std::int64_t linked = 0;
    for (node_t v = 0; v < m; ++v) linked += static_cast<std::int64_t>(h.nodes[v].children.size());
    if (linked != m - 1) throw StructureError("hierarchy links do not form a tree");
    h.finalize_spans();
    for (node_t v = 0; v < m; ++v)
        if (spans[v].first != h.nodes[v].span_begin || spans[v].second != h.nodes[v].span_size)
            throw StructureError("span of node " + std::to_string(v) + " disagrees with the hierarchy");
    if (doc.contains("leaf_order") && field<std::vector<node_t>>(doc, "leaf_order") != h.leaf_order)
        throw StructureError("leaf_order disagrees with the hierarchy");
    return h;
}

void save_hierarchy(const ClusterHierarchy& h, const std::string& path) { write_file(path, hierarchy_to_json(h).dump() + "\n"); }

ClusterHierarchy load_hierarchy(const std::string& path) { return hierarchy_from_json(parse_json(read_file(path), path)); }

PointSet parse_points_csv(std::string_view text, const CsvLimits& limits) {
    auto rows = parse_numeric_csv(text, limits);
    if (rows.empty()) throw ParseError("no data rows");
    return PointSet::from_rows(rows);
}

PointSet parse_points_json(std::string_view text) {
    json doc = parse_json(text, "points");
    const json& arr = doc.is_object() ? (doc.contains("points") ? doc["points"] : throw ParseError("missing field 'points'")) : doc;
    auto rows = rows_from_json(arr, "points");
    if (rows.empty()) throw ParseError("no points");
    try {
        return PointSet::from_rows(rows);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

PointSet load_points(const std::string& path, const CsvLimits& limits) {
    const std::string text = read_file(path);
    if (looks_like_json(path, text)) return parse_points_json(text);
    try {
        return parse_points_csv(text, limits);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

Dissimilarity parse_dissimilarity(std::string_view text, bool as_json, const CsvLimits& limits) {
    std::vector<std::vector<double>> rows;
    if (as_json) {
        json doc = parse_json(text, "dissimilarity");
        const json& arr = doc.is_object() ? (doc.contains("matrix") ? doc["matrix"] : throw ParseError("missing field 'matrix'")) : doc;
        rows = rows_from_json(arr, "matrix");
    } else {
        rows = parse_numeric_csv(text, limits);
    }
    const auto n = static_cast<std::int64_t>(rows.size());
    if (n == 0) throw ParseError("empty dissimilarity matrix");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n * n));
    for (const auto& r : rows) {
        if (static_cast<std::int64_t>(r.size()) != n) throw ParseError("dissimilarity matrix is not square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return Dissimilarity::from_matrix(std::move(flat), n);
}

Dissimilarity load_dissimilarity(const std::string& path, const CsvLimits& limits) {
    const std::string text = read_file(path);
    return parse_dissimilarity(text, looks_like_json(path, text), limits);
}

std::string partition_csv(const Partition& p) {
    std::string out = "point,label\n";
    for (std::size_t i = 0; i < p.labels.size(); ++i) out += std::to_string(i) + "," + std::to_string(p.labels[i]) + "\n";
    return out;
}

json labels_json(const Partition& p) {
    json arr = json::array();
    for (auto l : p.labels) arr.push_back(l == noise ? json(nullptr) : json(l));
    return arr;
}

}  // namespace ship::io
