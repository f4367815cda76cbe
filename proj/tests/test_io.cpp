#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ship/errors.hpp"
#include "ship/hierarchy.hpp"
#include "ship/io.hpp"
#include "ship/oracle.hpp"

using namespace ship;
using io::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ship_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Number, IntegralValuesBecomeIntegers) {
    EXPECT_TRUE(io::number(5).is_number_integer());
    EXPECT_TRUE(io::number(0.5).is_number_float());
    EXPECT_TRUE(io::number(-0.0).is_number_float());
    EXPECT_TRUE(io::number(1e300).is_number_float());
    EXPECT_EQ(io::number(12).dump(), "12");
}

TEST(TreeJson, T4Layout) {
    const auto doc = io::tree_to_json(fixtures::make_t4().tree);
    EXPECT_EQ(doc["version"], "ship-tree/1");
    EXPECT_EQ(doc["n_points"], 4);
    EXPECT_EQ(doc["root"], 6);
    ASSERT_EQ(doc["nodes"].size(), 7u);
    EXPECT_TRUE(doc["nodes"][6]["parent"].is_null());
    EXPECT_EQ(doc["nodes"][4]["children"], json::array({0, 1}));
    EXPECT_EQ(doc["nodes"][6]["size"], 4);
    EXPECT_EQ(doc["leaf_order"], json::array({0, 1, 2, 3}));
}

TEST(TreeJson, RoundTripIsBitwise) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int iter = 0; iter < 50; ++iter) {
        auto t = oracle::random_tree(rng, {.min_points = 1, .max_points = 30});
        std::vector<double> vals(static_cast<std::size_t>(t.n_nodes()));
        for (node_t v : t.postorder()) {
            double lo = 0;
            for (node_t c : t.children(v)) lo = std::max(lo, vals[c]);
            vals[v] = t.is_leaf(v) ? u(rng) * 1e-3 : lo + u(rng) / 3;
        }
        t = t.with_values(vals);
        const auto path = scratch("tree.json").string();
        io::save_tree(t, path);
        const auto back = io::load_tree(path);
        ASSERT_EQ(back.n_nodes(), t.n_nodes());
        for (node_t v = 0; v < t.n_nodes(); ++v) {
            ASSERT_TRUE(same_bits(back.value(v), t.value(v)));
            ASSERT_EQ(back.parent(v), t.parent(v));
        }
        ASSERT_EQ(io::tree_to_json(back).dump(), io::tree_to_json(t).dump());
    }
}

TEST(TreeJson, Rejections) {
    auto doc = io::tree_to_json(fixtures::make_t4().tree);
    auto no_version = doc;
    no_version.erase("version");
    EXPECT_THROW(io::tree_from_json(no_version), ParseError);
    auto wrong_version = doc;
    wrong_version["version"] = "ship-tree/2";
    EXPECT_THROW(io::tree_from_json(wrong_version), ParseError);
    auto bad_size = doc;
    bad_size["nodes"][4]["size"] = 3;
    EXPECT_THROW(io::tree_from_json(bad_size), StructureError);
    auto bad_order = doc;
    bad_order["leaf_order"] = json::array({1, 0, 2, 3});
    EXPECT_THROW(io::tree_from_json(bad_order), StructureError);
    auto cycle = doc;
    cycle["nodes"][4]["parent"] = 5;
    EXPECT_THROW(io::tree_from_json(cycle), StructureError);
    auto text_value = doc;
    text_value["nodes"][0]["value"] = "zero";
    EXPECT_THROW(io::tree_from_json(text_value), ParseError);
    EXPECT_THROW(io::load_tree(scratch("missing.json").string() + ".nope"), IoError);
}

TEST(HierarchyJson, T4Layout) {
    const auto h = make_hierarchy(fixtures::make_t4().tree, Objective::power(1));
    const auto doc = io::hierarchy_to_json(h);
    EXPECT_EQ(doc["version"], "ship-hier/1");
    EXPECT_EQ(doc["objective"], "z=1");
    EXPECT_TRUE(doc["nodes"][0]["parent"].is_null());
    EXPECT_EQ(doc["nodes"][0]["split_k"], 1);
    EXPECT_EQ(doc["nodes"][0]["cost"], 12);
    EXPECT_EQ(doc["nodes"][0]["span"], json::array({0, 4}));
    EXPECT_EQ(doc["losses"], json::array({12, 5, 2, 0}));
}

TEST(HierarchyJson, RoundTripIsBitwise) {
    std::mt19937_64 rng(62);
    for (int iter = 0; iter < 60; ++iter) {
        const auto t = oracle::random_tree(rng, {.min_points = 1, .max_points = 25});
        const auto pts = oracle::random_points(rng, t.n_points(), 2, false);
        for (auto obj : {Objective::center(), Objective::power(1), Objective::power(4)}) {
            const auto h = make_hierarchy(t, obj, iter % 2 ? &pts : nullptr);
            const auto path = scratch("hier.json").string();
            io::save_hierarchy(h, path);
            const auto back = io::load_hierarchy(path);
            ASSERT_EQ(back.objective, h.objective);
            ASSERT_EQ(back.nodes.size(), h.nodes.size());
            for (std::size_t v = 0; v < h.nodes.size(); ++v) {
                ASSERT_TRUE(same_bits(back.nodes[v].cost, h.nodes[v].cost));
                ASSERT_EQ(back.nodes[v].split_k, h.nodes[v].split_k);
                ASSERT_EQ(back.nodes[v].center, h.nodes[v].center);
                ASSERT_EQ(back.nodes[v].span_begin, h.nodes[v].span_begin);
            }
            for (std::int64_t k = 1; k <= h.n_points; ++k)
                ASSERT_EQ(extract_partition(back, k).labels, extract_partition(h, k).labels);
        }
    }
}

TEST(HierarchyJson, Rejections) {
    const auto doc = io::hierarchy_to_json(make_hierarchy(fixtures::make_t4().tree, Objective::power(1)));
    auto bad_objective = doc;
    bad_objective["objective"] = "z=0";
    EXPECT_THROW(io::hierarchy_from_json(bad_objective), InvalidArgument);
    auto bad_span = doc;
    bad_span["nodes"][1]["span"] = json::array({1, 2});
    EXPECT_THROW(io::hierarchy_from_json(bad_span), StructureError);
    auto bad_center = doc;
    bad_center["nodes"][0]["center"] = 9;
    EXPECT_THROW(io::hierarchy_from_json(bad_center), StructureError);
    auto tree_doc = io::tree_to_json(fixtures::make_t4().tree);
    EXPECT_THROW(io::hierarchy_from_json(tree_doc), ParseError);
}

TEST(PointsCsv, HeaderCommentsAndBlankLines) {
    const auto p = io::parse_points_csv("# generated\nx,y\n0,0\n\n1.5, 2\n-3,4e1\n");
    ASSERT_EQ(p.size(), 3);
    EXPECT_EQ(p.dim(), 2);
    EXPECT_EQ(p.at(1, 0), 1.5);
    EXPECT_EQ(p.at(2, 1), 40);
}

TEST(PointsCsv, NoHeader) {
    const auto p = io::parse_points_csv("0\n1\n10\n");
    EXPECT_EQ(p.size(), 3);
    EXPECT_EQ(p.dim(), 1);
}

TEST(PointsCsv, Rejections) {
    EXPECT_THROW(io::parse_points_csv("1,2\n3\n"), ParseError);
    EXPECT_THROW(io::parse_points_csv("1,2\n3,abc\n"), ParseError);
    EXPECT_THROW(io::parse_points_csv("1,nan\n"), ParseError);
    EXPECT_THROW(io::parse_points_csv("a,b\n"), ParseError);
    EXPECT_THROW(io::parse_points_csv(""), ParseError);
    EXPECT_THROW(io::parse_points_csv("1\n2\n3\n", {.max_rows = 2, .max_cols = 512}), ParseError);
    EXPECT_THROW(io::parse_points_csv("1,2,3\n", {.max_rows = 10, .max_cols = 2}), ParseError);
    EXPECT_NO_THROW(io::parse_points_csv("1,2\n", {.max_rows = 1, .max_cols = 2}));
}

TEST(PointsJson, Forms) {
    EXPECT_EQ(io::parse_points_json(R"({"points": [[0, 1], [2, 3]]})").size(), 2);
    EXPECT_EQ(io::parse_points_json("[[0], [1], [10]]").dim(), 1);
    EXPECT_THROW(io::parse_points_json(R"({"pts": []})"), ParseError);
    EXPECT_THROW(io::parse_points_json("[[0, 1], [2]]"), ParseError);
    EXPECT_THROW(io::parse_points_json("[[0, \"x\"]]"), ParseError);
    EXPECT_THROW(io::parse_points_json("{"), ParseError);
}

TEST(LoadPoints, ChoosesParser) {
    const auto csv = scratch("p.csv").string();
    const auto js = scratch("p.json").string();
    io::write_file(csv, "x\n0\n1\n10\n");
    io::write_file(js, R"({"points": [[0], [1], [10]]})");
    EXPECT_EQ(io::load_points(csv).coords(), io::load_points(js).coords());
}

TEST(Dissimilarity, ParseForms) {
    const auto a = io::parse_dissimilarity(R"({"matrix": [[0, 2], [2, 0]]})", true);
    EXPECT_EQ(a(0, 1), 2);
    const auto b = io::parse_dissimilarity("0,2\n2,0\n", false);
    EXPECT_EQ(b(1, 0), 2);
    EXPECT_THROW(io::parse_dissimilarity("[[0, 1, 2], [1, 0, 2]]", true), ParseError);
    EXPECT_THROW(io::parse_dissimilarity("[]", true), ParseError);
}

TEST(Dissimilarity, T4FixtureBuildsT4) {
    const auto path = scratch("t4.dist.json").string();
    json doc;
    doc["matrix"] = json::array();
    const auto m = fixtures::t4_matrix();
    for (int i = 0; i < 4; ++i) doc["matrix"].push_back(std::vector<double>(m.begin() + 4 * i, m.begin() + 4 * i + 4));
    io::write_file(path, doc.dump());
    const auto t = build_from_dissimilarity(io::load_dissimilarity(path));
    EXPECT_EQ(io::tree_to_json(t).dump(), io::tree_to_json(fixtures::make_t4().tree).dump());
}

TEST(PartitionOutput, CsvAndJson) {
    Partition p;
    p.labels = {0, noise, 1};
    p.k = 2;
    EXPECT_EQ(io::partition_csv(p), "point,label\n0,0\n1,-1\n2,1\n");
    EXPECT_EQ(io::labels_json(p).dump(), "[0,null,1]");
}
