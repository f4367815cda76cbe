// ship: command-line front end over the C API.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ship/ship.h"

namespace {

int report(ship_status s, const std::string& what) {
    spdlog::error("{}: {} ({})", what, ship_last_error(), ship_status_name(s));
    return 1;
}

void configure_logging() {
    spdlog::set_default_logger(spdlog::stderr_color_mt("ship"));
    const char* env = std::getenv("SHIP_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    spdlog::set_pattern("[%l] %v");
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string encode(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"ship: ultrametric clustering hierarchies"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit", "fit an LCA-tree over a dataset");
    std::string input, metric = "dc", tree_out;
    int mu = 5, max_depth = 16;
    std::int64_t max_rows = 0, max_cols = 0;
    fit->add_option("--input", input, "points (CSV or JSON) or a dissimilarity matrix")->required();
    fit->add_option("--metric", metric, "dc | hst | precomputed")->check(CLI::IsMember({"dc", "hst", "precomputed"}));
    fit->add_option("--mu", mu, "core-distance neighbor rank for dc");
    fit->add_option("--max-depth", max_depth, "subdivision depth for hst");
    fit->add_option("--out", tree_out, "output tree JSON")->required();
    fit->add_option("--max-rows", max_rows, "CSV row limit");
    fit->add_option("--max-cols", max_cols, "CSV column limit");

    auto* hier = app.add_subcommand("hierarchy", "build a clustering hierarchy from a tree");
    std::string tree_path, objective = "median", points_path, hier_out;
    bool tiebreak = false;
    hier->add_option("--tree", tree_path, "tree JSON")->required();
    hier->add_option("--objective", objective, "center | median | means | z=N");
    hier->add_flag("--tiebreak", tiebreak, "resolve ties by Euclidean proximity (needs --points)");
    hier->add_option("--points", points_path, "points used for tie-breaking");
    hier->add_option("--out", hier_out, "output hierarchy JSON")->required();

    auto* part = app.add_subcommand("partition", "extract a flat clustering");
    std::string hier_path, method, part_out, part_tree;
    std::int64_t k = 0, min_size = 5;
    double eps = 0;
    std::vector<int> zs{1, 2, 3, 4, 5};
    part->add_option("--hier", hier_path, "hierarchy JSON")->required();
    part->add_option("--method", method, "k | elbow | moe | threshold | stability")
        ->required()
        ->check(CLI::IsMember({"k", "elbow", "moe", "threshold", "stability"}));
    auto* k_opt = part->add_option("--k", k, "cluster count for --method k");
    auto* eps_opt = part->add_option("--eps", eps, "cost threshold for --method threshold");
    part->add_option("--min-cluster-size", min_size, "minimum cluster size for --method stability");
    part->add_option("--z", zs, "z values for --method moe");
    part->add_option("--tree", part_tree, "tree JSON (needed by --method moe)");
    part->add_option("--out", part_out, "output CSV (default stdout)");

    auto* curve = app.add_subcommand("curve", "print the optimal cost curve");
    std::string curve_tree, curve_hier, curve_obj = "median";
    curve->add_option("--tree", curve_tree, "tree JSON");
    curve->add_option("--hier", curve_hier, "hierarchy JSON");
    curve->add_option("--objective", curve_obj, "objective when reading a tree");

    auto* serve = app.add_subcommand("serve", "serve a fitted tree over HTTP");
    std::string serve_tree, serve_points, host = "127.0.0.1";
    int port = 8080;
    bool serve_tiebreak = false;
    serve->add_option("--tree", serve_tree, "tree JSON")->required();
    serve->add_option("--points", serve_points, "points file");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "TCP port");
    serve->add_flag("--tiebreak", serve_tiebreak, "Euclidean tie-breaking (needs --points)");

    CLI11_PARSE(app, argc, argv);

    if (*fit) {
        ship_tree* t = nullptr;
        auto t0 = std::chrono::steady_clock::now();
        ship_status s;
        if (metric == "precomputed") {
            int64_t witness[3] = {-1, -1, -1};
            s = ship_tree_load_dissimilarity(input.c_str(), &t, witness);
            if (s == SHIP_ERR_NOT_ULTRAMETRIC)
                std::fprintf(stderr, "witness: %lld %lld %lld\n", static_cast<long long>(witness[0]),
                             static_cast<long long>(witness[1]), static_cast<long long>(witness[2]));
            if (s != SHIP_OK) return report(s, "fit");
        } else {
            ship_points* p = nullptr;
            if ((s = ship_points_load(input.c_str(), max_rows, max_cols, &p)) != SHIP_OK) return report(s, "load points");
            t0 = std::chrono::steady_clock::now();
            s = metric == "dc" ? ship_tree_fit_dc(p, mu, &t) : ship_tree_fit_hst(p, max_depth, &t);
            ship_points_free(p);
            if (s != SHIP_OK) return report(s, "fit");
        }
        const double ms = ms_since(t0);
        const auto n = ship_tree_n_points(t);
        s = ship_tree_save(t, tree_out.c_str());
        ship_tree_free(t);
        if (s != SHIP_OK) return report(s, "save tree");
        std::printf("fit metric=%s n=%lld time_ms=%.3f\n", metric.c_str(), static_cast<long long>(n), ms);
        return 0;
    }

    if (*hier) {
        ship_objective obj;
        ship_status s;
        if ((s = ship_objective_parse(objective.c_str(), &obj)) != SHIP_OK) return report(s, "objective");
        ship_tree* t = nullptr;
        if ((s = ship_tree_load(tree_path.c_str(), &t)) != SHIP_OK) return report(s, "load tree");
        ship_points* p = nullptr;
        if (tiebreak) {
            if (points_path.empty()) {
                ship_tree_free(t);
                spdlog::error("--tiebreak needs --points");
                return 1;
            }
            if ((s = ship_points_load(points_path.c_str(), 0, 0, &p)) != SHIP_OK) {
                ship_tree_free(t);
                return report(s, "load points");
            }
        }
        ship_hierarchy* h = nullptr;
        auto t0 = std::chrono::steady_clock::now();
        s = ship_hierarchy_build(t, obj, p, &h);
        const double ms = ms_since(t0);
        ship_points_free(p);
        ship_tree_free(t);
        if (s != SHIP_OK) return report(s, "hierarchy");
        s = ship_hierarchy_save(h, hier_out.c_str());
        const auto n = ship_hierarchy_n_points(h);
        ship_hierarchy_free(h);
        if (s != SHIP_OK) return report(s, "save hierarchy");
        std::printf("hierarchy objective=%s n=%lld time_ms=%.3f\n", objective.c_str(), static_cast<long long>(n), ms);
        return 0;
    }

    if (*part) {
        ship_hierarchy* h = nullptr;
        ship_status s;
        if ((s = ship_hierarchy_load(hier_path.c_str(), &h)) != SHIP_OK) return report(s, "load hierarchy");
        const auto n = ship_hierarchy_n_points(h);
        std::vector<int64_t> labels(static_cast<std::size_t>(n));
        int64_t chosen = 0;
        if (method == "k") {
            if (!*k_opt) s = (spdlog::error("--method k needs --k"), SHIP_ERR_INVALID_ARGUMENT);
            else if ((s = ship_partition_k(h, k, labels.data())) == SHIP_OK) chosen = k;
        } else if (method == "elbow") {
            s = ship_partition_elbow(h, &chosen, labels.data());
        } else if (method == "moe") {
            ship_tree* t = nullptr;
            if (part_tree.empty()) {
                spdlog::error("--method moe needs --tree");
                s = SHIP_ERR_INVALID_ARGUMENT;
            } else if ((s = ship_tree_load(part_tree.c_str(), &t)) == SHIP_OK) {
                s = ship_partition_moe(t, h, zs.data(), static_cast<int64_t>(zs.size()), &chosen, labels.data());
                ship_tree_free(t);
            }
        } else if (method == "threshold") {
            if (!*eps_opt) s = (spdlog::error("--method threshold needs --eps"), SHIP_ERR_INVALID_ARGUMENT);
            else s = ship_partition_threshold(h, eps, &chosen, labels.data());
        } else {
            s = ship_partition_stability(h, min_size, &chosen, labels.data());
        }
        ship_hierarchy_free(h);
        if (s != SHIP_OK) return *ship_last_error() ? report(s, "partition") : 1;
        if (part_out.empty()) {
            std::printf("point,label\n");
            for (std::size_t i = 0; i < labels.size(); ++i) std::printf("%zu,%lld\n", i, static_cast<long long>(labels[i]));
            std::fprintf(stderr, "k=%lld\n", static_cast<long long>(chosen));
        } else {
            if ((s = ship_labels_write_csv(labels.data(), n, part_out.c_str())) != SHIP_OK) return report(s, "write labels");
            std::printf("k=%lld\n", static_cast<long long>(chosen));
        }
        return 0;
    }

    if (*curve) {
        ship_status s;
        ship_hierarchy* h = nullptr;
        if (!curve_hier.empty()) {
            if ((s = ship_hierarchy_load(curve_hier.c_str(), &h)) != SHIP_OK) return report(s, "load hierarchy");
        } else if (!curve_tree.empty()) {
            ship_objective obj;
            if ((s = ship_objective_parse(curve_obj.c_str(), &obj)) != SHIP_OK) return report(s, "objective");
            ship_tree* t = nullptr;
            if ((s = ship_tree_load(curve_tree.c_str(), &t)) != SHIP_OK) return report(s, "load tree");
            s = ship_hierarchy_build(t, obj, nullptr, &h);
            ship_tree_free(t);
            if (s != SHIP_OK) return report(s, "hierarchy");
        } else {
            spdlog::error("curve needs --tree or --hier");
            return 1;
        }
        const auto n = ship_hierarchy_n_points(h);
        std::vector<double> losses(static_cast<std::size_t>(n));
        ship_objective obj;
        ship_hierarchy_objective(h, &obj);
        s = ship_hierarchy_curve(h, losses.data(), n);
        int64_t elbow = -1;
        std::vector<int64_t> scratch(static_cast<std::size_t>(n));
        if (s == SHIP_OK && n >= 3) ship_partition_elbow(h, &elbow, scratch.data());
        ship_hierarchy_free(h);
        if (s != SHIP_OK) return report(s, "curve");
        std::string out = "{\"objective\":\"";
        out += obj.kind == SHIP_OBJECTIVE_CENTER ? "center" : "z=" + std::to_string(obj.z);
        out += "\",\"losses\":[";
        for (std::size_t i = 0; i < losses.size(); ++i) out += (i ? "," : "") + fmt_number(losses[i]);
        out += "],\"elbow\":" + (elbow > 0 ? std::to_string(elbow) : std::string("null")) + "}";
        std::printf("%s\n", out.c_str());
        return 0;
    }

    // serve
    ship_status s;
    ship_tree* t = nullptr;
    if ((s = ship_tree_load(serve_tree.c_str(), &t)) != SHIP_OK) return report(s, "load tree");
    ship_points* p = nullptr;
    if (!serve_points.empty() && (s = ship_points_load(serve_points.c_str(), 0, 0, &p)) != SHIP_OK) {
        ship_tree_free(t);
        return report(s, "load points");
    }
    ship_session* session = nullptr;
    s = ship_session_create(t, p, serve_tiebreak ? 1 : 0, &session);
    ship_tree_free(t);
    ship_points_free(p);
    if (s != SHIP_OK) return report(s, "session");

    httplib::Server server;
    auto route = [session](const httplib::Request& req, httplib::Response& res) {
        std::string query;
        for (const auto& [key, value] : req.params) {
            if (!query.empty()) query += '&';
            query += encode(key) + "=" + encode(value);
        }
        int status = 500;
        char* body = nullptr;
        if (ship_session_handle(session, req.path.c_str(), query.c_str(), &status, &body) != SHIP_OK) {
            res.status = 500;
            res.set_content(R"({"error":"internal","detail":"session failure"})", "application/json");
            return;
        }
        res.status = status;
        res.set_content(body, "application/json");
        res.set_header("Access-Control-Allow-Origin", "*");
        ship_string_free(body);
        spdlog::info("GET {} {} -> {}", req.path, query, status);
    };
    server.Get(R"(/.*)", route);
    if (!server.bind_to_port(host, port)) {
        spdlog::error("cannot bind {}:{}", host, port);
        ship_session_free(session);
        return 1;
    }
    std::printf("serving on http://%s:%d\n", host.c_str(), port);
    std::fflush(stdout);
    server.listen_after_bind();
    ship_session_free(session);
    return 0;
}
