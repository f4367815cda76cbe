#include "ship/session.hpp"

#include <charconv>
#include <string>

#include "ship/io.hpp"
#include "ship/partition.hpp"

namespace ship {

namespace {

using io::json;

std::string url_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out += ' ';
        } else if (s[i] == '%' && i + 2 < s.size()) {
            int v = 0;
            auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
            if (ec == std::errc{} && p == s.data() + i + 3) {
                out += static_cast<char>(v);
                i += 2;
            } else {
                out += s[i];
            }
        } else {
            out += s[i];
        }
    }
    return out;
}

using Query = std::map<std::string, std::string>;

Query parse_query(std::string_view q) {
    Query out;
    if (!q.empty() && q.front() == '?') q.remove_prefix(1);
    while (!q.empty()) {
        auto amp = q.find('&');
        auto part = q.substr(0, amp);
        auto eq = part.find('=');
        if (!part.empty())
            out[url_decode(part.substr(0, eq))] = eq == std::string_view::npos ? "" : url_decode(part.substr(eq + 1));
        if (amp == std::string_view::npos) break;
        q.remove_prefix(amp + 1);
    }
    return out;
}

std::int64_t int_param(const Query& q, const std::string& key, std::optional<std::int64_t> fallback) {
    auto it = q.find(key);
    if (it == q.end() || it->second.empty()) {
        if (fallback) return *fallback;
        throw InvalidArgument("missing parameter '" + key + "'");
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || p != it->second.data() + it->second.size())
        throw InvalidArgument("parameter '" + key + "' must be an integer");
    return v;
}

double real_param(const Query& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end() || it->second.empty()) throw InvalidArgument("missing parameter '" + key + "'");
    double v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || p != it->second.data() + it->second.size())
        throw InvalidArgument("parameter '" + key + "' must be a number");
    return v;
}

Objective objective_param(const Query& q) {
    auto it = q.find("objective");
    const std::string name = it == q.end() || it->second.empty() ? "z" : it->second;
    if (name == "z") return Objective::power(static_cast<int>(int_param(q, "z", 1)));
    return Objective::parse(name);
}

Response ok(json body) { return {200, body.dump()}; }

Response fail(int status, const std::string& error, const std::string& detail) {
    return {status, json{{"error", error}, {"detail", detail}}.dump()};
}

json partition_body(const std::string& method, const Objective& obj, const Partition& p) {
    json centers = json::array();
    for (node_t c : p.centers) centers.push_back(c);
    return {{"schema", "ship.partition/1"}, {"method", method},   {"objective", obj.tag()},
            {"k", p.k},                     {"labels", io::labels_json(p)}, {"centers", std::move(centers)}};
}

}  // namespace

Session::Session(LcaTree tree, std::optional<PointSet> points, bool tiebreak)
    : tree_(std::move(tree)), points_(std::move(points)), tiebreak_(tiebreak) {
    if (points_ && points_->size() != tree_.n_points())
        throw InvalidArgument("points file has " + std::to_string(points_->size()) + " rows but the tree has " +
                              std::to_string(tree_.n_points()) + " points");
    if (tiebreak_ && !points_) throw InvalidArgument("tie-breaking needs point coordinates");
}

std::shared_ptr<const ClusterHierarchy> Session::hierarchy(Objective objective) const {
    const std::string key = objective.tag();
    std::promise<std::shared_ptr<const ClusterHierarchy>> promise;
    std::shared_future<std::shared_ptr<const ClusterHierarchy>> fut;
    bool owner = false;
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            fut = promise.get_future().share();
            cache_.emplace(key, fut);
            owner = true;
        } else {
            fut = it->second;
        }
    }
    if (owner) {
        try {
            promise.set_value(std::make_shared<const ClusterHierarchy>(
                make_hierarchy(tree_, objective, tiebreak_ ? &*points_ : nullptr)));
        } catch (...) {
            promise.set_exception(std::current_exception());
        }
    }
    return fut.get();
}

Response Session::handle(std::string_view path, std::string_view query) const {
    try {
        const Query q = parse_query(query);
        if (path == "/meta") {
            json objectives = json::array({"center"});
            for (int z = 1; z <= max_power; ++z) objectives.push_back("z=" + std::to_string(z));
            return ok({{"schema", "ship.meta/1"},
                       {"n_points", tree_.n_points()},
                       {"n_nodes", tree_.n_nodes()},
                       {"has_points", points_.has_value()},
                       {"dim", points_ ? json(points_->dim()) : json(nullptr)},
                       {"tiebreak", tiebreak_},
                       {"objectives", std::move(objectives)},
                       {"methods", {"k", "elbow", "moe", "threshold", "stability"}}});
        }
        if (path == "/points") {
            if (!points_) return fail(404, "not_found", "session has no point data");
            json rows = json::array();
            for (std::int64_t i = 0; i < points_->size(); ++i) {
                json r = json::array();
                for (std::int64_t k = 0; k < points_->dim(); ++k) r.push_back(io::number(points_->at(i, k)));
                rows.push_back(std::move(r));
            }
            return ok({{"schema", "ship.points/1"}, {"dim", points_->dim()}, {"points", std::move(rows)}});
        }
        if (path == "/tree") return ok({{"schema", "ship.tree/1"}, {"tree", io::tree_to_json(tree_)}});
        if (path == "/hierarchy") {
            auto h = hierarchy(objective_param(q));
            return ok({{"schema", "ship.hierarchy/1"}, {"hierarchy", io::hierarchy_to_json(*h)}});
        }
        if (path == "/curve") {
            const Objective obj = objective_param(q);
            auto h = hierarchy(obj);
            json losses = json::array();
            for (double x : h->losses) losses.push_back(io::number(x));
            json body{{"schema", "ship.curve/1"}, {"objective", obj.tag()}, {"losses", std::move(losses)}};
            body["elbow"] = h->losses.size() >= 3 ? json(elbow_index(h->losses)) : json(nullptr);
            return ok(std::move(body));
        }
        if (path == "/elbows") {
            const auto zmax = int_param(q, "zmax", 5);
            if (zmax < 1 || zmax > max_power) throw InvalidArgument("zmax must be in [1, " + std::to_string(max_power) + "]");
            std::vector<int> zs;
            for (int z = 1; z <= zmax; ++z) zs.push_back(z);
            std::vector<std::int64_t> elbows;
            for (int z : zs) elbows.push_back(elbow_index(hierarchy(Objective::power(z))->losses));
            return ok({{"schema", "ship.elbows/1"}, {"zs", zs}, {"elbows", elbows}, {"median", lower_median(elbows)}});
        }
        if (path == "/partition") {
            auto mit = q.find("method");
            if (mit == q.end()) throw InvalidArgument("missing parameter 'method'");
            const std::string& method = mit->second;
            const Objective obj = objective_param(q);
            auto h = hierarchy(obj);
            if (method == "k") return ok(partition_body(method, obj, extract_partition(*h, int_param(q, "k", std::nullopt))));
            if (method == "elbow") return ok(partition_body(method, obj, extract_partition(*h, elbow_index(h->losses))));
            if (method == "moe") {
                const auto zmax = int_param(q, "zmax", 5);
                if (zmax < 1 || zmax > max_power) throw InvalidArgument("zmax out of range");
                std::vector<std::int64_t> elbows;
                for (int z = 1; z <= zmax; ++z) elbows.push_back(elbow_index(hierarchy(Objective::power(z))->losses));
                return ok(partition_body(method, obj, extract_partition(*h, lower_median(elbows))));
            }
            if (method == "threshold") return ok(partition_body(method, obj, threshold_partition(*h, real_param(q, "eps"))));
            if (method == "stability") {
                auto r = best_partition(*h, int_param(q, "min_cluster_size", 5));
                json body = partition_body(method, obj, r.partition);
                body["all_pruned"] = r.all_pruned;
                return ok(std::move(body));
            }
            throw InvalidArgument("unknown method '" + method + "'");
        }
        return fail(404, "not_found", "no endpoint at " + std::string(path));
    } catch (const OutOfRange& e) {
        return fail(400, "out_of_range", e.what());
    } catch (const Error& e) {
        return fail(400, "bad_request", e.what());
    } catch (const std::exception& e) {
        return fail(500, "internal", e.what());
    }
}

}  // namespace ship
