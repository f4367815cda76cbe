#pragma once

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "ship/hierarchy.hpp"
#include "ship/metrics.hpp"
#include "ship/ultra_core.hpp"

namespace ship {

struct Response {
    int status = 200;
    std::string body;
};

// Read-only query state over one fitted tree. Hierarchies are computed on first use.
class Session {
public:
    Session(LcaTree tree, std::optional<PointSet> points, bool tiebreak = false);

    Response handle(std::string_view path, std::string_view query) const;

    const LcaTree& tree() const { return tree_; }
    std::shared_ptr<const ClusterHierarchy> hierarchy(Objective objective) const;

private:
    LcaTree tree_;
    std::optional<PointSet> points_;
    bool tiebreak_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::shared_future<std::shared_ptr<const ClusterHierarchy>>> cache_;
};

}  // namespace ship
