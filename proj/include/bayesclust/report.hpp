#pragma once

#include <json.hpp>

#include "greedy.hpp"
#include "uncertainty.hpp"

namespace bayesclust::report {

using json = nlohmann::ordered_json;

inline json labels(const Partition& p) { return p.labels(); }

inline json opt_result(const OptResult& r) {
    return json{{"partition", labels(r.partition)},
                {"K", r.partition.num_clusters()},
                {"epl", r.epl},
                {"trace", r.trace},
                {"restarts_agreeing", r.restarts_agreeing}};
}

inline json bounds(const std::vector<BoundEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries) out.push_back({{"labels", labels(e.partition)}, {"distance", e.distance}, {"K", e.clusters}});
    return out;
}

inline json credible_ball(const CredibleBall& ball) {
    json members = json::array();
    for (const auto& m : ball.members)
        members.push_back({{"labels", labels(m.partition)},
                           {"distance", m.distance},
                           {"K", m.partition.num_clusters()},
                           {"mass", m.mass}});
    return json{{"center", labels(ball.center)},
                {"metric", to_string(ball.metric)},
                {"level", ball.level},
                {"radius", ball.radius},
                {"coverage", ball.coverage},
                {"member_indices", ball.member_indices},
                {"members", std::move(members)},
                {"bounds",
                 {{"horizontal", bounds(ball.horizontal_bounds)},
                  {"vertical_upper", bounds(ball.vertical_upper_bounds)},
                  {"vertical_lower", bounds(ball.vertical_lower_bounds)}}}};
}

inline json hpd(const HPDRegion& region) {
    json members = json::array();
    for (const auto& m : region.members)
        members.push_back({{"labels", labels(m.partition)}, {"prob", m.prob}, {"distance", m.distance}});
    json out{{"mode", region.mode.kind == HpdMode::Kind::Threshold ? "threshold" : "mass"},
             {"value", region.mode.value},
             {"metric", to_string(region.metric)},
             {"total_mass", region.total_mass},
             {"diffuse", region.diffuse},
             {"members", std::move(members)}};
    if (!region.warning.empty()) out["warning"] = region.warning;
    return out;
}

} // namespace bayesclust::report
