#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "loss.hpp"
#include "sample.hpp"

namespace bayesclust {

/// Slack on cumulative posterior mass comparisons (sums of many weights).
inline constexpr double mass_tolerance = 1e-10;

/// d(c_s, center) for every draw.
inline std::vector<double> distances_to(const Partition& center, const PartitionSample& sample, LossKind metric) {
    if (center.size() != sample.items()) throw std::invalid_argument("partition length mismatch");
    std::map<Partition, double> cache;
    std::vector<double> out(sample.size());
    for (std::size_t s = 0; s < sample.size(); ++s) {
        auto it = cache.find(sample[s]);
        if (it == cache.end()) it = cache.emplace(sample[s], loss(sample[s], center, metric)).first;
        out[s] = it->second;
    }
    return out;
}

namespace detail {

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

inline double radius_from_distances(const std::vector<double>& dist, const PartitionSample& sample, double level) {
    std::vector<std::size_t> order(dist.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    double mass = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        mass += sample.weight(order[k]);
        const bool group_end = k + 1 == order.size() || dist[order[k + 1]] != dist[order[k]];
        if (group_end && mass >= level - mass_tolerance) return dist[order[k]];
    }
    return dist[order.back()];
}

} // namespace detail

/// Smallest observed distance eps such that draws within eps of the center
/// carry at least 1 - alpha of the posterior mass. No interpolation: eps is
/// always attained by some draw.
inline double ball_radius(const Partition& center, const PartitionSample& sample, LossKind metric, double alpha) {
    detail::check_alpha(alpha);
    return detail::radius_from_distances(distances_to(center, sample, metric), sample, 1.0 - alpha);
}

struct BoundEntry {
    Partition partition;
    double distance = 0.0;
    int clusters = 0;
};

struct BallMember {
    Partition partition;
    double distance = 0.0;
    double mass = 0.0;
};

struct CredibleBall {
    Partition center;
    LossKind metric = LossKind::VI;
    double level = 0.95;
    double radius = 0.0;
    double coverage = 0.0;
    std::vector<std::size_t> member_indices;
    /// Distinct partitions inside the ball, ascending distance.
    std::vector<BallMember> members;
    std::vector<BoundEntry> horizontal_bounds;
    std::vector<BoundEntry> vertical_upper_bounds;
    std::vector<BoundEntry> vertical_lower_bounds;
    /// Per-draw distance to the center, for export.
    std::vector<double> distances;
};

/// Credible ball of level 1 - alpha around `center`, with its bounds:
///   horizontal     - members farthest from the center
///   vertical upper - among members with the fewest clusters, the farthest
///   vertical lower - among members with the most clusters, the farthest
/// Tied extremal partitions are all reported.
inline CredibleBall credible_ball(const Partition& center, const PartitionSample& sample, LossKind metric,
                                  double alpha) {
    detail::check_alpha(alpha);
    CredibleBall ball;
    ball.center = center;
    ball.metric = metric;
    ball.level = 1.0 - alpha;
    ball.distances = distances_to(center, sample, metric);
    ball.radius = detail::radius_from_distances(ball.distances, sample, ball.level);

    std::map<Partition, std::size_t> index;
    for (std::size_t s = 0; s < sample.size(); ++s) {
        if (ball.distances[s] > ball.radius) continue;
        ball.member_indices.push_back(s);
        ball.coverage += sample.weight(s);
        auto [it, fresh] = index.try_emplace(sample[s], ball.members.size());
        if (fresh) ball.members.push_back({sample[s], ball.distances[s], 0.0});
        ball.members[it->second].mass += sample.weight(s);
    }
    std::stable_sort(ball.members.begin(), ball.members.end(),
                     [](const BallMember& a, const BallMember& b) { return a.distance < b.distance; });

    auto farthest = [&](auto&& keep) {
        std::vector<BoundEntry> out;
        double far = -1.0;
        for (const auto& m : ball.members)
            if (keep(m)) far = std::max(far, m.distance);
        for (const auto& m : ball.members)
            if (keep(m) && m.distance >= far - 1e-12) out.push_back({m.partition, m.distance, m.partition.num_clusters()});
        return out;
    };
    int kmin = ball.members.front().partition.num_clusters();
    int kmax = kmin;
    for (const auto& m : ball.members) {
        kmin = std::min(kmin, m.partition.num_clusters());
        kmax = std::max(kmax, m.partition.num_clusters());
    }
    ball.horizontal_bounds = farthest([](const BallMember&) { return true; });
    ball.vertical_upper_bounds = farthest([&](const BallMember& m) { return m.partition.num_clusters() == kmin; });
    ball.vertical_lower_bounds = farthest([&](const BallMember& m) { return m.partition.num_clusters() == kmax; });
    return ball;
}

struct PmfEntry {
    Partition partition;
    double prob = 0.0;
};

/// Distinct partitions with their summed draw weights, most probable first
/// (ties keep first appearance).
inline std::vector<PmfEntry> empirical_pmf(const PartitionSample& sample) {
    const PartitionSample distinct = sample.deduplicated();
    std::vector<PmfEntry> pmf;
    pmf.reserve(distinct.size());
    for (std::size_t s = 0; s < distinct.size(); ++s) pmf.push_back({distinct[s], distinct.weight(s)});
    std::stable_sort(pmf.begin(), pmf.end(), [](const PmfEntry& a, const PmfEntry& b) { return a.prob > b.prob; });
    return pmf;
}

struct HpdMode {
    enum class Kind { Threshold, Mass };
    Kind kind = Kind::Threshold;
    /// gamma in (0, 1] for Threshold, target mass 1 - alpha in (0, 1) for Mass.
    double value = 0.0;

    static HpdMode threshold(double gamma) { return {Kind::Threshold, gamma}; }
    static HpdMode mass(double target) { return {Kind::Mass, target}; }
};

struct HpdMember {
    Partition partition;
    double prob = 0.0;
    double distance = 0.0;
};

struct HPDRegion {
    HpdMode mode;
    LossKind metric = LossKind::VI;
    std::vector<HpdMember> members;
    double total_mass = 0.0;
    /// Set when every sampled partition has the same estimated probability,
    /// where a threshold cannot discriminate between them.
    bool diffuse = false;
    std::string warning;
};

/// High posterior density region over sampled partitions. Threshold mode
/// keeps every partition with p >= gamma; mass mode keeps the shortest
/// most-probable-first prefix reaching the target mass, plus any partitions
/// tied with the last one kept.
inline HPDRegion hpd_region(const std::vector<PmfEntry>& pmf, const Partition& center, LossKind metric,
                            HpdMode mode) {
    if (pmf.empty()) throw std::invalid_argument("empty probability mass function");
    if (mode.kind == HpdMode::Kind::Threshold && !(mode.value > 0.0 && mode.value <= 1.0))
        throw std::invalid_argument("threshold gamma must lie in (0, 1]");
    if (mode.kind == HpdMode::Kind::Mass && !(mode.value > 0.0 && mode.value < 1.0))
        throw std::invalid_argument("target mass must lie in (0, 1)");

    std::vector<PmfEntry> sorted = pmf;
    std::stable_sort(sorted.begin(), sorted.end(), [](const PmfEntry& a, const PmfEntry& b) { return a.prob > b.prob; });

    HPDRegion region;
    region.mode = mode;
    region.metric = metric;
    auto add = [&](const PmfEntry& e) {
        region.members.push_back({e.partition, e.prob, loss(e.partition, center, metric)});
        region.total_mass += e.prob;
    };
    if (mode.kind == HpdMode::Kind::Threshold) {
        for (const auto& e : sorted)
            if (e.prob >= mode.value) add(e);
    } else {
        double cut = -1.0;
        for (const auto& e : sorted) {
            if (cut >= 0.0 && e.prob != cut) break;
            add(e);
            if (cut < 0.0 && region.total_mass >= mode.value - mass_tolerance) cut = e.prob;
        }
    }
    if (sorted.size() > 1 && sorted.front().prob == sorted.back().prob) {
        region.diffuse = true;
        region.warning = "every sampled partition has the same estimated probability; the region is degenerate";
    }
    return region;
}

} // namespace bayesclust
