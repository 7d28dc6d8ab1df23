#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <exception>
#include <type_traits>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "partition.hpp"

namespace bayesclust {

enum class InitKind {
    Mixed,      ///< restart 0 one-cluster, restart 1 singletons, the rest random
    OneCluster,
    Singletons,
    Random,
    WarmStart,
};

struct GreedyConfig {
    int restarts = 10;
    /// Cap on the number of clusters explored; 0 means N.
    int max_clusters = 0;
    int max_sweeps = 1000;
    std::uint64_t seed = 1;
    InitKind init = InitKind::Mixed;
    /// K for random initializations; 0 means min(ceil(sqrt(N)), max_clusters).
    int random_k = 0;
    std::optional<Partition> warm_start;
    unsigned threads = 1;
    /// Recompute the objective from scratch after every accepted move and
    /// throw std::logic_error if it drifts from the incremental value by more than 1e-10.
    bool check_incremental = false;
};

struct OptResult {
    Partition partition;
    double epl = 0.0;
    /// Objective at the start of the best restart, then after every sweep that moved an item.
    std::vector<double> trace;
    int restarts_agreeing = 0;
};

/// State for item-level greedy search. Cluster ids are 0..K-1 and stay
/// contiguous: the objective deletes a cluster as soon as it empties.
template <class O>
concept GreedyObjective = requires(O o, const O co, std::size_t item, int cluster, std::vector<int> labels) {
    { co.items() } -> std::convertible_to<std::size_t>;
    { o.reset(labels) };
    { co.value() } -> std::convertible_to<double>;
    { co.num_clusters() } -> std::convertible_to<int>;
    { co.cluster_of(item) } -> std::convertible_to<int>;
    { co.cluster_size(cluster) } -> std::convertible_to<std::size_t>;
    { co.value_if_moved(item, cluster) } -> std::convertible_to<double>;
    { o.move(item, cluster) };
    { co.value_from_scratch() } -> std::convertible_to<double>;
    { o.resync() };
    { co.labels() } -> std::convertible_to<std::vector<int>>;
};

namespace detail {

inline int resolve_max_clusters(const GreedyConfig& cfg, std::size_t n) {
    if (cfg.max_clusters < 0) throw std::invalid_argument("max_clusters must be at least 1");
    if (cfg.max_clusters == 0) return static_cast<int>(n);
    return std::min(cfg.max_clusters, static_cast<int>(n));
}

// Zero-based contiguous labels from any labeling.
inline std::vector<int> zero_based(const Partition& p) {
    std::vector<int> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p.index(i);
    return out;
}

inline std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(1, k);
    std::vector<int> raw(n);
    for (auto& l : raw) l = pick(rng);
    return zero_based(Partition(raw));
}

inline std::vector<int> initial_labels(const GreedyConfig& cfg, int restart, std::size_t n, int cap,
                                       std::mt19937_64& rng) {
    const int random_k = cfg.random_k > 0
                             ? std::min(cfg.random_k, cap)
                             : std::min(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))), cap);
    auto singletons = [&] {
        if (static_cast<int>(n) > cap) return random_labels(n, cap, rng);
        return zero_based(Partition::singletons(n));
    };
    switch (cfg.init) {
    case InitKind::Mixed:
        if (restart == 0) return std::vector<int>(n, 0);
        if (restart == 1) return singletons();
        return random_labels(n, random_k, rng);
    case InitKind::OneCluster: return std::vector<int>(n, 0);
    case InitKind::Singletons: return singletons();
    case InitKind::Random: return random_labels(n, random_k, rng);
    case InitKind::WarmStart:
        if (!cfg.warm_start) throw std::invalid_argument("warm-start init requires a partition");
        if (cfg.warm_start->size() != n) throw std::invalid_argument("partition length mismatch");
        if (cfg.warm_start->num_clusters() > cap) throw std::invalid_argument("warm start exceeds max_clusters");
        return zero_based(*cfg.warm_start);
    }
    return std::vector<int>(n, 0);
}

inline bool improves(double candidate, double current) {
    return current - candidate > 1e-12 * std::abs(current);
}

struct RestartOutcome {
    std::vector<int> labels;
    double value = 0.0;
    std::vector<double> trace;
};

template <GreedyObjective O>
RestartOutcome run_restart(O& obj, const GreedyConfig& cfg, int restart, int cap) {
    const std::size_t n = obj.items();
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(restart)};
    std::mt19937_64 rng(seq);

    obj.reset(initial_labels(cfg, restart, n, cap, rng));
    RestartOutcome out;
    out.trace.push_back(obj.value());

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        std::shuffle(order.begin(), order.end(), rng);
        bool moved = false;
        for (std::size_t item : order) {
            const double current = obj.value();
            const int home = obj.cluster_of(item);
            const int k = obj.num_clusters();
            double best = current;
            int target = home;
            for (int c = 0; c < k; ++c) {
                if (c == home) continue;
                const double v = obj.value_if_moved(item, c);
                if (v < best) {
                    best = v;
                    target = c;
                }
            }
            // One fresh cluster, unless the item already sits alone.
            if (k < cap && obj.cluster_size(home) > 1) {
                const double v = obj.value_if_moved(item, k);
                if (v < best) {
                    best = v;
                    target = k;
                }
            }
            if (target == home || !improves(best, current)) continue;
            obj.move(item, target);
            moved = true;
            if (cfg.check_incremental) {
                const double fresh = obj.value_from_scratch();
                if (std::abs(fresh - obj.value()) > 1e-10)
                    throw std::logic_error("incremental objective drifted from recomputed value");
            }
        }
        obj.resync();
        if (!moved) break;
        out.trace.push_back(obj.value());
    }
    out.labels = obj.labels();
    out.value = obj.value();
    return out;
}

} // namespace detail

/// Multi-restart greedy item reassignment. `make()` builds a fresh objective
/// for each restart; restarts are independent and may run on `cfg.threads`
/// threads. Each sweep visits items in a seeded random order and moves each
/// to the best of: every existing cluster or one new cluster (while K is
/// below the cap). Ties keep the current cluster, then favour the lowest id.
template <class Factory>
    requires GreedyObjective<std::invoke_result_t<Factory&>>
OptResult greedy_search(Factory make, const GreedyConfig& cfg) {
    if (cfg.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (cfg.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be at least 1");

    using Objective = std::invoke_result_t<Factory&>;
    std::vector<detail::RestartOutcome> outcomes(static_cast<std::size_t>(cfg.restarts));
    int cap = 0;
    {
        Objective probe = make();
        cap = detail::resolve_max_clusters(cfg, probe.items());
    }

    auto work = [&](int r) {
        Objective obj = make();
        outcomes[static_cast<std::size_t>(r)] = detail::run_restart(obj, cfg, r, cap);
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.restarts)));
    if (threads == 1) {
        for (int r = 0; r < cfg.restarts; ++r) work(r);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (int r = static_cast<int>(t); r < cfg.restarts; r += static_cast<int>(threads)) work(r);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r)
        if (outcomes[r].value < outcomes[best].value) best = r;

    OptResult result;
    result.partition = Partition(outcomes[best].labels);
    result.trace = std::move(outcomes[best].trace);
    for (const auto& o : outcomes)
        if (Partition(o.labels) == result.partition) ++result.restarts_agreeing;

    Objective final_obj = make();
    final_obj.reset(detail::zero_based(result.partition));
    result.epl = final_obj.value_from_scratch();
    return result;
}

} // namespace bayesclust
