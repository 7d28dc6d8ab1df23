#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "greedy.hpp"
#include "loss.hpp"
#include "sample.hpp"

namespace bayesclust {

/// Posterior similarity matrix: entry (n, m) is the posterior probability
/// that items n and m share a cluster. Dense, exactly symmetric, unit diagonal.
class PSMatrix {
public:
    explicit PSMatrix(std::size_t n) : n_(n), probs_(n * n, 0.0) {
        for (std::size_t i = 0; i < n; ++i) probs_[i * n + i] = 1.0;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return probs_[i * n_ + j]; }
    const double* row(std::size_t i) const { return &probs_[i * n_]; }

    void set(std::size_t i, std::size_t j, double p) {
        probs_[i * n_ + j] = p;
        probs_[j * n_ + i] = p;
    }

private:
    std::size_t n_;
    std::vector<double> probs_;
};

/// For samples carrying integer multiplicities the entries are formed as
/// count / total, so they reproduce pairwise draw frequencies exactly.
inline PSMatrix compute_psm(const PartitionSample& sample) {
    const std::size_t n = sample.items();
    PSMatrix psm(n);
    std::vector<std::vector<std::size_t>> members;
    auto for_each_pair = [&](const Partition& c, auto&& add) {
        members.assign(static_cast<std::size_t>(c.num_clusters()), {});
        for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(c.index(i))].push_back(i);
        for (const auto& m : members)
            for (std::size_t a = 0; a < m.size(); ++a)
                for (std::size_t b = a + 1; b < m.size(); ++b) add(m[a], m[b]);
    };

    if (sample.has_counts()) {
        std::vector<std::uint64_t> together(n * n, 0);
        for (std::size_t s = 0; s < sample.size(); ++s)
            for_each_pair(sample[s], [&](std::size_t a, std::size_t b) { together[a * n + b] += sample.counts()[s]; });
        const double total = static_cast<double>(sample.total_count());
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) psm.set(a, b, static_cast<double>(together[a * n + b]) / total);
    } else {
        std::vector<double> together(n * n, 0.0);
        for (std::size_t s = 0; s < sample.size(); ++s)
            for_each_pair(sample[s], [&](std::size_t a, std::size_t b) { together[a * n + b] += sample.weight(s); });
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) psm.set(a, b, std::min(1.0, together[a * n + b]));
    }
    return psm;
}

inline void require_same_size(const Partition& z, const PSMatrix& psm) {
    if (z.size() != psm.size()) throw std::invalid_argument("partition and similarity matrix dimensions differ");
}

/// Expected Binder loss evaluated through the similarity matrix,
/// (1/N^2) sum_{n<m} [ 1(z_n = z_m)(1 - p_nm) + 1(z_n != z_m) p_nm ].
inline double binder_epl_from_psm(const Partition& z, const PSMatrix& psm) {
    require_same_size(z, psm);
    const std::size_t n = z.size();
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double* p = psm.row(a);
        for (std::size_t b = a + 1; b < n; ++b) total += z[a] == z[b] ? 1.0 - p[b] : p[b];
    }
    return total / (static_cast<double>(n) * static_cast<double>(n));
}

namespace detail {

// Per item: sum of p over the item's own cluster in z.
inline std::vector<double> within_cluster_mass(const Partition& z, const PSMatrix& psm) {
    const std::size_t n = z.size();
    std::vector<double> mass(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const double* p = psm.row(a);
        for (std::size_t b = 0; b < n; ++b)
            if (z[a] == z[b]) mass[a] += p[b];
    }
    return mass;
}

} // namespace detail

/// The part of the VI lower bound that depends on z:
/// (1/N) sum_n [ ln |z(n)| - 2 ln sum_{m in z(n)} p_nm ].
inline double vi_lb_z_part(const Partition& z, const PSMatrix& psm) {
    require_same_size(z, psm);
    const auto mass = detail::within_cluster_mass(z, psm);
    double total = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a)
        total += std::log(static_cast<double>(z.cluster_sizes()[static_cast<std::size_t>(z.index(a))])) -
                 2.0 * std::log(mass[a]);
    return total / static_cast<double>(z.size());
}

/// Sample average of the exact counterpart of vi_lb_z_part, with the
/// indicator 1(c_n = c_m) in place of p_nm. Jensen's inequality makes this
/// an upper bound on vi_lb_z_part for the similarity matrix of the same sample.
inline double vi_exact_z_part(const Partition& z, const PartitionSample& sample) {
    if (z.size() != sample.items()) throw std::invalid_argument("partition length mismatch");
    const double n = static_cast<double>(z.size());
    double rows = 0.0;
    for (std::size_t size : z.cluster_sizes()) rows += detail::xlogx(static_cast<double>(size));
    double total = 0.0;
    for (std::size_t s = 0; s < sample.size(); ++s) {
        const auto t = contingency(z, sample[s]);
        double cells = 0.0;
        for (std::size_t c : t.counts()) cells += detail::xlogx(static_cast<double>(c));
        total += sample.weight(s) * (rows - 2.0 * cells) / n;
    }
    return total;
}

/// Lower bound on the expected VI that needs only the similarity matrix:
/// (1/N) sum_n [ ln |z(n)| + ln sum_m p_nm - 2 ln sum_{m in z(n)} p_nm ].
/// The middle term does not depend on z but is always included.
inline double vi_lower_bound(const Partition& z, const PSMatrix& psm) {
    require_same_size(z, psm);
    double constant = 0.0;
    for (std::size_t a = 0; a < psm.size(); ++a) {
        double r = 0.0;
        const double* p = psm.row(a);
        for (std::size_t b = 0; b < psm.size(); ++b) r += p[b];
        constant += std::log(r);
    }
    return vi_lb_z_part(z, psm) + constant / static_cast<double>(z.size());
}

/// Greedy-search state for vi_lower_bound. Keeps, for every item, the
/// similarity mass it has towards each cluster, and per-cluster sums of
/// the bound's terms, so a move costs O(|source| + |target|) to evaluate
/// and O(N) to apply.
class ViLbObjective {
public:
    ViLbObjective(const PSMatrix& psm, int max_clusters)
        : psm_(&psm), n_(psm.size()),
          cap_(max_clusters <= 0 ? static_cast<int>(psm.size()) : std::min<int>(max_clusters, static_cast<int>(psm.size()))) {
        for (std::size_t a = 0; a < n_; ++a) {
            double r = 0.0;
            for (std::size_t b = 0; b < n_; ++b) r += psm(a, b);
            constant_ += std::log(r);
        }
    }

    std::size_t items() const noexcept { return n_; }
    int num_clusters() const noexcept { return static_cast<int>(members_.size()); }
    int cluster_of(std::size_t i) const { return labels_[i]; }
    std::size_t cluster_size(int c) const { return members_[static_cast<std::size_t>(c)].size(); }
    std::vector<int> labels() const { return labels_; }
    double value() const noexcept { return value_; }

    void reset(std::vector<int> labels) {
        if (labels.size() != n_) throw std::invalid_argument("partition length mismatch");
        labels_ = std::move(labels);
        int k = 0;
        for (int l : labels_) k = std::max(k, l + 1);
        if (k > cap_) throw std::invalid_argument("initial partition exceeds max_clusters");
        members_.assign(static_cast<std::size_t>(k), {});
        for (std::size_t i = 0; i < n_; ++i) members_[static_cast<std::size_t>(labels_[i])].push_back(i);
        resync();
    }

    double value_if_moved(std::size_t m, int target) const {
        const int src = labels_[m];
        if (target == src) return value_;
        const double* pm = psm_->row(m);
        const auto& from = members_[static_cast<std::size_t>(src)];

        double src_after = 0.0;
        if (from.size() > 1) {
            const double log_size = std::log(static_cast<double>(from.size() - 1));
            for (std::size_t i : from)
                if (i != m) src_after += log_size - 2.0 * std::log(mass(i, src) - pm[i]);
        }

        double tgt_before = 0.0;
        double tgt_after = 0.0;
        if (target < num_clusters()) {
            const auto& to = members_[static_cast<std::size_t>(target)];
            tgt_before = term_[static_cast<std::size_t>(target)];
            const double log_size = std::log(static_cast<double>(to.size() + 1));
            for (std::size_t i : to) tgt_after += log_size - 2.0 * std::log(mass(i, target) + pm[i]);
            tgt_after += log_size - 2.0 * std::log(mass(m, target) + pm[m]);
        } else {
            tgt_after = -2.0 * std::log(pm[m]);
        }
        const double delta = src_after - term_[static_cast<std::size_t>(src)] + tgt_after - tgt_before;
        return value_ + delta / static_cast<double>(n_);
    }

    void move(std::size_t m, int target) {
        const int src = labels_[m];
        if (target == src) return;
        auto& from = members_[static_cast<std::size_t>(src)];
        if (target >= num_clusters()) {
            if (from.size() == 1 || num_clusters() >= cap_) return;
            target = num_clusters();
            members_.emplace_back();
            term_.push_back(0.0);
            for (std::size_t i = 0; i < n_; ++i) mass_[i].push_back(0.0);
        }
        const double* pm = psm_->row(m);
        for (std::size_t i = 0; i < n_; ++i) {
            mass(i, src) -= pm[i];
            mass(i, target) += pm[i];
        }
        auto& src_members = members_[static_cast<std::size_t>(src)];
        src_members.erase(std::find(src_members.begin(), src_members.end(), m));
        members_[static_cast<std::size_t>(target)].push_back(m);
        labels_[m] = target;
        term_[static_cast<std::size_t>(src)] = cluster_term(src);
        term_[static_cast<std::size_t>(target)] = cluster_term(target);
        if (src_members.empty()) remove_cluster(src);
        value_ = current_value();
    }

    void resync() {
        const std::size_t k = members_.size();
        mass_.assign(n_, std::vector<double>(k, 0.0));
        for (std::size_t a = 0; a < n_; ++a) {
            const double* p = psm_->row(a);
            for (std::size_t b = 0; b < n_; ++b) mass_[a][static_cast<std::size_t>(labels_[b])] += p[b];
        }
        term_.assign(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) term_[c] = cluster_term(static_cast<int>(c));
        value_ = current_value();
    }

    double value_from_scratch() const { return vi_lower_bound(Partition(labels_), *psm_); }

private:
    double& mass(std::size_t i, int c) { return mass_[i][static_cast<std::size_t>(c)]; }
    double mass(std::size_t i, int c) const { return mass_[i][static_cast<std::size_t>(c)]; }

    double cluster_term(int c) const {
        const auto& mem = members_[static_cast<std::size_t>(c)];
        if (mem.empty()) return 0.0;
        const double log_size = std::log(static_cast<double>(mem.size()));
        double t = 0.0;
        for (std::size_t i : mem) t += log_size - 2.0 * std::log(mass(i, c));
        return t;
    }

    double current_value() const {
        double total = constant_;
        for (double t : term_) total += t;
        return total / static_cast<double>(n_);
    }

    void remove_cluster(int empty) {
        const std::size_t last = members_.size() - 1;
        const auto e = static_cast<std::size_t>(empty);
        if (e != last) {
            for (std::size_t i : members_[last]) labels_[i] = empty;
            members_[e] = std::move(members_[last]);
            term_[e] = term_[last];
            for (auto& row : mass_) row[e] = row[last];
        }
        members_.pop_back();
        term_.pop_back();
        for (auto& row : mass_) row.pop_back();
    }

    const PSMatrix* psm_;
    std::size_t n_;
    int cap_;
    double constant_ = 0.0;
    std::vector<int> labels_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<std::vector<double>> mass_; // [item][cluster]
    std::vector<double> term_;
    double value_ = 0.0;
};

/// Greedy minimizer of vi_lower_bound, with the same move scheme and tie
/// rules as greedy_minimize. OptResult::epl holds the bound's value.
inline OptResult minimize_vi_lb(const PSMatrix& psm, const GreedyConfig& cfg = {}) {
    const int cap = detail::resolve_max_clusters(cfg, psm.size());
    return greedy_search([&] { return ViLbObjective(psm, cap); }, cfg);
}

} // namespace bayesclust
