#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "enumerate.hpp"
#include "errors.hpp"
#include "greedy.hpp"
#include "loss.hpp"
#include "sample.hpp"

namespace bayesclust {

namespace detail {

// Column g-sum of a draw: depends only on its cluster sizes.
inline double margin_sum(const Partition& p, LossKind kind) {
    double s = 0.0;
    for (std::size_t size : p.cluster_sizes()) s += cell_term(kind, static_cast<double>(size));
    return s;
}

} // namespace detail

/// Expected posterior loss sum_s w_s L(z, c_s). Each draw costs O(N): cells
/// are accumulated in a reused dense buffer and only touched cells are read
/// back, so the K_z x K_s table is never scanned.
inline double expected_loss(const Partition& z, const PartitionSample& sample, LossKind kind) {
    if (z.size() != sample.items()) throw std::invalid_argument("partition length mismatch");
    const std::size_t n = z.size();
    const std::size_t kz = static_cast<std::size_t>(z.num_clusters());
    std::size_t max_ks = 0;
    for (const auto& c : sample.draws()) max_ks = std::max(max_ks, static_cast<std::size_t>(c.num_clusters()));

    const double rows = detail::margin_sum(z, kind);
    constexpr std::size_t dense_limit = std::size_t{1} << 24;
    const bool dense = kz * max_ks <= dense_limit;
    std::vector<std::uint32_t> buffer(dense ? kz * max_ks : 0, 0);
    std::unordered_map<std::uint64_t, std::uint32_t> sparse;

    double total = 0.0;
    for (std::size_t s = 0; s < sample.size(); ++s) {
        const Partition& c = sample[s];
        const std::size_t ks = static_cast<std::size_t>(c.num_clusters());
        double cells = 0.0;
        if (dense) {
            for (std::size_t i = 0; i < n; ++i) ++buffer[static_cast<std::size_t>(z.index(i)) * ks + c.index(i)];
            for (std::size_t i = 0; i < n; ++i) {
                auto& cell = buffer[static_cast<std::size_t>(z.index(i)) * ks + c.index(i)];
                if (cell) {
                    cells += detail::cell_term(kind, cell);
                    cell = 0;
                }
            }
        } else {
            sparse.clear();
            for (std::size_t i = 0; i < n; ++i) ++sparse[static_cast<std::uint64_t>(z.index(i)) * ks + c.index(i)];
            for (const auto& [key, count] : sparse) cells += detail::cell_term(kind, count);
        }
        const detail::TableSums sums{rows, detail::margin_sum(c, kind), cells, z.num_clusters(), c.num_clusters(),
                                     static_cast<double>(n)};
        total += sample.weight(s) * detail::loss_from_sums(kind, sums);
    }
    return total;
}

/// Greedy-search state for the expected posterior loss. For every draw it
/// keeps the contingency counts between the candidate and that draw, so a
/// single-item move is evaluated in O(S) and applied in O(S) (plus O(N + S K_s)
/// when a cluster empties and is deleted).
///
/// `scale` multiplies the objective; positive scaling must not change any
/// decision the search makes.
class EplObjective {
public:
    EplObjective(const PartitionSample& sample, LossKind kind, int max_clusters, double scale = 1.0)
        : sample_(&sample), kind_(kind), scale_(scale), n_(sample.items()),
          cap_(max_clusters <= 0 ? static_cast<int>(sample.items())
                                 : std::min<int>(max_clusters, static_cast<int>(sample.items()))),
          g_(detail::cell_term_table(kind, sample.items())) {
        const std::size_t draws = sample.size();
        draw_labels_.resize(n_ * draws);
        draw_k_.resize(draws);
        offset_.resize(draws);
        col_sum_.resize(draws);
        std::size_t off = 0;
        for (std::size_t s = 0; s < draws; ++s) {
            const Partition& c = sample[s];
            draw_k_[s] = c.num_clusters();
            offset_[s] = off;
            off += static_cast<std::size_t>(cap_) * static_cast<std::size_t>(draw_k_[s]);
            col_sum_[s] = detail::margin_sum(c, kind);
            for (std::size_t i = 0; i < n_; ++i) draw_labels_[i * draws + s] = c.index(i);
        }
        counts_.assign(off, 0);
        cell_sum_.assign(draws, 0.0);
    }

    std::size_t items() const noexcept { return n_; }
    int num_clusters() const noexcept { return k_; }
    int cluster_of(std::size_t i) const { return labels_[i]; }
    std::size_t cluster_size(int c) const { return static_cast<std::size_t>(sizes_[static_cast<std::size_t>(c)]); }
    std::vector<int> labels() const { return labels_; }
    double value() const noexcept { return value_; }

    void reset(std::vector<int> labels) {
        if (labels.size() != n_) throw std::invalid_argument("partition length mismatch");
        labels_ = std::move(labels);
        k_ = 0;
        for (int l : labels_) k_ = std::max(k_, l + 1);
        if (k_ > cap_) throw std::invalid_argument("initial partition exceeds max_clusters");
        sizes_.assign(static_cast<std::size_t>(cap_), 0);
        std::fill(counts_.begin(), counts_.end(), 0);
        const std::size_t draws = sample_->size();
        for (std::size_t i = 0; i < n_; ++i) {
            const int c = labels_[i];
            ++sizes_[static_cast<std::size_t>(c)];
            for (std::size_t s = 0; s < draws; ++s) ++cell(s, c, draw_labels_[i * draws + s]);
        }
        resync();
    }

    /// Objective after moving item i to cluster `target` (target == K opens a new cluster).
    double value_if_moved(std::size_t i, int target) const {
        const int src = labels_[i];
        if (target == src) return value_;
        const int n_src = sizes_[static_cast<std::size_t>(src)];
        const int n_tgt = target < k_ ? sizes_[static_cast<std::size_t>(target)] : 0;
        const double rows = rows_sum_ + g_[n_src - 1] - g_[n_src] + g_[n_tgt + 1] - g_[n_tgt];
        const int k_after = k_ - (n_src == 1 ? 1 : 0) + (target >= k_ ? 1 : 0);
        const std::size_t draws = sample_->size();
        const int* row = &draw_labels_[i * draws];
        double total = 0.0;
        for (std::size_t s = 0; s < draws; ++s) {
            const int j = row[s];
            const int a = cell(s, src, j);
            const int b = target < k_ ? cell(s, target, j) : 0;
            const double cells = cell_sum_[s] + g_[a - 1] - g_[a] + g_[b + 1] - g_[b];
            total += sample_->weight(s) * draw_loss(s, rows, cells, k_after);
        }
        return scale_ * total;
    }

    void move(std::size_t i, int target) {
        const int src = labels_[i];
        if (target == src) return;
        const int n_src = sizes_[static_cast<std::size_t>(src)];
        if (target >= k_) {
            if (n_src == 1 || k_ >= cap_) return;
            target = k_++;
        }
        const int n_tgt = sizes_[static_cast<std::size_t>(target)];
        rows_sum_ += g_[n_src - 1] - g_[n_src] + g_[n_tgt + 1] - g_[n_tgt];
        const std::size_t draws = sample_->size();
        for (std::size_t s = 0; s < draws; ++s) {
            const int j = draw_labels_[i * draws + s];
            int& a = cell(s, src, j);
            int& b = cell(s, target, j);
            cell_sum_[s] += g_[a - 1] - g_[a] + g_[b + 1] - g_[b];
            --a;
            ++b;
        }
        --sizes_[static_cast<std::size_t>(src)];
        ++sizes_[static_cast<std::size_t>(target)];
        labels_[i] = target;
        if (sizes_[static_cast<std::size_t>(src)] == 0) remove_cluster(src);
        value_ = current_value();
    }

    /// Recomputes the cached sums from the count tables, discarding rounding drift.
    void resync() {
        rows_sum_ = 0.0;
        for (int c = 0; c < k_; ++c) rows_sum_ += g_[sizes_[static_cast<std::size_t>(c)]];
        for (std::size_t s = 0; s < sample_->size(); ++s) {
            double sum = 0.0;
            for (int c = 0; c < k_; ++c)
                for (int j = 0; j < draw_k_[s]; ++j) sum += g_[cell(s, c, j)];
            cell_sum_[s] = sum;
        }
        value_ = current_value();
    }

    double value_from_scratch() const { return scale_ * expected_loss(Partition(labels_), *sample_, kind_); }

private:
    int& cell(std::size_t s, int c, int j) {
        return counts_[offset_[s] + static_cast<std::size_t>(c) * static_cast<std::size_t>(draw_k_[s]) +
                       static_cast<std::size_t>(j)];
    }
    int cell(std::size_t s, int c, int j) const {
        return counts_[offset_[s] + static_cast<std::size_t>(c) * static_cast<std::size_t>(draw_k_[s]) +
                       static_cast<std::size_t>(j)];
    }

    double draw_loss(std::size_t s, double rows, double cells, int k) const {
        const detail::TableSums sums{rows, col_sum_[s], cells, k, draw_k_[s], static_cast<double>(n_)};
        return detail::loss_from_sums(kind_, sums);
    }

    double current_value() const {
        double total = 0.0;
        for (std::size_t s = 0; s < sample_->size(); ++s)
            total += sample_->weight(s) * draw_loss(s, rows_sum_, cell_sum_[s], k_);
        return scale_ * total;
    }

    // Moves the last cluster into the emptied slot so ids stay contiguous.
    void remove_cluster(int empty) {
        const int last = k_ - 1;
        if (empty != last) {
            for (auto& l : labels_)
                if (l == last) l = empty;
            sizes_[static_cast<std::size_t>(empty)] = sizes_[static_cast<std::size_t>(last)];
            for (std::size_t s = 0; s < sample_->size(); ++s)
                for (int j = 0; j < draw_k_[s]; ++j) {
                    cell(s, empty, j) = cell(s, last, j);
                    cell(s, last, j) = 0;
                }
        }
        sizes_[static_cast<std::size_t>(last)] = 0;
        --k_;
    }

    const PartitionSample* sample_;
    LossKind kind_;
    double scale_;
    std::size_t n_;
    int cap_;
    std::vector<double> g_;

    std::vector<int> labels_;
    std::vector<int> sizes_;
    int k_ = 0;
    double rows_sum_ = 0.0;
    double value_ = 0.0;

    std::vector<int> draw_labels_; // item-major: [i * S + s]
    std::vector<int> draw_k_;
    std::vector<std::size_t> offset_;
    std::vector<double> col_sum_;
    std::vector<double> cell_sum_;
    std::vector<int> counts_; // per draw: cap x K_s, row-major
};

/// Bayes partition estimate: greedy minimization of the expected posterior loss.
/// The sample is deduplicated internally; the reported EPL is recomputed
/// from scratch against the sample as given.
inline OptResult greedy_minimize(const PartitionSample& sample, LossKind kind, const GreedyConfig& cfg = {}) {
    if (cfg.max_clusters < 0) throw std::invalid_argument("max_clusters must be at least 1");
    const PartitionSample distinct = sample.deduplicated();
    const int cap = detail::resolve_max_clusters(cfg, sample.items());
    OptResult result = greedy_search([&] { return EplObjective(distinct, kind, cap); }, cfg);
    result.epl = expected_loss(result.partition, sample, kind);
    return result;
}

/// Global minimizer by enumerating all Bell(N) partitions. Ties go to the
/// lexicographically smallest canonical label vector.
inline OptResult exhaustive_minimize(const PartitionSample& sample, LossKind kind, std::size_t limit = 10) {
    if (sample.items() > limit) throw refused_error("exhaustive search refused");
    const PartitionSample distinct = sample.deduplicated();
    std::optional<Partition> best;
    double best_value = 0.0;
    for_each_partition(sample.items(), [&](const std::vector<int>& labels) {
        Partition z(labels);
        const double v = expected_loss(z, distinct, kind);
        if (!best || detail::improves(v, best_value)) {
            best = std::move(z);
            best_value = v;
        }
    });
    OptResult result;
    result.partition = *best;
    result.epl = expected_loss(result.partition, sample, kind);
    result.trace = {result.epl};
    result.restarts_agreeing = 1;
    return result;
}

} // namespace bayesclust
