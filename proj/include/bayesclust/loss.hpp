#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "partition.hpp"

namespace bayesclust {

/// Cross-classification counts n_ij of two partitions over the same items.
class ContingencyTable {
public:
    ContingencyTable(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), counts_(rows * cols, 0), row_sums_(rows, 0), col_sums_(cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t total() const noexcept { return total_; }

    std::size_t operator()(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
    std::size_t row_sum(std::size_t i) const { return row_sums_[i]; }
    std::size_t col_sum(std::size_t j) const { return col_sums_[j]; }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }

    void add(std::size_t i, std::size_t j) {
        ++counts_[i * cols_ + j];
        ++row_sums_[i];
        ++col_sums_[j];
        ++total_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> row_sums_;
    std::vector<std::size_t> col_sums_;
    std::size_t total_ = 0;
};

inline void require_same_size(const Partition& a, const Partition& z) {
    if (a.size() != z.size()) throw std::invalid_argument("partition length mismatch");
}

/// Single O(N) pass; dense K_a x K_z storage.
inline ContingencyTable contingency(const Partition& a, const Partition& z) {
    require_same_size(a, z);
    ContingencyTable table(static_cast<std::size_t>(a.num_clusters()), static_cast<std::size_t>(z.num_clusters()));
    for (std::size_t n = 0; n < a.size(); ++n)
        table.add(static_cast<std::size_t>(a.index(n)), static_cast<std::size_t>(z.index(n)));
    return table;
}

enum class LossKind { Binder, VI, NVI, NID };

inline constexpr std::array<LossKind, 4> all_loss_kinds{LossKind::Binder, LossKind::VI, LossKind::NVI,
                                                        LossKind::NID};

constexpr std::string_view to_string(LossKind kind) {
    switch (kind) {
    case LossKind::Binder: return "binder";
    case LossKind::VI: return "vi";
    case LossKind::NVI: return "nvi";
    case LossKind::NID: return "nid";
    }
    return "?";
}

inline std::optional<LossKind> parse_loss_kind(std::string_view name) {
    for (LossKind k : all_loss_kinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Every loss here is a function of three sums over the contingency table:
/// g applied to row totals, column totals and cells, where g(x) = x^2 for
/// Binder and g(x) = x ln x for the entropy-based losses.
constexpr bool uses_squares(LossKind kind) { return kind == LossKind::Binder; }

inline double cell_term(LossKind kind, double x) { return uses_squares(kind) ? x * x : xlogx(x); }

/// g(0..n) lookup, so incremental updates never call log.
inline std::vector<double> cell_term_table(LossKind kind, std::size_t n) {
    std::vector<double> out(n + 2);
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = cell_term(kind, static_cast<double>(x));
    return out;
}

struct TableSums {
    double rows = 0.0;
    double cols = 0.0;
    double cells = 0.0;
    int row_clusters = 0;
    int col_clusters = 0;
    double n = 0.0;
};

// Entropy (natural log) of a margin whose g-sum is `sum`; exactly 0 for one cluster.
inline double margin_entropy(double sum, int clusters, double n) {
    return clusters <= 1 ? 0.0 : std::log(n) - sum / n;
}

inline double loss_from_sums(LossKind kind, const TableSums& s) {
    const double disagreement = s.rows + s.cols - 2.0 * s.cells;
    switch (kind) {
    case LossKind::Binder: return std::max(0.0, disagreement / (2.0 * s.n * s.n));
    case LossKind::VI: return std::max(0.0, disagreement / s.n);
    case LossKind::NVI: {
        // 0/0 when both partitions are a single cluster; defined as 0.
        if (s.row_clusters <= 1 && s.col_clusters <= 1) return 0.0;
        const double joint = std::log(s.n) - s.cells / s.n;
        return std::clamp(std::max(0.0, disagreement / s.n) / joint, 0.0, 1.0);
    }
    case LossKind::NID: {
        if (s.row_clusters <= 1 && s.col_clusters <= 1) return 0.0;
        const double hr = margin_entropy(s.rows, s.row_clusters, s.n);
        const double hc = margin_entropy(s.cols, s.col_clusters, s.n);
        const double joint = std::log(s.n) - s.cells / s.n;
        const double mutual = hr + hc - joint;
        return std::clamp(1.0 - mutual / std::max(hr, hc), 0.0, 1.0);
    }
    }
    return 0.0;
}

inline TableSums table_sums(const ContingencyTable& t, LossKind kind) {
    TableSums s;
    s.n = static_cast<double>(t.total());
    s.row_clusters = static_cast<int>(t.rows());
    s.col_clusters = static_cast<int>(t.cols());
    for (std::size_t i = 0; i < t.rows(); ++i) s.rows += cell_term(kind, static_cast<double>(t.row_sum(i)));
    for (std::size_t j = 0; j < t.cols(); ++j) s.cols += cell_term(kind, static_cast<double>(t.col_sum(j)));
    for (std::size_t c : t.counts()) s.cells += cell_term(kind, static_cast<double>(c));
    return s;
}

} // namespace detail

/// Loss between two partitions computed from their contingency table.
///
///   Binder = (sum n_i+^2 + sum n_+j^2 - 2 sum n_ij^2) / (2 N^2)
///   VI     = 2 H(a,z) - H(a) - H(z)
///   NVI    = VI / H(a,z)                 (0 when H(a,z) = 0)
///   NID    = 1 - I(a,z) / max(H(a),H(z)) (0 when both entropies are 0)
///
/// Entropies use natural logarithms with 0 log 0 = 0. Divide VI by ln 2 to
/// compare with base-2 implementations.
inline double loss(const ContingencyTable& table, LossKind kind) {
    return detail::loss_from_sums(kind, detail::table_sums(table, kind));
}

inline double loss(const Partition& a, const Partition& z, LossKind kind) { return loss(contingency(a, z), kind); }

/// Number of unordered item pairs co-clustered in exactly one of a, z.
inline std::uint64_t binder_disagreements(const Partition& a, const Partition& z) {
    const auto t = contingency(a, z);
    std::uint64_t rows = 0, cols = 0, cells = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) rows += std::uint64_t(t.row_sum(i)) * t.row_sum(i);
    for (std::size_t j = 0; j < t.cols(); ++j) cols += std::uint64_t(t.col_sum(j)) * t.col_sum(j);
    for (std::size_t c : t.counts()) cells += std::uint64_t(c) * c;
    return (rows + cols - 2 * cells) / 2;
}

} // namespace bayesclust
