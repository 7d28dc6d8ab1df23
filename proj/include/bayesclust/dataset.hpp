#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "partition.hpp"

namespace bayesclust {

/// N x D real matrix, row-major, one point per row.
class Dataset {
public:
    Dataset(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("dataset must have at least one row and column");
        if (values_.size() != rows_ * cols_) throw std::invalid_argument("dataset size does not match its shape");
        for (double v : values_)
            if (!std::isfinite(v)) throw std::invalid_argument("dataset entries must be finite");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t d) const { return values_[i * cols_ + d]; }
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

/// n i.i.d. points uniform on [-1, 1] x [-1, 1].
inline Dataset gen_uniform_square(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("point count must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<double> values(2 * n);
    for (auto& v : values) v = coord(rng);
    return Dataset(n, 2, std::move(values));
}

struct LabeledDataset {
    Dataset data;
    Partition labels;
};

/// Isotropic Gaussian mixture draws; `centers` is K x D, `sds` and `weights` have length K.
inline LabeledDataset gen_gmm_data(std::size_t n, const std::vector<std::vector<double>>& centers,
                                   const std::vector<double>& sds, const std::vector<double>& weights,
                                   std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("point count must be positive");
    if (centers.empty()) throw std::invalid_argument("at least one component is required");
    const std::size_t k = centers.size();
    const std::size_t dim = centers.front().size();
    if (dim == 0) throw std::invalid_argument("centers must have at least one dimension");
    for (const auto& c : centers)
        if (c.size() != dim) throw std::invalid_argument("center dimension mismatch");
    if (sds.size() != k || weights.size() != k) throw std::invalid_argument("component parameter count mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (!(sds[j] > 0.0)) throw std::invalid_argument("standard deviations must be positive");
        if (!(weights[j] >= 0.0)) throw std::invalid_argument("weights must be non-negative");
        total += weights[j];
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");

    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> values(n * dim);
    std::vector<std::size_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = pick(rng);
        raw[i] = j;
        for (std::size_t d = 0; d < dim; ++d) values[i * dim + d] = centers[j][d] + sds[j] * noise(rng);
    }
    return {Dataset(n, dim, std::move(values)), Partition(raw)};
}

} // namespace bayesclust
