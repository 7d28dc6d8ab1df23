#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "partition.hpp"

namespace bayesclust {

/// S posterior draws of partitions over the same N items, with weights.
///
/// Samples built from raw draws (or by deduplicating them) also remember an
/// integer multiplicity per draw, so weights are exactly count / total and
/// downstream frequency computations can stay in integer arithmetic.
class PartitionSample {
public:
    explicit PartitionSample(std::vector<Partition> draws)
        : draws_(std::move(draws)), counts_(draws_.size(), 1) {
        validate_draws();
        total_count_ = draws_.size();
        weights_.assign(draws_.size(), 1.0 / static_cast<double>(draws_.size()));
    }

    PartitionSample(std::vector<Partition> draws, std::vector<double> weights)
        : draws_(std::move(draws)), weights_(std::move(weights)) {
        validate_draws();
        if (weights_.size() != draws_.size()) throw std::invalid_argument("weight count does not match draw count");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("draw weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("draw weights must sum to 1");
        for (double& w : weights_) w /= total;
    }

    static PartitionSample from_counts(std::vector<Partition> draws, std::vector<std::uint64_t> counts) {
        if (counts.size() != draws.size()) throw std::invalid_argument("count vector does not match draw count");
        PartitionSample out(std::move(draws));
        out.counts_ = std::move(counts);
        out.total_count_ = 0;
        for (auto c : out.counts_) {
            if (c == 0) throw std::invalid_argument("draw counts must be positive");
            out.total_count_ += c;
        }
        for (std::size_t s = 0; s < out.weights_.size(); ++s)
            out.weights_[s] = static_cast<double>(out.counts_[s]) / static_cast<double>(out.total_count_);
        return out;
    }

    std::size_t size() const noexcept { return draws_.size(); }
    std::size_t items() const noexcept { return draws_.front().size(); }

    const Partition& operator[](std::size_t s) const { return draws_[s]; }
    const std::vector<Partition>& draws() const noexcept { return draws_; }
    double weight(std::size_t s) const { return weights_[s]; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// Integer multiplicities, empty when the sample was built from real-valued weights.
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::uint64_t total_count() const noexcept { return total_count_; }
    bool has_counts() const noexcept { return !counts_.empty(); }

    /// Distinct partitions in order of first appearance, weights summed.
    PartitionSample deduplicated() const {
        std::map<const Partition*, std::size_t, PtrLess> seen;
        std::vector<Partition> draws;
        std::vector<std::uint64_t> counts;
        std::vector<double> weights;
        for (std::size_t s = 0; s < draws_.size(); ++s) {
            auto [it, fresh] = seen.try_emplace(&draws_[s], draws.size());
            if (fresh) {
                draws.push_back(draws_[s]);
                counts.push_back(0);
                weights.push_back(0.0);
            }
            if (has_counts()) counts[it->second] += counts_[s];
            weights[it->second] += weights_[s];
        }
        if (has_counts()) return from_counts(std::move(draws), std::move(counts));
        return PartitionSample(std::move(draws), std::move(weights));
    }

private:
    struct PtrLess {
        bool operator()(const Partition* a, const Partition* b) const { return *a < *b; }
    };

    void validate_draws() const {
        if (draws_.empty()) throw std::invalid_argument("empty partition sample");
        for (const auto& d : draws_)
            if (d.size() != draws_.front().size()) throw std::invalid_argument("partition length mismatch");
    }

    std::vector<Partition> draws_;
    std::vector<double> weights_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_count_ = 0;
};

} // namespace bayesclust
