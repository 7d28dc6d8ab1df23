#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sample.hpp"

namespace bayesclust {

/// A controlled multimodal posterior over partitions: a weighted set of
/// anchor partitions, perturbed by random single-item reassignments.
struct AnchorSpec {
    std::vector<Partition> anchors;
    std::vector<double> weights;
    /// Single-item reassignments applied to a perturbed draw.
    int flips = 0;
    /// Probability that a draw is perturbed; the rest are exact anchors.
    double noise_fraction = 1.0;

    void validate() const {
        if (anchors.empty()) throw std::invalid_argument("at least one anchor is required");
        if (weights.size() != anchors.size()) throw std::invalid_argument("anchor weight count mismatch");
        double total = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw std::invalid_argument("anchor weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("anchor weights must sum to 1");
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (anchors[a].size() != anchors.front().size()) throw std::invalid_argument("partition length mismatch");
            for (std::size_t b = 0; b < a; ++b)
                if (anchors[a] == anchors[b]) throw std::invalid_argument("anchors must be distinct");
        }
        if (flips < 0) throw std::invalid_argument("flips must be non-negative");
        if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0))
            throw std::invalid_argument("noise fraction must lie in [0, 1]");
    }
};

/// Each draw picks an anchor by weight; a perturbed draw then reassigns
/// `flips` uniformly chosen items to uniform labels in 1..K_anchor+1.
inline PartitionSample gen_multimodal_sample(const AnchorSpec& spec, std::size_t draws, std::uint64_t seed) {
    spec.validate();
    if (draws == 0) throw std::invalid_argument("draw count must be positive");
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
    std::bernoulli_distribution perturb(spec.noise_fraction);
    const std::size_t n = spec.anchors.front().size();
    std::uniform_int_distribution<std::size_t> item(0, n - 1);

    std::vector<Partition> out;
    out.reserve(draws);
    for (std::size_t s = 0; s < draws; ++s) {
        const Partition& anchor = spec.anchors[pick(rng)];
        if (spec.flips == 0 || !perturb(rng)) {
            out.push_back(anchor);
            continue;
        }
        std::vector<int> labels = anchor.labels();
        std::uniform_int_distribution<int> label(1, anchor.num_clusters() + 1);
        for (int f = 0; f < spec.flips; ++f) labels[item(rng)] = label(rng);
        out.emplace_back(labels);
    }
    return PartitionSample(std::move(out));
}

} // namespace bayesclust
