#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bayesclust {

/// Bell number B(n), the number of set partitions of n items (exact for n <= 25).
inline std::uint64_t bell_number(std::size_t n) {
    if (n > 25) throw std::overflow_error("bell number too large");
    // Bell triangle.
    std::vector<std::uint64_t> row{1};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (auto v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

/// Calls visit(labels) for every set partition of n items, as restricted-growth
/// strings with labels 1..K, in lexicographic order. Returns the number visited.
template <class Visit>
std::uint64_t for_each_partition(std::size_t n, Visit&& visit) {
    if (n == 0) return 0;
    std::vector<int> labels(n, 1);
    // prefix_max[i] = max(labels[0..i])
    std::vector<int> prefix_max(n, 1);
    std::uint64_t visited = 0;
    while (true) {
        visit(static_cast<const std::vector<int>&>(labels));
        ++visited;
        // Rightmost position that can still be incremented.
        std::size_t i = n - 1;
        while (i > 0 && labels[i] > prefix_max[i - 1]) --i;
        if (i == 0) break;
        ++labels[i];
        prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            labels[j] = 1;
            prefix_max[j] = prefix_max[i];
        }
    }
    return visited;
}

} // namespace bayesclust
