#pragma once

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bayesclust {

/// A set partition of N items in canonical (restricted-growth) form:
/// labels are 1..K and each new label first appears right after the
/// largest label seen so far. Two labelings of the same clustering
/// produce equal Partition objects.
class Partition {
public:
    using label_type = int;

    Partition() = default;

    /// Canonicalizes an arbitrary integer labeling.
    template <std::integral T>
    explicit Partition(std::span<const T> raw) { assign(raw); }

    template <std::integral T>
    explicit Partition(const std::vector<T>& raw) { assign(std::span<const T>(raw)); }

    Partition(std::initializer_list<int> raw) { assign(std::span<const int>(raw.begin(), raw.size())); }

    /// All items in one cluster.
    static Partition one_cluster(std::size_t n) { return Partition(std::vector<int>(n, 1)); }

    static Partition singletons(std::size_t n) {
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i) + 1;
        return Partition(labels);
    }

    std::size_t size() const noexcept { return labels_.size(); }
    int num_clusters() const noexcept { return static_cast<int>(sizes_.size()); }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<std::size_t>& cluster_sizes() const noexcept { return sizes_; }

    int operator[](std::size_t i) const { return labels_[i]; }

    /// Zero-based cluster index of item i.
    int index(std::size_t i) const { return labels_[i] - 1; }

    friend bool operator==(const Partition& a, const Partition& b) { return a.labels_ == b.labels_; }
    friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) {
        return a.labels_ <=> b.labels_;
    }

    std::string to_string() const {
        std::string out = "[";
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(labels_[i]);
        }
        return out + "]";
    }

private:
    template <std::integral T>
    void assign(std::span<const T> raw) {
        if (raw.empty()) throw std::invalid_argument("empty partition");
        labels_.resize(raw.size());
        sizes_.clear();
        std::unordered_map<T, int> relabel;
        relabel.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            auto [it, fresh] = relabel.try_emplace(raw[i], static_cast<int>(relabel.size()) + 1);
            if (fresh) sizes_.push_back(0);
            labels_[i] = it->second;
            ++sizes_[static_cast<std::size_t>(it->second - 1)];
        }
    }

    std::vector<int> labels_;
    std::vector<std::size_t> sizes_;
};

template <std::integral T>
Partition canonicalize(std::span<const T> raw) { return Partition(raw); }

template <std::integral T>
Partition canonicalize(const std::vector<T>& raw) { return Partition(raw); }

/// True when `labels` is already a restricted-growth string over 1..K.
template <std::integral T>
bool is_canonical(std::span<const T> labels) {
    T next = 1;
    for (T l : labels) {
        if (l < 1 || l > next) return false;
        if (l == next) ++next;
    }
    return !labels.empty();
}

} // namespace bayesclust
