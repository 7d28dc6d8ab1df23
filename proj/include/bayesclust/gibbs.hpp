#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "dataset.hpp"
#include "sample.hpp"

namespace bayesclust {

/// Finite symmetric Gaussian mixture with diagonal covariance and an
/// independent Normal-Inverse-Gamma prior per dimension:
///   sigma^2 ~ IG(shape, rate),  mu | sigma^2 ~ N(mean, sigma^2 / scale).
struct GibbsConfig {
    int components = 10;
    double dirichlet_alpha = 1.0;
    /// Prior mean per dimension; a single value is broadcast.
    std::vector<double> prior_mean{0.0};
    double prior_scale = 0.1;
    double prior_shape = 2.0;
    double prior_rate = 0.5;
    int iters = 12000;
    int burnin = 2000;
    int thin = 10;
    std::uint64_t seed = 1;
    /// Zero-based initial component per item; random when absent.
    std::optional<std::vector<int>> init_labels;

    void validate(std::size_t dim) const {
        if (components < 1) throw std::invalid_argument("component count must be positive");
        if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("dirichlet alpha must be positive");
        if (!(prior_scale > 0.0) || !(prior_shape > 0.0) || !(prior_rate > 0.0))
            throw std::invalid_argument("prior scale, shape and rate must be positive");
        if (prior_mean.size() != 1 && prior_mean.size() != dim)
            throw std::invalid_argument("prior mean dimension mismatch");
        if (burnin < 0 || iters <= burnin) throw std::invalid_argument("iters must exceed burnin");
        if (thin < 1) throw std::invalid_argument("thin must be at least 1");
    }
};

/// Collapsed Gibbs sampler over component labels; weights and component
/// parameters are integrated out. The update of an item depends only on the
/// partition induced by the other items: occupied components are visited in
/// order of their smallest member, and all empty components act as a
/// single "new cluster" option. Relabeling the initial state therefore
/// leaves the trajectory of canonical partitions unchanged.
class CollapsedGmmGibbs {
public:
    CollapsedGmmGibbs(const Dataset& data, GibbsConfig cfg) : data_(&data), cfg_(std::move(cfg)) {
        const std::size_t n = data.rows();
        const std::size_t dim = data.cols();
        cfg_.validate(dim);
        if (cfg_.prior_mean.size() == 1) cfg_.prior_mean.assign(dim, cfg_.prior_mean.front());
        const auto k = static_cast<std::size_t>(cfg_.components);
        count_.assign(k, 0);
        sum_.assign(k * dim, 0.0);
        sumsq_.assign(k * dim, 0.0);
        members_.assign(k, {});

        // Student-t normalizer depends on the component size only.
        log_norm_.resize(n + 1);
        for (std::size_t m = 0; m <= n; ++m) {
            const double nu = 2.0 * cfg_.prior_shape + static_cast<double>(m);
            log_norm_[m] = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
        }

        rng_.seed(cfg_.seed);
        labels_.resize(n);
        if (cfg_.init_labels) {
            if (cfg_.init_labels->size() != n) throw std::invalid_argument("initial labels length mismatch");
            for (std::size_t i = 0; i < n; ++i) {
                const int l = (*cfg_.init_labels)[i];
                if (l < 0 || l >= cfg_.components) throw std::invalid_argument("initial label out of range");
                labels_[i] = l;
            }
        } else {
            std::uniform_int_distribution<int> pick(0, cfg_.components - 1);
            for (auto& l : labels_) l = pick(rng_);
        }
        for (std::size_t i = 0; i < n; ++i) add(i, labels_[i]);
    }

    const std::vector<int>& labels() const noexcept { return labels_; }
    Partition partition() const { return Partition(labels_); }

    /// log posterior-predictive density of point i under component c, with
    /// the component's current members (item i must not be among them).
    double log_predictive(std::size_t i, int c) const {
        const std::size_t dim = data_->cols();
        const auto cc = static_cast<std::size_t>(c);
        const std::size_t m = count_[cc];
        const double kappa_n = cfg_.prior_scale + static_cast<double>(m);
        const double shape_n = cfg_.prior_shape + 0.5 * static_cast<double>(m);
        const double nu = 2.0 * shape_n;
        double total = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double mu0 = cfg_.prior_mean[d];
            const double s = sum_[cc * dim + d];
            const double mean_n = (cfg_.prior_scale * mu0 + s) / kappa_n;
            const double rate_n = cfg_.prior_rate +
                                  0.5 * (sumsq_[cc * dim + d] + cfg_.prior_scale * mu0 * mu0 - kappa_n * mean_n * mean_n);
            const double scale2 = rate_n * (kappa_n + 1.0) / (shape_n * kappa_n);
            const double z = (*data_)(i, d) - mean_n;
            total += log_norm_[m] - 0.5 * std::log(scale2) - 0.5 * (nu + 1.0) * std::log1p(z * z / (nu * scale2));
        }
        return total;
    }

    /// Full conditional of item i over all K components given the others,
    /// proportional to (count_-i(k) + alpha/K) * predictive_k(x_i).
    std::vector<double> conditional(std::size_t i) {
        const int home = labels_[i];
        remove(i, home);
        std::vector<double> logw(static_cast<std::size_t>(cfg_.components));
        for (int c = 0; c < cfg_.components; ++c) logw[static_cast<std::size_t>(c)] = log_weight(i, c);
        add(i, home);
        const double top = *std::max_element(logw.begin(), logw.end());
        double z = 0.0;
        for (auto& w : logw) z += (w = std::exp(w - top));
        for (auto& w : logw) w /= z;
        return logw;
    }

    /// One systematic-scan sweep over all items.
    void sweep() {
        const std::size_t n = labels_.size();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<int> order;
        std::vector<double> logw;
        for (std::size_t i = 0; i < n; ++i) {
            remove(i, labels_[i]);
            order.clear();
            int empty = -1;
            for (int c = 0; c < cfg_.components; ++c) {
                if (count_[static_cast<std::size_t>(c)] > 0) order.push_back(c);
                else if (empty < 0) empty = c;
            }
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return *members_[static_cast<std::size_t>(a)].begin() < *members_[static_cast<std::size_t>(b)].begin();
            });
            logw.clear();
            for (int c : order) logw.push_back(log_weight(i, c));
            if (empty >= 0) {
                const auto free = static_cast<double>(cfg_.components) - static_cast<double>(order.size());
                logw.push_back(std::log(free) + log_weight(i, empty));
                order.push_back(empty);
            }
            const double top = *std::max_element(logw.begin(), logw.end());
            double z = 0.0;
            for (auto& w : logw) z += (w = std::exp(w - top));
            double u = unit(rng_) * z;
            int chosen = order.back();
            for (std::size_t k = 0; k < order.size(); ++k) {
                if (u < logw[k]) {
                    chosen = order[k];
                    break;
                }
                u -= logw[k];
            }
            add(i, chosen);
        }
    }

private:
    double log_weight(std::size_t i, int c) const {
        const double prior = static_cast<double>(count_[static_cast<std::size_t>(c)]) +
                             cfg_.dirichlet_alpha / static_cast<double>(cfg_.components);
        return std::log(prior) + log_predictive(i, c);
    }

    void add(std::size_t i, int c) {
        const std::size_t dim = data_->cols();
        const auto cc = static_cast<std::size_t>(c);
        labels_[i] = c;
        ++count_[cc];
        members_[cc].insert(i);
        for (std::size_t d = 0; d < dim; ++d) {
            const double x = (*data_)(i, d);
            sum_[cc * dim + d] += x;
            sumsq_[cc * dim + d] += x * x;
        }
    }

    void remove(std::size_t i, int c) {
        const std::size_t dim = data_->cols();
        const auto cc = static_cast<std::size_t>(c);
        --count_[cc];
        members_[cc].erase(i);
        if (count_[cc] == 0) {
            // Reset exactly so an emptied component matches the prior.
            for (std::size_t d = 0; d < dim; ++d) sum_[cc * dim + d] = sumsq_[cc * dim + d] = 0.0;
            return;
        }
        for (std::size_t d = 0; d < dim; ++d) {
            const double x = (*data_)(i, d);
            sum_[cc * dim + d] -= x;
            sumsq_[cc * dim + d] -= x * x;
        }
    }

    const Dataset* data_;
    GibbsConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<int> labels_;
    std::vector<std::size_t> count_;
    std::vector<double> sum_;
    std::vector<double> sumsq_;
    std::vector<std::set<std::size_t>> members_;
    std::vector<double> log_norm_;
};

/// Runs the collapsed sampler and records the canonical partition after
/// every `thin`-th sweep past burn-in.
inline PartitionSample gibbs_gmm(const Dataset& data, const GibbsConfig& cfg) {
    CollapsedGmmGibbs sampler(data, cfg);
    std::vector<Partition> draws;
    draws.reserve(static_cast<std::size_t>((cfg.iters - cfg.burnin) / cfg.thin));
    for (int it = 1; it <= cfg.iters; ++it) {
        sampler.sweep();
        if (it > cfg.burnin && (it - cfg.burnin) % cfg.thin == 0) draws.push_back(sampler.partition());
    }
    if (draws.empty()) throw std::invalid_argument("no draws recorded; reduce thin or increase iters");
    return PartitionSample(std::move(draws));
}

} // namespace bayesclust
