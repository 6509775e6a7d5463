// Mini-batch gradient ascent with inverse-time learning-rate decay, shared
// by the CRF and MEMM trainers. Gradient accumulation is data-parallel:
// workers compute per-item gradients on fixed chunks and a single
// accumulator merges them in worker order, so results are reproducible for
// a fixed seed and worker count.
#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "xlner/numeric.hpp"

namespace xlner {

struct TrainConfig {
    int epochs = 15;
    double learning_rate = 0.2;
    double decay = 0.01;  // lr_t = learning_rate / (1 + decay * t), t = update count
    double l2 = 1e-3;
    int batch_size = 8;
    std::uint64_t seed = 1;
    double tolerance = 1e-6;  // relative convergence tolerance on the objective
    int workers = 1;

    void check() const {
        if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
        if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be > 0");
        if (l2 < 0) throw std::invalid_argument("l2 must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    }
};

struct TrainReport {
    std::vector<double> epoch_objectives;  // regularized log-likelihood after each epoch
    bool converged = false;
};

/// Splits items [0, n) into `workers` contiguous chunks, runs
/// fn(item, local_grad) per item, and merges local gradients into grad_out
/// (which must be pre-sized and zeroed) in worker order.
template <typename PerItem>
void accumulate_gradients(const std::vector<std::size_t>& items, int workers, std::vector<double>& grad_out,
                          PerItem&& fn) {
    const std::size_t n = items.size();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(items[i], grad_out);
        return;
    }
    const int w = std::min<int>(workers, static_cast<int>(n));
    std::vector<std::vector<double>> partials(w, std::vector<double>(grad_out.size(), 0.0));
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int k = 0; k < w; ++k) {
        std::size_t lo = n * k / w, hi = n * (k + 1) / w;
        pool.emplace_back([&, k, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) fn(items[i], partials[k]);
        });
    }
    for (auto& t : pool) t.join();
    for (int k = 0; k < w; ++k)
        for (std::size_t j = 0; j < grad_out.size(); ++j) grad_out[j] += partials[k][j];
}

/// Maximizes (1/N) Σ_j ll_j − (l2/2N)·||w||² by mini-batch ascent.
/// batch_grad(item, grad) adds the per-item log-likelihood gradient;
/// objective() returns the current regularized log-likelihood (sum form)
/// and is evaluated once per epoch for convergence tracking.
template <typename BatchGrad, typename Objective>
TrainReport minibatch_ascend(std::vector<double>& weights, std::size_t data_size, const TrainConfig& cfg,
                             BatchGrad&& batch_grad, Objective&& objective, const char* what) {
    cfg.check();
    TrainReport report;
    std::vector<std::size_t> order(data_size);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(weights.size(), 0.0);
    long step = 0;
    double prev_obj = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < data_size; start += cfg.batch_size) {
            std::size_t stop = std::min(data_size, start + cfg.batch_size);
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
            std::fill(grad.begin(), grad.end(), 0.0);
            accumulate_gradients(batch, cfg.workers, grad, batch_grad);
            const double lr = cfg.learning_rate / (1.0 + cfg.decay * step);
            const double scale = lr / static_cast<double>(batch.size());
            const double shrink = lr * cfg.l2 / static_cast<double>(data_size);
            for (std::size_t j = 0; j < weights.size(); ++j)
                weights[j] += scale * grad[j] - shrink * weights[j];
            ++step;
        }
        double obj = objective();
        if (!std::isfinite(obj))
            throw std::runtime_error(std::string(what) + ": objective is not finite at epoch " +
                                     std::to_string(epoch + 1) + " (diverged; lower the learning rate)");
        report.epoch_objectives.push_back(obj);
        if (epoch > 0 && std::abs(obj - prev_obj) <= cfg.tolerance * std::max(1.0, std::abs(prev_obj))) {
            report.converged = true;
            break;
        }
        prev_obj = obj;
    }
    return report;
}

}  // namespace xlner
