// Copyright 2026 The qgt developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file train.hpp
 * The optimization loop: parameter initialization, Adam with a step
 * learning-rate schedule, mini-batch epochs, early stopping on validation
 * loss, the optional reward perturbation of the circuit parameters, and
 * the sample-efficiency sweep.
 *
 * Everything is deterministic for a fixed (seed, config, data): shuffles
 * use explicit Fisher-Yates draws, per-sample gradients are reduced in
 * sample order even when computed in parallel, and parameter
 * initialization fills tensors in one documented order.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "qgt/common.hpp"
#include "qgt/model.hpp"
#include "qgt/parallel.hpp"
#include "qgt/textgraph.hpp"

namespace qgt::train {

struct RlRegConfig {
    bool enabled = false;
    double sigma = 0.01;
    double step = 0.001;
};

struct TrainConfig {
    double lr = 0.01;
    int step_size = 5;    // scheduler epochs per decay
    double gamma = 0.7;   // scheduler decay factor
    int batch_size = 32;
    int max_epochs = 25;
    int patience = 5;     // early-stopping epochs without improvement
    double init_std = 0.01;
    std::uint64_t seed = 42;
    int max_tokens = 0;   // 0 = no cap
    RlRegConfig rl_reg;
    model::ModelConfig model;
    textgraph::GraphMode graph_mode = textgraph::GraphMode::complete();

    void validate() const {
        require_config(lr > 0, "lr must be > 0");
        require_config(gamma > 0 && gamma <= 1, "gamma must be in (0, 1]");
        require_config(step_size >= 1, "step_size must be >= 1");
        require_config(batch_size >= 1, "batch_size must be >= 1");
        require_config(max_epochs >= 1, "max_epochs must be >= 1");
        require_config(patience >= 1 && patience <= max_epochs,
                       "patience must be in [1, max_epochs]");
        require_config(init_std > 0, "init_std must be > 0");
        if (rl_reg.enabled) {
            require_config(rl_reg.sigma > 0 && rl_reg.step > 0,
                           "rl_reg sigma and step must be > 0");
        }
    }
};

/// lr * gamma^floor(epoch / step_size), epoch counted from 0.
inline double lr_at(const TrainConfig &config, int epoch) {
    require(epoch >= 0, "epoch must be >= 0");
    return config.lr *
           std::pow(config.gamma, double(epoch / config.step_size));
}

/// Circuit angles are N(0, init_std^2); classical weight matrices are
/// uniform in +-1/sqrt(fan_in); biases start at zero. Tensors fill
/// row-major in tensor_views order, so one seed pins every value.
inline model::ModelParams init_params(const TrainConfig &config,
                                      std::mt19937_64 &rng) {
    model::ModelParams params = model::make_params(config.model);
    std::normal_distribution<double> normal(0.0, config.init_std);
    auto fill_uniform = [&](Eigen::MatrixXd &m) {
        const double bound = 1.0 / std::sqrt(double(m.cols()));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = uniform(rng);
            }
        }
    };
    fill_uniform(params.proj_w);
    for (auto &layer : params.layers) {
        if (auto *q = std::get_if<model::QuantumAttentionParams>(&layer.attn)) {
            for (double &a : q->theta) {
                a = normal(rng);
            }
            for (double &a : q->phi) {
                a = normal(rng);
            }
        } else {
            auto &c = std::get<model::ClassicalAttentionParams>(layer.attn);
            fill_uniform(c.wq);
            fill_uniform(c.wk);
        }
        fill_uniform(layer.value_w);
    }
    fill_uniform(params.clf_w);
    return params;
}

inline model::ModelParams init_params(const TrainConfig &config) {
    std::mt19937_64 rng(config.seed);
    return init_params(config, rng);
}

struct TrainState {
    model::ModelParams params;
    model::ModelParams m; // Adam first moment, same shapes as params
    model::ModelParams v; // Adam second moment
    long step_count = 0;
    int epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;
    std::mt19937_64 rng;
    double lr_current = 0.0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One bias-corrected Adam update at state.lr_current.
inline void adam_step(TrainState &state, model::ModelParams &grads) {
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, double(state.step_count));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, double(state.step_count));
    auto pv = model::tensor_views(state.params);
    auto mv = model::tensor_views(state.m);
    auto vv = model::tensor_views(state.v);
    auto gv = model::tensor_views(grads);
    require(pv.size() == gv.size(), "gradient shapes do not match parameters");
    for (std::size_t t = 0; t < pv.size(); ++t) {
        require(pv[t].size() == gv[t].size(),
                "gradient tensor shape does not match parameter tensor");
        for (std::size_t i = 0; i < pv[t].size(); ++i) {
            const double g = gv[t][i];
            require(std::isfinite(g),
                    "non-finite gradient encountered; aborting epoch");
            double &m = mv[t][i];
            double &v = vv[t][i];
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            pv[t][i] -= state.lr_current * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }
    }
}

using GraphList = std::vector<textgraph::SentenceGraph>;

struct GraphSplits {
    GraphList train;
    GraphList val;
    GraphList test;
};

/// Tokenizes every sample and materializes its sentence graph once, so
/// epochs never re-touch text. max_tokens > 0 truncates long sentences.
inline GraphList build_graphs(const textgraph::Dataset &dataset,
                              const textgraph::EmbeddingTable &table,
                              const textgraph::GraphMode &mode,
                              int max_tokens = 0) {
    GraphList graphs;
    graphs.reserve(dataset.samples.size());
    for (const auto &[sentence, label] : dataset.samples) {
        std::vector<std::string> tokens = textgraph::tokenize(sentence);
        if (max_tokens > 0 &&
            tokens.size() > static_cast<std::size_t>(max_tokens)) {
            tokens.resize(static_cast<std::size_t>(max_tokens));
        }
        graphs.push_back(textgraph::build_graph(tokens, table, mode, label));
    }
    return graphs;
}

struct FitHooks {
    /// Called on every training-pass forward cache in sample order.
    /// Setting it forces per-sample work onto one thread.
    std::function<void(const model::ForwardCache &)> on_forward;
};

struct BatchResult {
    double loss_sum = 0.0;
    int correct = 0;
};

namespace detail {

struct SampleResult {
    double loss = 0.0;
    bool correct = false;
    model::ModelParams grads;
};

/// Forward + backward over one batch; gradients averaged over the batch
/// in sample order regardless of thread count.
inline BatchResult process_batch(const TrainConfig &config,
                                 const model::ModelParams &params,
                                 const GraphList &graphs,
                                 const std::vector<std::size_t> &order,
                                 std::size_t begin, std::size_t end,
                                 model::ModelParams &mean_grads,
                                 const FitHooks &hooks) {
    const std::size_t count = end - begin;
    std::vector<SampleResult> results(count);
    auto run_one = [&](std::size_t s) {
        const textgraph::SentenceGraph &graph = graphs[order[begin + s]];
        const model::ForwardCache cache =
            model::forward(config.model, params, graph);
        if (hooks.on_forward) {
            hooks.on_forward(cache);
        }
        results[s].loss = model::cross_entropy(cache.logits, graph.label);
        results[s].correct =
            model::argmax_lowest(cache.logits) == graph.label;
        results[s].grads =
            model::backward(config.model, params, cache, graph.label);
    };
    if (hooks.on_forward) {
        for (std::size_t s = 0; s < count; ++s) {
            run_one(s);
        }
    } else {
        parallel::parallel_for(count, run_one);
    }

    BatchResult batch;
    mean_grads = model::make_params(config.model);
    auto acc = model::tensor_views(mean_grads);
    for (std::size_t s = 0; s < count; ++s) {
        batch.loss_sum += results[s].loss;
        batch.correct += results[s].correct ? 1 : 0;
        auto gv = model::tensor_views(results[s].grads);
        for (std::size_t t = 0; t < acc.size(); ++t) {
            for (std::size_t i = 0; i < acc[t].size(); ++i) {
                acc[t][i] += gv[t][i];
            }
        }
    }
    const double inv = 1.0 / double(count);
    for (auto &view : acc) {
        for (double &g : view) {
            g *= inv;
        }
    }
    return batch;
}

} // namespace detail

struct EpochResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// One pass over the training split: seeded shuffle, batches of
/// batch_size (final partial batch kept), one adam_step per batch.
/// Reported loss/accuracy are the running values seen during the pass.
inline EpochResult train_epoch(const TrainConfig &config, TrainState &state,
                               const GraphList &graphs,
                               const FitHooks &hooks = {}) {
    require(!graphs.empty(), "training split is empty");
    const std::size_t n = graphs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(state.rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t begin = 0; begin < n;
         begin += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end =
            std::min(n, begin + static_cast<std::size_t>(config.batch_size));
        model::ModelParams mean_grads;
        const BatchResult batch = detail::process_batch(
            config, state.params, graphs, order, begin, end, mean_grads, hooks);
        loss_sum += batch.loss_sum;
        correct += batch.correct;
        adam_step(state, mean_grads);
    }
    return {loss_sum / double(n), double(correct) / double(n)};
}

/// Mean loss and argmax accuracy over a split (ties to the lower index).
inline EpochResult evaluate(const model::ModelConfig &config,
                            const model::ModelParams &params,
                            const GraphList &graphs) {
    require(!graphs.empty(), "evaluation split is empty");
    const std::size_t n = graphs.size();
    std::vector<double> losses(n);
    std::vector<char> correct(n);
    parallel::parallel_for(n, [&](std::size_t i) {
        const model::ForwardCache cache = model::forward(config, params, graphs[i]);
        losses[i] = model::cross_entropy(cache.logits, graphs[i].label);
        correct[i] = model::argmax_lowest(cache.logits) == graphs[i].label;
    });
    EpochResult result;
    for (std::size_t i = 0; i < n; ++i) {
        result.loss += losses[i];
        result.accuracy += correct[i] ? 1.0 : 0.0;
    }
    result.loss /= double(n);
    result.accuracy /= double(n);
    return result;
}

/// Score-function perturbation of the circuit angles, gated by config.
/// Reward of the perturbed angles is probed on the first held-in batch;
/// theta/phi move by step * (r_perturbed - r_base) / sigma * epsilon.
/// No-op for classical models.
inline void rl_regularize(const TrainConfig &config, TrainState &state,
                          const GraphList &train_graphs, double base_reward) {
    if (!config.rl_reg.enabled) {
        return;
    }
    bool has_quantum = false;
    for (const auto &layer : state.params.layers) {
        if (std::holds_alternative<model::QuantumAttentionParams>(layer.attn)) {
            has_quantum = true;
        }
    }
    if (!has_quantum) {
        return;
    }

    std::normal_distribution<double> normal(0.0, config.rl_reg.sigma);
    model::ModelParams perturbed = state.params;
    std::vector<std::vector<double>> epsilons;
    for (auto &layer : perturbed.layers) {
        if (auto *q = std::get_if<model::QuantumAttentionParams>(&layer.attn)) {
            for (auto *angles : {&q->theta, &q->phi}) {
                std::vector<double> eps(angles->size());
                for (std::size_t i = 0; i < eps.size(); ++i) {
                    eps[i] = normal(state.rng);
                    (*angles)[i] += eps[i];
                }
                epsilons.push_back(std::move(eps));
            }
        }
    }

    const std::size_t probe =
        std::min(train_graphs.size(), static_cast<std::size_t>(config.batch_size));
    GraphList held(train_graphs.begin(),
                   train_graphs.begin() + static_cast<std::ptrdiff_t>(probe));
    const double perturbed_reward =
        -evaluate(config.model, perturbed, held).loss;

    const double gain = config.rl_reg.step *
                        (perturbed_reward - base_reward) / config.rl_reg.sigma;
    std::size_t slot = 0;
    for (auto &layer : state.params.layers) {
        if (auto *q = std::get_if<model::QuantumAttentionParams>(&layer.attn)) {
            for (auto *angles : {&q->theta, &q->phi}) {
                const auto &eps = epsilons[slot++];
                for (std::size_t i = 0; i < angles->size(); ++i) {
                    (*angles)[i] += gain * eps[i];
                }
            }
        }
    }
}

struct EpochMetrics {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct FitResult {
    model::ModelParams params; // from the best-validation epoch
    std::vector<EpochMetrics> metrics;
    int best_epoch = 0; // 1-based
};

/// Trains up to max_epochs with early stopping on strict validation-loss
/// improvement; returns the parameters of the best-validation epoch.
inline FitResult fit(const TrainConfig &config, const GraphSplits &splits,
                     const FitHooks &hooks = {}) {
    config.validate();
    require(!splits.train.empty() && !splits.val.empty() && !splits.test.empty(),
            "fit needs non-empty train/val/test splits");

    TrainState state;
    std::mt19937_64 rng(config.seed);
    state.params = init_params(config, rng);
    state.m = model::make_params(config.model);
    state.v = model::make_params(config.model);
    state.rng = rng;

    FitResult result;
    result.params = state.params;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        state.epoch = epoch;
        state.lr_current = lr_at(config, epoch);
        const EpochResult train_metrics =
            train_epoch(config, state, splits.train, hooks);
        rl_regularize(config, state, splits.train, -train_metrics.loss);
        const EpochResult val_metrics =
            evaluate(config.model, state.params, splits.val);
        result.metrics.push_back({epoch + 1, train_metrics.loss,
                                  train_metrics.accuracy, val_metrics.loss,
                                  val_metrics.accuracy});
        if (val_metrics.loss < state.best_val_loss) {
            state.best_val_loss = val_metrics.loss;
            state.epochs_since_best = 0;
            result.params = state.params;
            result.best_epoch = epoch + 1;
        } else {
            ++state.epochs_since_best;
            if (state.epochs_since_best >= config.patience) {
                break;
            }
        }
    }
    return result;
}

struct SweepRow {
    double fraction = 0.0;
    double qgt_acc = 0.0;
    double classical_acc = 0.0;
};

/// Seeded subsample of floor(f * n) graphs, original order preserved.
/// f = 1.0 returns the list untouched so the sweep degenerates to fit.
inline GraphList subsample(const GraphList &graphs, double fraction,
                           std::uint64_t seed) {
    require_config(fraction > 0.0 && fraction <= 1.0,
                   qgt::detail::format("fraction %g outside (0, 1]", fraction));
    if (fraction == 1.0) {
        return graphs;
    }
    const std::size_t n = graphs.size();
    const std::size_t k =
        static_cast<std::size_t>(fraction * static_cast<double>(n));
    require_config(k >= 1,
                   qgt::detail::format("fraction %g of %zu samples is empty",
                                  fraction, n));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    order.resize(k);
    std::sort(order.begin(), order.end());
    GraphList out;
    out.reserve(k);
    for (const std::size_t i : order) {
        out.push_back(graphs[i]);
    }
    return out;
}

/// Trains the quantum model and the classical baseline on growing
/// training fractions against one fixed test split.
inline std::vector<SweepRow>
sample_efficiency_sweep(const TrainConfig &config, const GraphSplits &splits,
                        const std::vector<double> &fractions) {
    require_config(!fractions.empty(), "fractions list is empty");
    for (const double f : fractions) {
        require_config(f > 0.0 && f <= 1.0,
                       qgt::detail::format("fraction %g outside (0, 1]", f));
    }
    std::vector<SweepRow> rows;
    for (std::size_t idx = 0; idx < fractions.size(); ++idx) {
        const double f = fractions[idx];
        const std::uint64_t sub_seed =
            config.seed ^ fnv1a(qgt::detail::format("fraction:%zu", idx));
        GraphSplits point = splits;
        point.train = subsample(splits.train, f, sub_seed);

        SweepRow row;
        row.fraction = f;
        for (const auto kind : {model::ModelKind::Quantum,
                                model::ModelKind::Classical}) {
            TrainConfig point_config = config;
            point_config.model.kind = kind;
            const FitResult fitted = fit(point_config, point);
            const EpochResult test =
                evaluate(point_config.model, fitted.params, point.test);
            if (kind == model::ModelKind::Quantum) {
                row.qgt_acc = test.accuracy;
            } else {
                row.classical_acc = test.accuracy;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace qgt::train
