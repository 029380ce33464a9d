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
 * @file model.hpp
 * The graph-transformer model: embedding projection, stacked attention +
 * message-passing layers (quantum or classical scores), mean pooling,
 * affine classifier, cross-entropy loss, and exact reverse-mode gradients
 * for every parameter.
 *
 * Attention uses in-neighbors: node i attends over N(i) = {j : (j, i) in
 * edges}. A node with an empty neighborhood has no attention row and keeps
 * its features through the residual term.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qgt/circuits.hpp"
#include "qgt/common.hpp"
#include "qgt/parallel.hpp"
#include "qgt/textgraph.hpp"

namespace qgt::model {

using circuits::QuantumAttentionParams;

struct ClassicalAttentionParams {
    Eigen::MatrixXd wq; // dk x d
    Eigen::MatrixXd wk; // dk x d
};

struct LayerParams {
    std::variant<QuantumAttentionParams, ClassicalAttentionParams> attn;
    Eigen::MatrixXd value_w; // d x d
    Eigen::VectorXd value_b; // d
};

enum class ModelKind { Quantum, Classical };

inline ModelKind parse_model_kind(const std::string &text) {
    if (text == "quantum") {
        return ModelKind::Quantum;
    }
    if (text == "classical") {
        return ModelKind::Classical;
    }
    throw ConfigError(qgt::detail::format(
        "bad model kind '%s' (expected 'quantum' or 'classical')",
        text.c_str()));
}

inline std::string to_string(ModelKind kind) {
    return kind == ModelKind::Quantum ? "quantum" : "classical";
}

struct ModelConfig {
    ModelKind kind = ModelKind::Quantum;
    int d0 = 50;         // raw embedding dimension
    int d = 16;          // projected node dimension (perfect square if quantum)
    int class_count = 2;
    int layer_count = 1;
    int scale_dim = 16;  // attention scores divide by sqrt(scale_dim)
    int dk = 4;          // classical baseline query/key width

    int qubit_count() const {
        return circuits::qubit_count_for_feature_dim(d);
    }
    /// Width of the query/key vectors fed to the scaled dot product.
    int attn_width() const {
        return kind == ModelKind::Quantum ? qubit_count() : dk;
    }
};

struct ModelParams {
    Eigen::MatrixXd proj_w; // d x d0
    Eigen::VectorXd proj_b; // d
    std::vector<LayerParams> layers;
    Eigen::MatrixXd clf_w;  // c x d
    Eigen::VectorXd clf_b;  // c
};

/// Allocates zero-valued parameters with the shapes the config demands.
inline ModelParams make_params(const ModelConfig &config) {
    require(config.d0 >= 1 && config.d >= 1 && config.class_count >= 2 &&
                config.layer_count >= 1 && config.scale_dim >= 1 &&
                config.dk >= 1,
            "model dimensions must be positive (class_count >= 2)");
    ModelParams p;
    p.proj_w = Eigen::MatrixXd::Zero(config.d, config.d0);
    p.proj_b = Eigen::VectorXd::Zero(config.d);
    p.layers.resize(static_cast<std::size_t>(config.layer_count));
    for (auto &layer : p.layers) {
        if (config.kind == ModelKind::Quantum) {
            const std::size_t np = static_cast<std::size_t>(
                circuits::param_count_for_qubits(config.qubit_count()));
            layer.attn = QuantumAttentionParams{
                std::vector<double>(np, 0.0), std::vector<double>(np, 0.0)};
        } else {
            layer.attn = ClassicalAttentionParams{
                Eigen::MatrixXd::Zero(config.dk, config.d),
                Eigen::MatrixXd::Zero(config.dk, config.d)};
        }
        layer.value_w = Eigen::MatrixXd::Zero(config.d, config.d);
        layer.value_b = Eigen::VectorXd::Zero(config.d);
    }
    p.clf_w = Eigen::MatrixXd::Zero(config.class_count, config.d);
    p.clf_b = Eigen::VectorXd::Zero(config.class_count);
    return p;
}

/// Flat views over every parameter tensor in a fixed traversal order
/// (proj, per-layer attention then value, classifier). The optimizer and
/// the gradient reducer walk parameters and gradients in lockstep.
inline std::vector<std::span<double>> tensor_views(ModelParams &p) {
    std::vector<std::span<double>> views;
    auto add = [&](double *data, std::size_t n) { views.emplace_back(data, n); };
    add(p.proj_w.data(), static_cast<std::size_t>(p.proj_w.size()));
    add(p.proj_b.data(), static_cast<std::size_t>(p.proj_b.size()));
    for (auto &layer : p.layers) {
        if (auto *q = std::get_if<QuantumAttentionParams>(&layer.attn)) {
            add(q->theta.data(), q->theta.size());
            add(q->phi.data(), q->phi.size());
        } else {
            auto &c = std::get<ClassicalAttentionParams>(layer.attn);
            add(c.wq.data(), static_cast<std::size_t>(c.wq.size()));
            add(c.wk.data(), static_cast<std::size_t>(c.wk.size()));
        }
        add(layer.value_w.data(), static_cast<std::size_t>(layer.value_w.size()));
        add(layer.value_b.data(), static_cast<std::size_t>(layer.value_b.size()));
    }
    add(p.clf_w.data(), static_cast<std::size_t>(p.clf_w.size()));
    add(p.clf_b.data(), static_cast<std::size_t>(p.clf_b.size()));
    return views;
}

inline std::size_t parameter_count(const ModelParams &p) {
    std::size_t total = 0;
    for (const auto view : tensor_views(const_cast<ModelParams &>(p))) {
        total += view.size();
    }
    return total;
}

/// Visits (name, rows, cols, data access) per tensor for serialization.
/// theta/phi are exposed as 1 x 4n row vectors.
template <typename Fn> void visit_named_tensors(ModelParams &p, Fn &&fn) {
    using Map = Eigen::Map<Eigen::MatrixXd>;
    auto mat = [&](const std::string &name, Eigen::MatrixXd &m) {
        fn(name, Map(m.data(), m.rows(), m.cols()));
    };
    auto vec = [&](const std::string &name, Eigen::VectorXd &v) {
        fn(name, Map(v.data(), v.size(), 1));
    };
    mat("proj_w", p.proj_w);
    vec("proj_b", p.proj_b);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto &layer = p.layers[l];
        const std::string prefix = qgt::detail::format("layer%zu.", l);
        if (auto *q = std::get_if<QuantumAttentionParams>(&layer.attn)) {
            fn(prefix + "theta",
               Map(q->theta.data(), 1, static_cast<Eigen::Index>(q->theta.size())));
            fn(prefix + "phi",
               Map(q->phi.data(), 1, static_cast<Eigen::Index>(q->phi.size())));
        } else {
            auto &c = std::get<ClassicalAttentionParams>(layer.attn);
            mat(prefix + "wq", c.wq);
            mat(prefix + "wk", c.wk);
        }
        mat(prefix + "value_w", layer.value_w);
        vec(prefix + "value_b", layer.value_b);
    }
    mat("clf_w", p.clf_w);
    vec("clf_b", p.clf_b);
}

// ---------------------------------------------------------------------------
// Individual pipeline stages
// ---------------------------------------------------------------------------

/// x_i = proj_w em_i + proj_b, rows of the result.
inline Eigen::MatrixXd project(const Eigen::MatrixXd &proj_w,
                               const Eigen::VectorXd &proj_b,
                               const Eigen::MatrixXd &features) {
    require(features.cols() == proj_w.cols(),
            qgt::detail::format("projection expects %ld-dim features, got %ld",
                           long(proj_w.cols()), long(features.cols())));
    Eigen::MatrixXd x = features * proj_w.transpose();
    x.rowwise() += proj_b.transpose();
    return x;
}

/// Sorted in-neighbor lists N(i) = {j : (j, i) in edges}.
inline std::vector<std::vector<int>>
in_neighbors(int node_count, const std::vector<std::pair<int, int>> &edges) {
    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(node_count));
    for (const auto &[src, dst] : edges) {
        require(src >= 0 && src < node_count && dst >= 0 && dst < node_count &&
                    src != dst,
                qgt::detail::format("edge (%d, %d) invalid for %d nodes", src, dst,
                               node_count));
        nbrs[static_cast<std::size_t>(dst)].push_back(src);
    }
    for (auto &list : nbrs) {
        std::sort(list.begin(), list.end());
    }
    return nbrs;
}

inline Eigen::VectorXd stable_softmax(const Eigen::VectorXd &scores) {
    const double peak = scores.maxCoeff();
    Eigen::VectorXd out = (scores.array() - peak).exp();
    return out / out.sum();
}

/// Softmax over each node's neighborhood of Q_i . K_j / sqrt(scale_dim).
/// alpha[i] aligns with nbrs[i]; empty neighborhoods yield empty rows.
inline std::vector<std::vector<double>>
alpha_from_scores(const Eigen::MatrixXd &queries, const Eigen::MatrixXd &keys,
                  const std::vector<std::vector<int>> &nbrs, int scale_dim) {
    require(scale_dim >= 1, "scale_dim must be >= 1");
    const double scale = std::sqrt(static_cast<double>(scale_dim));
    std::vector<std::vector<double>> alpha(nbrs.size());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const auto &row = nbrs[i];
        if (row.empty()) {
            continue;
        }
        Eigen::VectorXd scores(static_cast<Eigen::Index>(row.size()));
        for (std::size_t idx = 0; idx < row.size(); ++idx) {
            scores(static_cast<Eigen::Index>(idx)) =
                queries.row(static_cast<Eigen::Index>(i))
                    .dot(keys.row(row[idx])) /
                scale;
        }
        const Eigen::VectorXd soft = stable_softmax(scores);
        alpha[i].assign(soft.data(), soft.data() + soft.size());
    }
    return alpha;
}

struct AttentionResult {
    Eigen::MatrixXd queries; // N x width
    Eigen::MatrixXd keys;    // N x width
    std::vector<std::vector<double>> alpha;
};

/// Quantum path: Q_i and K_i are per-qubit X expectations of the token
/// circuits applied to node features. Nodes are independent, so the two
/// circuit evaluations per node run in parallel slots.
inline AttentionResult
quantum_attention(const Eigen::MatrixXd &xs, const QuantumAttentionParams &attn,
                  const std::vector<std::vector<int>> &nbrs, int scale_dim) {
    const int n_nodes = static_cast<int>(xs.rows());
    const int width =
        circuits::qubit_count_for_feature_dim(static_cast<int>(xs.cols()));
    AttentionResult result;
    result.queries.resize(n_nodes, width);
    result.keys.resize(n_nodes, width);
    parallel::parallel_for(static_cast<std::size_t>(n_nodes), [&](std::size_t i) {
        const Eigen::VectorXd x = xs.row(static_cast<Eigen::Index>(i));
        const std::span<const double> xspan(x.data(),
                                            static_cast<std::size_t>(x.size()));
        const auto q = circuits::token_qk(xspan, attn.theta);
        const auto k = circuits::token_qk(xspan, attn.phi);
        for (int m = 0; m < width; ++m) {
            result.queries(static_cast<Eigen::Index>(i), m) =
                q[static_cast<std::size_t>(m)];
            result.keys(static_cast<Eigen::Index>(i), m) =
                k[static_cast<std::size_t>(m)];
        }
    });
    result.alpha = alpha_from_scores(result.queries, result.keys, nbrs, scale_dim);
    return result;
}

/// Classical baseline: linear query/key maps, same softmax.
inline AttentionResult
classical_attention(const Eigen::MatrixXd &xs,
                    const ClassicalAttentionParams &attn,
                    const std::vector<std::vector<int>> &nbrs, int scale_dim) {
    require(attn.wq.cols() == xs.cols() && attn.wk.cols() == xs.cols(),
            "query/key projection width does not match node features");
    AttentionResult result;
    result.queries = xs * attn.wq.transpose();
    result.keys = xs * attn.wk.transpose();
    result.alpha = alpha_from_scores(result.queries, result.keys, nbrs, scale_dim);
    return result;
}

inline Eigen::MatrixXd values_of(const Eigen::MatrixXd &xs,
                                 const Eigen::MatrixXd &value_w,
                                 const Eigen::VectorXd &value_b) {
    Eigen::MatrixXd v = xs * value_w.transpose();
    v.rowwise() += value_b.transpose();
    return v;
}

/// x'_i = x_i + sum_{j in N(i)} alpha_ij V_j. Empty neighborhoods pass
/// features through unchanged.
inline Eigen::MatrixXd
message_pass(const Eigen::MatrixXd &xs,
             const std::vector<std::vector<double>> &alpha,
             const Eigen::MatrixXd &values,
             const std::vector<std::vector<int>> &nbrs) {
    require(alpha.size() == nbrs.size() &&
                static_cast<Eigen::Index>(nbrs.size()) == xs.rows(),
            "attention/neighbor lists do not match node count");
    Eigen::MatrixXd out = xs;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        require(alpha[i].size() == nbrs[i].size(),
                "attention row does not align with neighborhood");
        for (std::size_t idx = 0; idx < nbrs[i].size(); ++idx) {
            out.row(static_cast<Eigen::Index>(i)) +=
                alpha[i][idx] * values.row(nbrs[i][idx]);
        }
    }
    return out;
}

inline Eigen::VectorXd mean_pool(const Eigen::MatrixXd &xs) {
    require(xs.rows() >= 1, "mean_pool needs at least one node");
    return xs.colwise().mean().transpose();
}

inline Eigen::VectorXd classify(const Eigen::MatrixXd &clf_w,
                                const Eigen::VectorXd &clf_b,
                                const Eigen::VectorXd &pooled) {
    require(clf_w.cols() == pooled.size(),
            "classifier width does not match pooled vector");
    return clf_w * pooled + clf_b;
}

inline double cross_entropy(const Eigen::VectorXd &logits, int label) {
    require(label >= 0 && label < logits.size(),
            qgt::detail::format("label %d outside [0, %ld)", label,
                           long(logits.size())));
    const double peak = logits.maxCoeff();
    const double log_sum = std::log((logits.array() - peak).exp().sum());
    return log_sum - (logits(label) - peak);
}

/// Lowest index wins ties.
inline int argmax_lowest(const Eigen::VectorXd &v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

struct LayerCache {
    Eigen::MatrixXd x_in;
    Eigen::MatrixXd queries;
    Eigen::MatrixXd keys;
    std::vector<std::vector<double>> alpha;
    Eigen::MatrixXd values;
};

struct ForwardCache {
    Eigen::MatrixXd em; // raw N x d0 features
    std::vector<std::vector<int>> nbrs;
    std::vector<LayerCache> layers;
    Eigen::MatrixXd x_out;
    Eigen::VectorXd pooled;
    Eigen::VectorXd logits;
};

inline void validate_params(const ModelConfig &config, const ModelParams &p) {
    require(p.proj_w.rows() == config.d && p.proj_w.cols() == config.d0 &&
                p.proj_b.size() == config.d,
            "projection parameters do not match config dims");
    require(static_cast<int>(p.layers.size()) == config.layer_count,
            "layer count does not match config");
    for (const auto &layer : p.layers) {
        if (config.kind == ModelKind::Quantum) {
            const auto *q = std::get_if<QuantumAttentionParams>(&layer.attn);
            require(q != nullptr, "config says quantum but params are classical");
            const std::size_t np = static_cast<std::size_t>(
                circuits::param_count_for_qubits(config.qubit_count()));
            require(q->theta.size() == np && q->phi.size() == np,
                    "circuit parameter count does not match qubit count");
        } else {
            const auto *c = std::get_if<ClassicalAttentionParams>(&layer.attn);
            require(c != nullptr, "config says classical but params are quantum");
            require(c->wq.rows() == config.dk && c->wq.cols() == config.d &&
                        c->wk.rows() == config.dk && c->wk.cols() == config.d,
                    "query/key projection shape does not match config");
        }
        require(layer.value_w.rows() == config.d &&
                    layer.value_w.cols() == config.d &&
                    layer.value_b.size() == config.d,
                "value parameters do not match config dims");
    }
    require(p.clf_w.rows() == config.class_count &&
                p.clf_w.cols() == config.d &&
                p.clf_b.size() == config.class_count,
            "classifier parameters do not match config dims");
}

inline ForwardCache forward(const ModelConfig &config, const ModelParams &params,
                            const textgraph::SentenceGraph &graph) {
    validate_params(config, params);
    require(graph.features.cols() == config.d0,
            qgt::detail::format("graph features are %ld-dim, config expects %d",
                           long(graph.features.cols()), config.d0));
    ForwardCache cache;
    cache.em = graph.features;
    cache.nbrs = in_neighbors(static_cast<int>(graph.features.rows()),
                              graph.edges);

    Eigen::MatrixXd x = project(params.proj_w, params.proj_b, cache.em);
    cache.layers.reserve(params.layers.size());
    for (const auto &layer : params.layers) {
        LayerCache lc;
        lc.x_in = x;
        AttentionResult attn;
        if (const auto *q = std::get_if<QuantumAttentionParams>(&layer.attn)) {
            attn = quantum_attention(x, *q, cache.nbrs, config.scale_dim);
        } else {
            attn = classical_attention(
                x, std::get<ClassicalAttentionParams>(layer.attn), cache.nbrs,
                config.scale_dim);
        }
        lc.queries = std::move(attn.queries);
        lc.keys = std::move(attn.keys);
        lc.alpha = std::move(attn.alpha);
        lc.values = values_of(x, layer.value_w, layer.value_b);
        x = message_pass(x, lc.alpha, lc.values, cache.nbrs);
        cache.layers.push_back(std::move(lc));
    }
    cache.x_out = std::move(x);
    cache.pooled = mean_pool(cache.x_out);
    cache.logits = classify(params.clf_w, params.clf_b, cache.pooled);
    return cache;
}

/// Exact gradients of cross_entropy(forward(params, graph), label) with
/// respect to every parameter tensor. Quantum circuit gradients are routed
/// through the adjoint Jacobian of token_qk.
inline ModelParams backward(const ModelConfig &config, const ModelParams &params,
                            const ForwardCache &cache, int label) {
    validate_params(config, params);
    require(cache.layers.size() == params.layers.size() &&
                cache.logits.size() == config.class_count &&
                cache.x_out.cols() == config.d,
            "forward cache does not match these parameters");
    const Eigen::Index n_nodes = cache.x_out.rows();
    require(static_cast<std::size_t>(n_nodes) == cache.nbrs.size() &&
                cache.em.rows() == n_nodes,
            "forward cache node count is inconsistent");
    require(label >= 0 && label < config.class_count, "label out of range");

    ModelParams grads = make_params(config);
    const double scale = std::sqrt(static_cast<double>(config.scale_dim));

    // Loss and classifier head.
    Eigen::VectorXd dlogits = stable_softmax(cache.logits);
    dlogits(label) -= 1.0;
    grads.clf_w = dlogits * cache.pooled.transpose();
    grads.clf_b = dlogits;
    const Eigen::VectorXd dpooled = params.clf_w.transpose() * dlogits;

    // Mean pool spreads the cotangent uniformly over nodes.
    Eigen::MatrixXd dx = (dpooled / static_cast<double>(n_nodes))
                             .transpose()
                             .replicate(n_nodes, 1);

    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const LayerParams &layer = params.layers[l];
        const LayerCache &lc = cache.layers[l];
        LayerParams &glayer = grads.layers[l];
        // dx holds the cotangent of this layer's output; the residual term
        // makes it the starting value for the input cotangent, which keeps
        // accumulating below while dx_out stays frozen.
        const Eigen::MatrixXd dx_out = dx;

        const int width = static_cast<int>(lc.queries.cols());
        Eigen::MatrixXd dqueries = Eigen::MatrixXd::Zero(n_nodes, width);
        Eigen::MatrixXd dkeys = Eigen::MatrixXd::Zero(n_nodes, width);
        Eigen::MatrixXd dvalues = Eigen::MatrixXd::Zero(n_nodes, config.d);

        for (std::size_t i = 0; i < cache.nbrs.size(); ++i) {
            const auto &row = cache.nbrs[i];
            if (row.empty()) {
                continue;
            }
            const Eigen::Index ei = static_cast<Eigen::Index>(i);
            // dalpha_ij = dx'_i . V_j ; dV_j += alpha_ij dx'_i
            Eigen::VectorXd dalpha(static_cast<Eigen::Index>(row.size()));
            for (std::size_t idx = 0; idx < row.size(); ++idx) {
                dalpha(static_cast<Eigen::Index>(idx)) =
                    dx_out.row(ei).dot(lc.values.row(row[idx]));
                dvalues.row(row[idx]) += lc.alpha[i][idx] * dx_out.row(ei);
            }
            // Softmax backward within the row.
            double inner = 0.0;
            for (std::size_t idx = 0; idx < row.size(); ++idx) {
                inner += lc.alpha[i][idx] *
                         dalpha(static_cast<Eigen::Index>(idx));
            }
            for (std::size_t idx = 0; idx < row.size(); ++idx) {
                const double dscore =
                    lc.alpha[i][idx] *
                    (dalpha(static_cast<Eigen::Index>(idx)) - inner);
                dqueries.row(ei) += dscore / scale * lc.keys.row(row[idx]);
                dkeys.row(row[idx]) += dscore / scale * lc.queries.row(ei);
            }
        }

        // Value projection: V_j = value_w x_j + value_b.
        glayer.value_w = dvalues.transpose() * lc.x_in;
        glayer.value_b = dvalues.colwise().sum().transpose();
        dx += dvalues * layer.value_w;

        if (const auto *q = std::get_if<QuantumAttentionParams>(&layer.attn)) {
            auto &gq = std::get<QuantumAttentionParams>(glayer.attn);
            // Per-node circuit pullbacks run in parallel slots and reduce
            // in node order so the sum is deterministic.
            std::vector<circuits::TokenQkGradients> qg(
                static_cast<std::size_t>(n_nodes));
            std::vector<circuits::TokenQkGradients> kg(
                static_cast<std::size_t>(n_nodes));
            parallel::parallel_for(
                static_cast<std::size_t>(n_nodes), [&](std::size_t t) {
                    const Eigen::Index et = static_cast<Eigen::Index>(t);
                    const Eigen::VectorXd x = lc.x_in.row(et);
                    const std::span<const double> xspan(
                        x.data(), static_cast<std::size_t>(x.size()));
                    if (dqueries.row(et).cwiseAbs().maxCoeff() != 0.0) {
                        const Eigen::VectorXd up = dqueries.row(et);
                        qg[t] = circuits::token_qk_backward(
                            xspan, q->theta,
                            std::span<const double>(
                                up.data(), static_cast<std::size_t>(up.size())));
                    }
                    if (dkeys.row(et).cwiseAbs().maxCoeff() != 0.0) {
                        const Eigen::VectorXd up = dkeys.row(et);
                        kg[t] = circuits::token_qk_backward(
                            xspan, q->phi,
                            std::span<const double>(
                                up.data(), static_cast<std::size_t>(up.size())));
                    }
                });
            for (Eigen::Index t = 0; t < n_nodes; ++t) {
                const auto &gqt = qg[static_cast<std::size_t>(t)];
                for (std::size_t m = 0; m < gqt.grad_params.size(); ++m) {
                    gq.theta[m] += gqt.grad_params[m];
                }
                for (std::size_t m = 0; m < gqt.grad_x.size(); ++m) {
                    dx(t, static_cast<Eigen::Index>(m)) += gqt.grad_x[m];
                }
                const auto &gkt = kg[static_cast<std::size_t>(t)];
                for (std::size_t m = 0; m < gkt.grad_params.size(); ++m) {
                    gq.phi[m] += gkt.grad_params[m];
                }
                for (std::size_t m = 0; m < gkt.grad_x.size(); ++m) {
                    dx(t, static_cast<Eigen::Index>(m)) += gkt.grad_x[m];
                }
            }
        } else {
            const auto &c = std::get<ClassicalAttentionParams>(layer.attn);
            auto &gc = std::get<ClassicalAttentionParams>(glayer.attn);
            gc.wq = dqueries.transpose() * lc.x_in;
            gc.wk = dkeys.transpose() * lc.x_in;
            dx += dqueries * c.wq + dkeys * c.wk;
        }
    }

    // Projection: x_i = proj_w em_i + proj_b.
    grads.proj_w = dx.transpose() * cache.em;
    grads.proj_b = dx.colwise().sum().transpose();
    return grads;
}

} // namespace qgt::model
