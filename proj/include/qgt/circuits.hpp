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
 * @file circuits.hpp
 * The three attention circuits and the token-level query/key computation.
 *
 * A token feature vector x (length n^2) is encoded by one merged R_y per
 * qubit, angle s_k = sum of the k-th group of n components, followed by a
 * ring of CNOTs. The query/key circuit stacks R_x, R_y, R_z layers, the
 * CNOT ring, a second R_y layer and a final QFT; its 4n angles are
 * trainable. Measuring a Pauli observable on each qubit of
 * U_pqc(params) * U_encoding(x) |0...0> yields the n-component query (or
 * key) vector for the token.
 */
#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "qgt/common.hpp"
#include "qgt/qsim.hpp"

namespace qgt::circuits {

/// Trainable angles of one query/key circuit pair.
struct QuantumAttentionParams {
    std::vector<double> theta; // query circuit, length 4n
    std::vector<double> phi;   // key circuit, length 4n
};

inline int qubit_count_for_feature_dim(int feature_dim) {
    const int n = static_cast<int>(std::lround(std::sqrt(double(feature_dim))));
    require(n >= 1 && n * n == feature_dim,
            qgt::detail::format("feature dimension %d is not a perfect square",
                           feature_dim));
    return n;
}

inline int param_count_for_qubits(int qubit_count) { return 4 * qubit_count; }

namespace detail {

inline void append_ring_cnots(qsim::CircuitDesc &desc) {
    const int n = desc.qubit_count;
    for (int k = 0; k < n; ++k) {
        desc.gates.push_back(qsim::GateDesc::cnot(k, (k + 1) % n));
    }
}

} // namespace detail

/// Encoding circuit: merged R_y(s_k) per qubit, then the CNOT ring.
/// Angles are symbolic feature-group sums so gradients reach the inputs.
inline qsim::CircuitDesc build_encoding(int feature_dim) {
    const int n = qubit_count_for_feature_dim(feature_dim);
    qsim::CircuitDesc desc;
    desc.qubit_count = n;
    for (int k = 0; k < n; ++k) {
        desc.gates.push_back(qsim::GateDesc::rotation(
            qsim::GateKind::RY, k,
            qsim::AngleSource::feature_sum(n * k, n * k + n)));
    }
    detail::append_ring_cnots(desc);
    return desc;
}

/// Query/key circuit with parameter index order matching the layer layout:
/// R_x(p_k), R_y(p_{n+k}), R_z(p_{2n+k}), CNOT ring, R_y(p_{3n+k}), QFT.
inline qsim::CircuitDesc build_pqc(int param_count) {
    require(param_count >= 4 && param_count % 4 == 0,
            qgt::detail::format("parameter count %d is not 4 * qubit count",
                           param_count));
    const int n = param_count / 4;
    qsim::CircuitDesc desc;
    desc.qubit_count = n;
    const qsim::GateKind layers[3] = {qsim::GateKind::RX, qsim::GateKind::RY,
                                      qsim::GateKind::RZ};
    for (int layer = 0; layer < 3; ++layer) {
        for (int k = 0; k < n; ++k) {
            desc.gates.push_back(qsim::GateDesc::rotation(
                layers[layer], k, qsim::AngleSource::param(layer * n + k)));
        }
    }
    detail::append_ring_cnots(desc);
    for (int k = 0; k < n; ++k) {
        desc.gates.push_back(qsim::GateDesc::rotation(
            qsim::GateKind::RY, k, qsim::AngleSource::param(3 * n + k)));
    }
    desc.gates.push_back(qsim::GateDesc::qft());
    return desc;
}

/// U_pqc after U_encoding in one gate list, sharing a single binding set
/// (features feed the encoding, params feed the PQC).
inline qsim::CircuitDesc build_token_circuit(int feature_dim) {
    qsim::CircuitDesc desc = build_encoding(feature_dim);
    const qsim::CircuitDesc pqc =
        build_pqc(param_count_for_qubits(desc.qubit_count));
    desc.gates.insert(desc.gates.end(), pqc.gates.begin(), pqc.gates.end());
    return desc;
}

namespace detail {

inline void check_token_shapes(std::span<const double> x,
                               std::span<const double> params) {
    const int n = qubit_count_for_feature_dim(static_cast<int>(x.size()));
    require(static_cast<int>(params.size()) == param_count_for_qubits(n),
            qgt::detail::format("expected %d circuit parameters, got %zu",
                           param_count_for_qubits(n), params.size()));
}

inline std::vector<qsim::PauliObservable> per_qubit_observables(int n,
                                                                qsim::Pauli p) {
    std::vector<qsim::PauliObservable> obs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        obs[static_cast<std::size_t>(k)] = {p, k};
    }
    return obs;
}

} // namespace detail

/// Per-qubit expectations of the encoded-and-transformed token state.
/// The same routine serves queries (theta) and keys (phi).
inline std::vector<double> token_qk(std::span<const double> x,
                                    std::span<const double> params,
                                    qsim::Pauli observable = qsim::Pauli::X) {
    detail::check_token_shapes(x, params);
    const int n = qubit_count_for_feature_dim(static_cast<int>(x.size()));
    const qsim::CircuitDesc desc = build_token_circuit(static_cast<int>(x.size()));
    const qsim::Statevector out = qsim::run_circuit(
        desc, qsim::zero_state(n), qsim::Bindings{params, x});
    std::vector<double> result(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        result[static_cast<std::size_t>(k)] =
            qsim::expectation(out, observable, k);
    }
    return result;
}

/// Finite-shot variant of token_qk.
inline std::vector<double> token_qk_sampled(std::span<const double> x,
                                            std::span<const double> params,
                                            int shots, std::mt19937_64 &rng) {
    detail::check_token_shapes(x, params);
    const int n = qubit_count_for_feature_dim(static_cast<int>(x.size()));
    const qsim::CircuitDesc desc = build_token_circuit(static_cast<int>(x.size()));
    const qsim::Statevector out = qsim::run_circuit(
        desc, qsim::zero_state(n), qsim::Bindings{params, x});
    std::vector<double> result(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        result[static_cast<std::size_t>(k)] =
            qsim::expectation_x_sampled(out, k, shots, rng);
    }
    return result;
}

struct TokenQkGradients {
    std::vector<double> grad_params; // length 4n
    std::vector<double> grad_x;      // length n^2
};

/// Pulls an upstream cotangent back through token_qk. Circuit-parameter
/// gradients come straight from the adjoint Jacobian; input gradients go
/// through the merged angles, so all n components of one encoding group
/// share a value.
inline TokenQkGradients token_qk_backward(std::span<const double> x,
                                          std::span<const double> params,
                                          std::span<const double> upstream,
                                          qsim::Pauli observable = qsim::Pauli::X) {
    detail::check_token_shapes(x, params);
    const int n = qubit_count_for_feature_dim(static_cast<int>(x.size()));
    require(static_cast<int>(upstream.size()) == n,
            qgt::detail::format("upstream length %zu does not match qubit count %d",
                           upstream.size(), n));

    const qsim::CircuitDesc desc = build_token_circuit(static_cast<int>(x.size()));
    const auto observables = detail::per_qubit_observables(n, observable);
    const qsim::Jacobian jac = qsim::circuit_gradients(
        desc, qsim::zero_state(n), qsim::Bindings{params, x}, observables);

    TokenQkGradients grads;
    grads.grad_params.assign(params.size(), 0.0);
    grads.grad_x.assign(x.size(), 0.0);

    std::vector<double> merged(static_cast<std::size_t>(n), 0.0);
    for (std::size_t col = 0; col < jac.gate_indices.size(); ++col) {
        const auto &src = desc.gates[jac.gate_indices[col]].angle;
        double pulled = 0.0;
        for (int m = 0; m < n; ++m) {
            pulled += upstream[static_cast<std::size_t>(m)] *
                      jac.d_expectation[static_cast<std::size_t>(m)][col];
        }
        if (src.kind == qsim::AngleSource::Kind::Param) {
            grads.grad_params[static_cast<std::size_t>(src.param_index)] +=
                pulled;
        } else {
            merged[static_cast<std::size_t>(src.feature_begin / n)] += pulled;
        }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        grads.grad_x[j] = merged[j / static_cast<std::size_t>(n)];
    }
    return grads;
}

} // namespace qgt::circuits
