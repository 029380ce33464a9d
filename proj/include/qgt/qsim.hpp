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
 * @file qsim.hpp
 * Dense statevector simulator for small qubit counts.
 *
 * Supports the gate inventory needed by the attention circuits (Pauli
 * rotations, CNOT, QFT), Pauli expectation values, and two gradient paths
 * for rotation angles: an adjoint reverse sweep (production, following
 * arXiv:2009.02823) and the parameter-shift rule (kept as an independent
 * check).
 *
 * Conventions:
 *  - R_P(a) = exp(-i a P / 2) for P in {X, Y, Z}.
 *  - Qubit 0 is the most significant bit of the basis index.
 *  - QFT is the plain DFT unitary F[j][k] = exp(2*pi*i*j*k/N)/sqrt(N) under
 *    that bit order (the final swap layer is part of the gate).
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "qgt/common.hpp"

namespace qgt::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 12;

enum class Pauli { X, Y, Z };

/// Pure n-qubit state as 2^n complex amplitudes.
class Statevector {
  public:
    explicit Statevector(int qubit_count)
        : qubit_count_(qubit_count),
          amplitudes_(std::size_t{1} << check_count(qubit_count)) {
        amplitudes_[0] = Complex{1.0, 0.0};
    }

    /// Wraps existing amplitudes; rejects vectors that are not normalized.
    static Statevector from_amplitudes(std::vector<Complex> amps) {
        int n = 0;
        while ((std::size_t{1} << n) < amps.size()) {
            ++n;
        }
        require((std::size_t{1} << n) == amps.size(),
                "amplitude vector length must be a power of two");
        Statevector sv(n);
        sv.amplitudes_ = std::move(amps);
        require(std::abs(sv.norm() - 1.0) < 1e-10,
                "statevector is not normalized");
        return sv;
    }

    int qubit_count() const { return qubit_count_; }
    std::size_t size() const { return amplitudes_.size(); }

    Complex &operator[](std::size_t i) { return amplitudes_[i]; }
    const Complex &operator[](std::size_t i) const { return amplitudes_[i]; }

    std::span<const Complex> amplitudes() const { return amplitudes_; }

    double norm() const {
        double s = 0.0;
        for (const auto &a : amplitudes_) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

  private:
    static int check_count(int n) {
        require(n >= 1 && n <= kMaxQubits,
                qgt::detail::format("qubit count %d outside [1, %d]", n,
                               kMaxQubits));
        return n;
    }

    int qubit_count_;
    std::vector<Complex> amplitudes_;
};

/// |0...0> on n qubits.
inline Statevector zero_state(int qubit_count) {
    return Statevector(qubit_count);
}

// ---------------------------------------------------------------------------
// Gate descriptions
// ---------------------------------------------------------------------------

enum class GateKind { RX, RY, RZ, CNOT, QFT };

inline bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

/// Where a rotation angle comes from when the circuit is run.
struct AngleSource {
    enum class Kind { Literal, Param, FeatureSum };

    Kind kind = Kind::Literal;
    double value = 0.0; // Literal
    int param_index = -1;
    int feature_begin = 0; // FeatureSum: [feature_begin, feature_end)
    int feature_end = 0;

    static AngleSource literal(double v) {
        return {Kind::Literal, v, -1, 0, 0};
    }
    static AngleSource param(int idx) {
        return {Kind::Param, 0.0, idx, 0, 0};
    }
    static AngleSource feature_sum(int begin, int end) {
        return {Kind::FeatureSum, 0.0, -1, begin, end};
    }

    bool symbolic() const { return kind != Kind::Literal; }
};

struct GateDesc {
    GateKind kind;
    int target = 0;
    int control = -1; // CNOT only
    AngleSource angle;
    bool adjoint = false; // run the inverse of the gate

    static GateDesc rotation(GateKind k, int qubit, AngleSource src) {
        GateDesc g;
        g.kind = k;
        g.target = qubit;
        g.angle = src;
        return g;
    }
    static GateDesc cnot(int control, int target) {
        GateDesc g;
        g.kind = GateKind::CNOT;
        g.control = control;
        g.target = target;
        return g;
    }
    static GateDesc qft() {
        GateDesc g;
        g.kind = GateKind::QFT;
        return g;
    }
};

/// Ordered gate list; evaluation order is list order.
struct CircuitDesc {
    int qubit_count = 0;
    std::vector<GateDesc> gates;
};

/// Values backing symbolic angle sources during a run.
struct Bindings {
    std::span<const double> params;   // Param sources
    std::span<const double> features; // FeatureSum sources
};

inline double resolve_angle(const AngleSource &src, const Bindings &b) {
    switch (src.kind) {
    case AngleSource::Kind::Literal:
        return src.value;
    case AngleSource::Kind::Param:
        require(src.param_index >= 0 &&
                    static_cast<std::size_t>(src.param_index) <
                        b.params.size(),
                qgt::detail::format("unresolved circuit parameter %d",
                               src.param_index));
        return b.params[static_cast<std::size_t>(src.param_index)];
    case AngleSource::Kind::FeatureSum: {
        require(src.feature_begin >= 0 && src.feature_begin <= src.feature_end &&
                    static_cast<std::size_t>(src.feature_end) <=
                        b.features.size(),
                qgt::detail::format("unresolved feature range [%d, %d)",
                               src.feature_begin, src.feature_end));
        double s = 0.0;
        for (int j = src.feature_begin; j < src.feature_end; ++j) {
            s += b.features[static_cast<std::size_t>(j)];
        }
        return s;
    }
    }
    throw Error("unknown angle source kind");
}

// ---------------------------------------------------------------------------
// Gate kernels
// ---------------------------------------------------------------------------

namespace detail {

// Bit position of a qubit inside the basis index (qubit 0 = MSB).
inline std::size_t bit_of(const Statevector &sv, int qubit) {
    require(qubit >= 0 && qubit < sv.qubit_count(),
            qgt::detail::format("qubit index %d out of range", qubit));
    return std::size_t{1} << (sv.qubit_count() - 1 - qubit);
}

inline void apply_single_qubit(Statevector &sv, int qubit, Complex m00,
                               Complex m01, Complex m10, Complex m11) {
    const std::size_t mask = bit_of(sv, qubit);
    for (std::size_t b = 0; b < sv.size(); ++b) {
        if ((b & mask) == 0) {
            const Complex a0 = sv[b];
            const Complex a1 = sv[b | mask];
            sv[b] = m00 * a0 + m01 * a1;
            sv[b | mask] = m10 * a0 + m11 * a1;
        }
    }
}

inline void apply_hadamard(Statevector &sv, int qubit) {
    const double r = 1.0 / std::numbers::sqrt2;
    apply_single_qubit(sv, qubit, {r, 0}, {r, 0}, {r, 0}, {-r, 0});
}

inline void apply_cphase(Statevector &sv, int control, int target,
                         double phase) {
    const std::size_t cmask = bit_of(sv, control);
    const std::size_t tmask = bit_of(sv, target);
    const Complex w = std::polar(1.0, phase);
    for (std::size_t b = 0; b < sv.size(); ++b) {
        if ((b & cmask) && (b & tmask)) {
            sv[b] *= w;
        }
    }
}

inline void apply_swap(Statevector &sv, int a, int b) {
    const std::size_t amask = bit_of(sv, a);
    const std::size_t bmask = bit_of(sv, b);
    for (std::size_t i = 0; i < sv.size(); ++i) {
        if ((i & amask) && !(i & bmask)) {
            std::swap(sv[i], sv[(i & ~amask) | bmask]);
        }
    }
}

} // namespace detail

/// In-place Pauli application (used for expectations and adjoint sweeps).
inline void apply_pauli(Statevector &sv, Pauli p, int qubit) {
    const std::size_t mask = detail::bit_of(sv, qubit);
    switch (p) {
    case Pauli::X:
        detail::apply_single_qubit(sv, qubit, {0, 0}, {1, 0}, {1, 0}, {0, 0});
        break;
    case Pauli::Y:
        detail::apply_single_qubit(sv, qubit, {0, 0}, {0, -1}, {0, 1}, {0, 0});
        break;
    case Pauli::Z:
        for (std::size_t b = 0; b < sv.size(); ++b) {
            if (b & mask) {
                sv[b] = -sv[b];
            }
        }
        break;
    }
}

inline void apply_rotation(Statevector &sv, GateKind kind, int qubit,
                           double angle) {
    require(std::isfinite(angle), "rotation angle must be finite");
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    switch (kind) {
    case GateKind::RX:
        detail::apply_single_qubit(sv, qubit, {c, 0}, {0, -s}, {0, -s},
                                   {c, 0});
        break;
    case GateKind::RY:
        detail::apply_single_qubit(sv, qubit, {c, 0}, {-s, 0}, {s, 0}, {c, 0});
        break;
    case GateKind::RZ:
        detail::apply_single_qubit(sv, qubit, {c, -s}, {0, 0}, {0, 0}, {c, s});
        break;
    default:
        throw Error("apply_rotation requires a rotation gate kind");
    }
}

inline void apply_cnot(Statevector &sv, int control, int target) {
    require(control != target, "CNOT control and target must differ");
    const std::size_t cmask = detail::bit_of(sv, control);
    const std::size_t tmask = detail::bit_of(sv, target);
    for (std::size_t b = 0; b < sv.size(); ++b) {
        if ((b & cmask) && !(b & tmask)) {
            std::swap(sv[b], sv[b | tmask]);
        }
    }
}

/// Full-register QFT via Hadamards, controlled phases and a swap layer.
inline void apply_qft(Statevector &sv, bool inverse = false) {
    const int n = sv.qubit_count();
    if (!inverse) {
        for (int q = 0; q < n; ++q) {
            detail::apply_hadamard(sv, q);
            for (int m = q + 1; m < n; ++m) {
                const double phase =
                    2.0 * std::numbers::pi / double(std::size_t{1} << (m - q + 1));
                detail::apply_cphase(sv, m, q, phase);
            }
        }
        for (int q = 0; q < n / 2; ++q) {
            detail::apply_swap(sv, q, n - 1 - q);
        }
    } else {
        for (int q = n / 2 - 1; q >= 0; --q) {
            detail::apply_swap(sv, q, n - 1 - q);
        }
        for (int q = n - 1; q >= 0; --q) {
            for (int m = n - 1; m > q; --m) {
                const double phase =
                    -2.0 * std::numbers::pi / double(std::size_t{1} << (m - q + 1));
                detail::apply_cphase(sv, m, q, phase);
            }
            detail::apply_hadamard(sv, q);
        }
    }
}

// ---------------------------------------------------------------------------
// Expectations
// ---------------------------------------------------------------------------

/// <psi| P_qubit |psi>. The imaginary residue is checked against tolerance
/// before being discarded.
inline double expectation(const Statevector &sv, Pauli p, int qubit) {
    Statevector flipped = sv;
    apply_pauli(flipped, p, qubit);
    Complex acc{0.0, 0.0};
    for (std::size_t b = 0; b < sv.size(); ++b) {
        acc += std::conj(sv[b]) * flipped[b];
    }
    require(std::abs(acc.imag()) < 1e-10,
            "Pauli expectation has a non-real residue");
    return acc.real();
}

inline double expectation_x(const Statevector &sv, int qubit) {
    return expectation(sv, Pauli::X, qubit);
}

/// Finite-shot estimate of <X_qubit>: each shot draws the +1 outcome with
/// probability (1 + <X>)/2. Deterministic for a fixed RNG state.
inline double expectation_x_sampled(const Statevector &sv, int qubit,
                                    int shots, std::mt19937_64 &rng) {
    require(shots > 0, "shot count must be positive");
    const double p_plus = 0.5 * (1.0 + expectation_x(sv, qubit));
    std::bernoulli_distribution coin(std::clamp(p_plus, 0.0, 1.0));
    long plus = 0;
    for (int s = 0; s < shots; ++s) {
        plus += coin(rng) ? 1 : 0;
    }
    return double(2 * plus - shots) / double(shots);
}

// ---------------------------------------------------------------------------
// Circuit execution
// ---------------------------------------------------------------------------

inline void apply_gate(Statevector &sv, const GateDesc &g,
                       const Bindings &bindings) {
    switch (g.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: {
        const double a = resolve_angle(g.angle, bindings);
        apply_rotation(sv, g.kind, g.target, g.adjoint ? -a : a);
        break;
    }
    case GateKind::CNOT:
        apply_cnot(sv, g.control, g.target);
        break;
    case GateKind::QFT:
        apply_qft(sv, g.adjoint);
        break;
    }
}

inline Statevector run_circuit(const CircuitDesc &desc,
                               const Statevector &input,
                               const Bindings &bindings = {}) {
    require(desc.qubit_count == input.qubit_count(),
            "circuit and state qubit counts differ");
    Statevector sv = input;
    for (const auto &g : desc.gates) {
        apply_gate(sv, g, bindings);
    }
    return sv;
}

/// Reversed gate list with each gate marked adjoint. Running a circuit and
/// then its inverse under the same bindings reconstructs the input state.
inline CircuitDesc inverse_circuit(const CircuitDesc &desc) {
    CircuitDesc inv;
    inv.qubit_count = desc.qubit_count;
    inv.gates.reserve(desc.gates.size());
    for (auto it = desc.gates.rbegin(); it != desc.gates.rend(); ++it) {
        GateDesc g = *it;
        g.adjoint = !g.adjoint;
        inv.gates.push_back(g);
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

struct PauliObservable {
    Pauli pauli = Pauli::X;
    int qubit = 0;
};

/// d<O_m>/d(angle_k) for every symbolic rotation angle in the circuit.
/// `gate_indices[k]` is the circuit position the k-th column refers to; a
/// caller accumulates columns per parameter/feature source as needed.
struct Jacobian {
    std::vector<std::size_t> gate_indices;
    std::vector<std::vector<double>> d_expectation; // [observable][column]
};

namespace detail {

inline std::vector<std::size_t> symbolic_gate_indices(const CircuitDesc &desc) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < desc.gates.size(); ++i) {
        const auto &g = desc.gates[i];
        if (g.angle.symbolic()) {
            require(is_rotation(g.kind),
                    "gradient requested for a non-rotation gate");
            idx.push_back(i);
        }
    }
    return idx;
}

inline Pauli rotation_generator(GateKind k) {
    switch (k) {
    case GateKind::RX:
        return Pauli::X;
    case GateKind::RY:
        return Pauli::Y;
    case GateKind::RZ:
        return Pauli::Z;
    default:
        throw Error("gate has no rotation generator");
    }
}

inline void apply_gate_adjoint(Statevector &sv, const GateDesc &g,
                               const Bindings &bindings) {
    GateDesc inv = g;
    inv.adjoint = !inv.adjoint;
    apply_gate(sv, inv, bindings);
}

} // namespace detail

/// Adjoint-method Jacobian: one forward pass, then a reverse sweep that
/// keeps the ket and one bra per observable synchronized gate by gate.
inline Jacobian circuit_gradients(const CircuitDesc &desc,
                                  const Statevector &input,
                                  const Bindings &bindings,
                                  std::span<const PauliObservable> observables) {
    Jacobian jac;
    jac.gate_indices = detail::symbolic_gate_indices(desc);
    jac.d_expectation.assign(observables.size(),
                             std::vector<double>(jac.gate_indices.size(), 0.0));
    if (jac.gate_indices.empty()) {
        return jac;
    }

    Statevector ket = run_circuit(desc, input, bindings);
    std::vector<Statevector> bras;
    bras.reserve(observables.size());
    for (const auto &obs : observables) {
        Statevector bra = ket;
        apply_pauli(bra, obs.pauli, obs.qubit);
        bras.push_back(std::move(bra));
    }

    std::size_t col = jac.gate_indices.size();
    for (std::size_t i = desc.gates.size(); i-- > 0;) {
        const GateDesc &g = desc.gates[i];
        if (g.angle.symbolic()) {
            --col;
            Statevector mu = ket;
            apply_pauli(mu, detail::rotation_generator(g.kind), g.target);
            const double sign = g.adjoint ? -1.0 : 1.0;
            for (std::size_t m = 0; m < bras.size(); ++m) {
                Complex acc{0.0, 0.0};
                for (std::size_t b = 0; b < mu.size(); ++b) {
                    acc += std::conj(bras[m][b]) * mu[b];
                }
                // dE/da = 2 Re( <bra| (-i/2) P |ket> ) = Im(<bra|P|ket>);
                // an adjoint-marked gate applies -a, flipping the sign.
                jac.d_expectation[m][col] = sign * acc.imag();
            }
        }
        detail::apply_gate_adjoint(ket, g, bindings);
        for (auto &bra : bras) {
            detail::apply_gate_adjoint(bra, g, bindings);
        }
    }
    return jac;
}

/// Parameter-shift Jacobian: two circuit evaluations per symbolic angle at
/// +-pi/2. Independent of the adjoint path; used as a cross-check.
inline Jacobian
circuit_gradients_parameter_shift(const CircuitDesc &desc,
                                  const Statevector &input,
                                  const Bindings &bindings,
                                  std::span<const PauliObservable> observables) {
    Jacobian jac;
    jac.gate_indices = detail::symbolic_gate_indices(desc);
    jac.d_expectation.assign(observables.size(),
                             std::vector<double>(jac.gate_indices.size(), 0.0));

    auto run_shifted = [&](std::size_t gate_idx, double delta) {
        Statevector sv = input;
        for (std::size_t i = 0; i < desc.gates.size(); ++i) {
            const GateDesc &g = desc.gates[i];
            if (i == gate_idx) {
                // Shift the source angle, then apply the gate as usual so
                // the rule also holds for adjoint-marked gates.
                const double a = resolve_angle(g.angle, bindings) + delta;
                apply_rotation(sv, g.kind, g.target, g.adjoint ? -a : a);
            } else {
                apply_gate(sv, g, bindings);
            }
        }
        return sv;
    };

    const double shift = std::numbers::pi / 2.0;
    for (std::size_t k = 0; k < jac.gate_indices.size(); ++k) {
        const Statevector plus = run_shifted(jac.gate_indices[k], shift);
        const Statevector minus = run_shifted(jac.gate_indices[k], -shift);
        for (std::size_t m = 0; m < observables.size(); ++m) {
            const double ep =
                expectation(plus, observables[m].pauli, observables[m].qubit);
            const double em =
                expectation(minus, observables[m].pauli, observables[m].qubit);
            jac.d_expectation[m][k] = 0.5 * (ep - em);
        }
    }
    return jac;
}

} // namespace qgt::qsim
