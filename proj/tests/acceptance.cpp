// Acceptance gate: standalone end-to-end checks, one PASS/FAIL line per
// criterion. Tolerances are pinned as constants below. Exit code is 0 iff
// every hard criterion passes; the desk-scale check is soft and reported
// but never fails the gate on its own.
//
// Environment:
//   QGT_DATA_DIR    fixture directory (mc.tsv, yelp_synth.tsv,
//                   embeddings_50d.txt)
//   QGT_BIN         qgt CLI binary, used by the determinism and CLI checks
//   QGT_YELP_PATH   optional real review corpus (TSV) for the desk-scale
//                   check; defaults to the committed synthetic stand-in
//   QGT_GLOVE_PATH  optional real 50-dim embedding file for the same check

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qgt/circuits.hpp"
#include "qgt/io.hpp"
#include "qgt/model.hpp"
#include "qgt/qsim.hpp"
#include "qgt/textgraph.hpp"
#include "qgt/train.hpp"

namespace {

namespace fs = std::filesystem;
namespace qsim = qgt::qsim;
namespace circuits = qgt::circuits;
namespace textgraph = qgt::textgraph;
namespace model = qgt::model;
namespace train = qgt::train;

// Pinned tolerances and thresholds.
constexpr double kTolSim = 1e-10;        // simulator amplitude checks
constexpr double kTolMerge = 1e-12;      // encoding merge identity
constexpr double kTolRing = 1e-12;       // ring-CNOT basis permutation
constexpr double kTolOrigin = 1e-10;     // token_qk at the origin
constexpr double kTolAlphaRow = 1e-9;    // attention row sums
constexpr double kTolPerm = 1e-9;        // node-order invariance
constexpr double kTolBrute = 1e-9;       // layered vs brute-force logits
constexpr double kTolAdjointShift = 1e-9; // adjoint vs parameter-shift, abs
constexpr double kCircuitFdRel = 1e-5;   // circuit gradients vs central FD
constexpr double kCircuitFdFloor = 1e-7;
constexpr double kModelFdRel = 1e-4;     // model loss gradients vs central FD
constexpr double kModelFdFloor = 1e-6;
constexpr double kFdStep = 1e-5;
constexpr double kTrainAccTarget = 0.95; // learning-property accuracy bar
constexpr double kLossHalving = 0.5;     // best-epoch loss vs epoch-1 loss
constexpr double kDeskAccTarget = 0.77;  // desk-scale accuracy bar
constexpr double kSimBudgetSec = 1.0;
constexpr double kGradBudgetSec = 30.0;

int g_hard_failures = 0;
int g_soft_failures = 0;
fs::path g_tmp_root;

void report(int num, const char *name, bool pass, const std::string &detail,
            bool soft = false) {
    std::cout << (pass ? "PASS" : "FAIL") << " " << num << " " << name;
    if (soft) {
        std::cout << " [soft]";
    }
    if (!detail.empty()) {
        std::cout << ": " << detail;
    }
    std::cout << "\n" << std::flush;
    if (!pass) {
        (soft ? g_soft_failures : g_hard_failures) += 1;
    }
}

std::string require_env(const char *name) {
    const char *v = std::getenv(name);
    qgt::require(v != nullptr && *v != '\0',
                 qgt::detail::format("environment variable %s is not set",
                                     name));
    return v;
}

std::string data_path(const char *file) {
    return (fs::path(require_env("QGT_DATA_DIR")) / file).string();
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    qgt::require(in.good(), qgt::detail::format("cannot open '%s'",
                                                path.string().c_str()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string quoted(const std::string &s) { return "'" + s + "'"; }

/// Runs the CLI with stdout/stderr silenced; returns the exit code, or -1
/// if the process did not exit normally.
int run_cli(const std::string &cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    if (status == -1 || !WIFEXITED(status)) {
        return -1;
    }
    return WEXITSTATUS(status);
}

struct Timer {
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

train::GraphSplits load_mc_splits(std::uint64_t seed) {
    const auto table = textgraph::load_embeddings(
        data_path("embeddings_50d.txt"), textgraph::OovPolicy::ZeroVector, 0);
    const auto dataset = textgraph::load_dataset(
        data_path("mc.tsv"), textgraph::DatasetFormat::Mcrp);
    const auto splits =
        textgraph::split_dataset(dataset, 0.7, 0.1, 0.2, seed);
    const auto mode = textgraph::GraphMode::complete();
    return {train::build_graphs(splits.train, table, mode, 0),
            train::build_graphs(splits.val, table, mode, 0),
            train::build_graphs(splits.test, table, mode, 0)};
}

train::TrainConfig mc_train_config(std::uint64_t seed) {
    train::TrainConfig config; // defaults are the experiment hyperparameters
    config.seed = seed;
    config.model.kind = model::ModelKind::Quantum;
    return config;
}

std::vector<std::vector<double>> feature_rows(const Eigen::MatrixXd &m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].resize(
            static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                m(i, j);
        }
    }
    return rows;
}

textgraph::SentenceGraph random_complete_graph(int n_tokens, int d0,
                                               std::mt19937_64 &rng) {
    std::normal_distribution<double> feat(0.0, 0.6);
    textgraph::SentenceGraph g;
    g.label = static_cast<int>(rng() % 2);
    g.tokens.assign(static_cast<std::size_t>(n_tokens), "w");
    g.features.resize(n_tokens, d0);
    for (int r = 0; r < n_tokens; ++r) {
        for (int c = 0; c < d0; ++c) {
            g.features(r, c) = feat(rng);
        }
    }
    for (int i = 0; i < n_tokens; ++i) {
        for (int j = 0; j < n_tokens; ++j) {
            if (i != j) {
                g.edges.emplace_back(i, j);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// 1. Simulator correctness
// ---------------------------------------------------------------------------

bool criterion_simulator(std::string &detail) {
    const Timer timer;
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_int_distribution<int> qubit(0, 3);
    const qsim::GateKind rotations[3] = {qsim::GateKind::RX,
                                         qsim::GateKind::RY,
                                         qsim::GateKind::RZ};

    // QFT equals the DFT matrix, column by column, for 1..4 qubits.
    double worst_qft = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const std::size_t dim = std::size_t{1} << n;
        const oracle::Mat f = oracle::dft(dim);
        for (std::size_t col = 0; col < dim; ++col) {
            qsim::Statevector sv(n);
            sv[0] = 0.0;
            sv[col] = 1.0;
            qsim::apply_qft(sv);
            for (std::size_t row = 0; row < dim; ++row) {
                worst_qft = std::max(worst_qft,
                                     std::abs(sv[row] - f[row][col]));
            }
        }
    }

    // 1000 random gates preserve the norm.
    double worst_norm = 0.0;
    qsim::Statevector sv(4);
    std::uniform_int_distribution<int> pick(0, 99);
    for (int i = 0; i < 1000; ++i) {
        const int p = pick(rng);
        if (p < 70) {
            qsim::apply_rotation(sv, rotations[p % 3], qubit(rng), angle(rng));
        } else if (p < 95) {
            const int c = qubit(rng);
            int t = qubit(rng);
            if (t == c) {
                t = (t + 1) % 4;
            }
            qsim::apply_cnot(sv, c, t);
        } else {
            qsim::apply_qft(sv, p % 2 == 1);
        }
        worst_norm = std::max(worst_norm, std::abs(sv.norm() - 1.0));
    }

    // circuit then inverse circuit is the identity.
    double worst_rt = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        qsim::CircuitDesc desc;
        desc.qubit_count = 4;
        for (int g = 0; g < 80; ++g) {
            const int p = pick(rng);
            if (p < 70) {
                desc.gates.push_back(qsim::GateDesc::rotation(
                    rotations[p % 3], qubit(rng),
                    qsim::AngleSource::literal(angle(rng))));
            } else if (p < 95) {
                const int c = qubit(rng);
                int t = qubit(rng);
                if (t == c) {
                    t = (t + 1) % 4;
                }
                desc.gates.push_back(qsim::GateDesc::cnot(c, t));
            } else {
                desc.gates.push_back(qsim::GateDesc::qft());
            }
        }
        qsim::Statevector in(4);
        for (int g = 0; g < 12; ++g) {
            qsim::apply_rotation(in, rotations[g % 3], qubit(rng), angle(rng));
        }
        const qsim::Statevector mid = qsim::run_circuit(desc, in);
        const qsim::Statevector back =
            qsim::run_circuit(qsim::inverse_circuit(desc), mid);
        for (std::size_t b = 0; b < in.size(); ++b) {
            worst_rt = std::max(worst_rt, std::abs(back[b] - in[b]));
        }
    }

    const double secs = timer.seconds();
    detail = qgt::detail::format(
        "max qft diff %.2e, norm drift %.2e, round-trip diff %.2e (%.2fs)",
        worst_qft, worst_norm, worst_rt, secs);
    return worst_qft < kTolSim && worst_norm < kTolSim &&
           worst_rt < kTolSim && secs < kSimBudgetSec;
}

// ---------------------------------------------------------------------------
// 2. Gradient suite
// ---------------------------------------------------------------------------

bool criterion_gradients(std::string &detail) {
    const Timer timer;
    std::mt19937_64 rng(202);

    // 100 token circuits: adjoint vs parameter-shift vs central differences
    // on every observable/angle pair.
    const qsim::CircuitDesc desc = circuits::build_token_circuit(16);
    std::vector<qsim::PauliObservable> obs;
    for (int q = 0; q < 4; ++q) {
        obs.push_back({qsim::Pauli::X, q});
    }

    double worst_shift = 0.0;
    int fd_misses = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> x = oracle::random_vector(16, rng, -1.0, 1.0);
        const std::vector<double> p = oracle::random_vector(16, rng);
        const qsim::Bindings bind{p, x};
        const qsim::Statevector in = qsim::zero_state(4);
        const qsim::Jacobian adj =
            qsim::circuit_gradients(desc, in, bind, obs);
        const qsim::Jacobian shift =
            qsim::circuit_gradients_parameter_shift(desc, in, bind, obs);
        for (std::size_t o = 0; o < obs.size(); ++o) {
            for (std::size_t c = 0; c < adj.gate_indices.size(); ++c) {
                worst_shift = std::max(
                    worst_shift, std::abs(adj.d_expectation[o][c] -
                                          shift.d_expectation[o][c]));
            }
        }
        for (std::size_t c = 0; c < adj.gate_indices.size(); ++c) {
            const qsim::AngleSource &src =
                desc.gates[adj.gate_indices[c]].angle;
            auto expectations_at = [&](double delta) {
                std::vector<double> px = p;
                std::vector<double> xx = x;
                if (src.kind == qsim::AngleSource::Kind::Param) {
                    px[static_cast<std::size_t>(src.param_index)] += delta;
                } else {
                    xx[static_cast<std::size_t>(src.feature_begin)] += delta;
                }
                const qsim::Statevector out =
                    qsim::run_circuit(desc, in, {px, xx});
                std::vector<double> e(obs.size());
                for (std::size_t o = 0; o < obs.size(); ++o) {
                    e[o] = qsim::expectation(out, obs[o].pauli, obs[o].qubit);
                }
                return e;
            };
            const std::vector<double> plus = expectations_at(kFdStep);
            const std::vector<double> minus = expectations_at(-kFdStep);
            for (std::size_t o = 0; o < obs.size(); ++o) {
                const double fd = (plus[o] - minus[o]) / (2.0 * kFdStep);
                if (!oracle::close(adj.d_expectation[o][c], fd, kCircuitFdRel,
                                   kCircuitFdFloor) ||
                    !oracle::close(shift.d_expectation[o][c], fd,
                                   kCircuitFdRel, kCircuitFdFloor)) {
                    ++fd_misses;
                }
            }
        }
    }

    // Whole-model loss gradients vs central differences on 10 random
    // sentences of 1..3 tokens, every parameter checked.
    int model_misses = 0;
    model::ModelConfig mc;
    mc.kind = model::ModelKind::Quantum;
    mc.d0 = 8;
    for (int trial = 0; trial < 10; ++trial) {
        const textgraph::SentenceGraph g =
            random_complete_graph(1 + trial % 3, mc.d0, rng);
        train::TrainConfig tc;
        tc.model = mc;
        tc.init_std = 0.2;
        tc.seed = 4000 + static_cast<std::uint64_t>(trial);
        model::ModelParams params = train::init_params(tc);
        const model::ForwardCache cache = model::forward(mc, params, g);
        model::ModelParams grads = model::backward(mc, params, cache, g.label);

        auto pviews = model::tensor_views(params);
        auto gviews = model::tensor_views(grads);
        auto loss_now = [&]() {
            return model::cross_entropy(model::forward(mc, params, g).logits,
                                        g.label);
        };
        for (std::size_t t = 0; t < pviews.size(); ++t) {
            for (std::size_t i = 0; i < pviews[t].size(); ++i) {
                const double orig = pviews[t][i];
                pviews[t][i] = orig + kFdStep;
                const double lp = loss_now();
                pviews[t][i] = orig - kFdStep;
                const double lm = loss_now();
                pviews[t][i] = orig;
                const double fd = (lp - lm) / (2.0 * kFdStep);
                if (!oracle::close(gviews[t][i], fd, kModelFdRel,
                                   kModelFdFloor)) {
                    ++model_misses;
                }
            }
        }
    }

    const double secs = timer.seconds();
    detail = qgt::detail::format(
        "adjoint vs shift max %.2e, circuit FD misses %d, model FD misses "
        "%d (%.1fs)",
        worst_shift, fd_misses, model_misses, secs);
    return worst_shift < kTolAdjointShift && fd_misses == 0 &&
           model_misses == 0 && secs < kGradBudgetSec;
}

// ---------------------------------------------------------------------------
// 3. Structural oracles
// ---------------------------------------------------------------------------

bool criterion_structure(std::string &detail) {
    std::mt19937_64 rng(303);

    // Merged encoding equals one literal RY per feature.
    double worst_merge = 0.0;
    const qsim::CircuitDesc enc = circuits::build_encoding(16);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> x = oracle::random_vector(16, rng, -1.0, 1.0);
        qsim::CircuitDesc lit;
        lit.qubit_count = 4;
        for (int k = 0; k < 4; ++k) {
            for (int j = 4 * k; j < 4 * k + 4; ++j) {
                lit.gates.push_back(qsim::GateDesc::rotation(
                    qsim::GateKind::RY, k,
                    qsim::AngleSource::literal(x[static_cast<std::size_t>(j)])));
            }
        }
        for (int k = 0; k < 4; ++k) {
            lit.gates.push_back(qsim::GateDesc::cnot(k, (k + 1) % 4));
        }
        const qsim::Statevector merged =
            qsim::run_circuit(enc, qsim::zero_state(4), {{}, x});
        const qsim::Statevector unmerged =
            qsim::run_circuit(lit, qsim::zero_state(4));
        for (std::size_t b = 0; b < merged.size(); ++b) {
            worst_merge =
                std::max(worst_merge, std::abs(merged[b] - unmerged[b]));
        }
    }

    // Ring of CNOTs permutes |1000> to |0111>.
    qsim::Statevector ring(4);
    ring[0] = 0.0;
    ring[8] = 1.0;
    for (int k = 0; k < 4; ++k) {
        qsim::apply_cnot(ring, k, (k + 1) % 4);
    }
    double ring_err = std::abs(ring[7] - 1.0);
    for (std::size_t b = 0; b < ring.size(); ++b) {
        if (b != 7) {
            ring_err = std::max(ring_err, std::abs(ring[b]));
        }
    }

    // token_qk at the origin is all ones.
    const std::vector<double> zeros16(16, 0.0);
    const std::vector<double> qk0 = circuits::token_qk(zeros16, zeros16);
    double origin_err = 0.0;
    for (const double v : qk0) {
        origin_err = std::max(origin_err, std::abs(v - 1.0));
    }

    // Attention rows sum to one on every batch of a real training run.
    std::size_t rows_checked = 0;
    double worst_row = 0.0;
    {
        train::TrainConfig tc = mc_train_config(1);
        tc.max_epochs = 3;
        tc.patience = 3;
        const train::GraphSplits splits = load_mc_splits(tc.seed);
        train::FitHooks hooks;
        hooks.on_forward = [&](const model::ForwardCache &cache) {
            for (const auto &layer : cache.layers) {
                for (const auto &row : layer.alpha) {
                    if (row.empty()) {
                        continue; // node without in-neighbors
                    }
                    double sum = 0.0;
                    for (const double a : row) {
                        sum += a;
                    }
                    worst_row = std::max(worst_row, std::abs(sum - 1.0));
                    ++rows_checked;
                }
            }
        };
        (void)train::fit(tc, splits, hooks);
    }
    // 3 epochs over 91 four-token sentences: every row must be seen.
    const std::size_t rows_expected = 3 * 91 * 4;

    // Complete-graph logits are invariant to node order, both model kinds.
    double perm_err = 0.0;
    for (const auto kind :
         {model::ModelKind::Quantum, model::ModelKind::Classical}) {
        model::ModelConfig mc;
        mc.kind = kind;
        mc.d0 = 6;
        train::TrainConfig tc;
        tc.model = mc;
        tc.init_std = 0.2;
        tc.seed = 77;
        const model::ModelParams params = train::init_params(tc);
        const textgraph::SentenceGraph g = random_complete_graph(4, mc.d0, rng);
        textgraph::SentenceGraph permuted = g;
        const int perm[4] = {2, 0, 3, 1};
        for (int i = 0; i < 4; ++i) {
            permuted.features.row(i) = g.features.row(perm[i]);
        }
        const Eigen::VectorXd a = model::forward(mc, params, g).logits;
        const Eigen::VectorXd b = model::forward(mc, params, permuted).logits;
        perm_err = std::max(perm_err, (a - b).cwiseAbs().maxCoeff());
    }

    detail = qgt::detail::format(
        "merge %.2e, ring %.2e, origin %.2e, row sums %.2e over %zu rows, "
        "node-order %.2e",
        worst_merge, ring_err, origin_err, worst_row, rows_checked, perm_err);
    return worst_merge < kTolMerge && ring_err < kTolRing &&
           origin_err < kTolOrigin && worst_row < kTolAlphaRow &&
           rows_checked >= rows_expected && perm_err < kTolPerm;
}

// ---------------------------------------------------------------------------
// 4. Small-instance brute force
// ---------------------------------------------------------------------------

bool criterion_bruteforce(std::string &detail) {
    const auto table = textgraph::load_embeddings(
        data_path("embeddings_50d.txt"), textgraph::OovPolicy::ZeroVector, 0);
    const auto dataset = textgraph::load_dataset(
        data_path("mc.tsv"), textgraph::DatasetFormat::Mcrp);
    qgt::require(dataset.samples.size() >= 20, "fixture needs 20 sentences");

    double worst = 0.0;
    int graphs_checked = 0;
    for (const auto kind :
         {model::ModelKind::Quantum, model::ModelKind::Classical}) {
        model::ModelConfig mc;
        mc.kind = kind;
        train::TrainConfig tc;
        tc.model = mc;
        tc.init_std = 0.15;
        tc.seed = 5050 + static_cast<std::uint64_t>(graphs_checked);
        const model::ModelParams params = train::init_params(tc);
        for (int s = 0; s < 20; ++s) {
            auto tokens = textgraph::tokenize(
                dataset.samples[static_cast<std::size_t>(s)].first);
            tokens.resize(s % 2 == 0 ? 2 : 3); // fixture rows have 4 tokens
            const auto g = textgraph::build_graph(
                tokens, table, textgraph::GraphMode::complete(),
                dataset.samples[static_cast<std::size_t>(s)].second);
            const Eigen::VectorXd got = model::forward(mc, params, g).logits;
            const std::vector<double> want =
                oracle::model_logits(mc, params, feature_rows(g.features));
            for (Eigen::Index c = 0; c < got.size(); ++c) {
                worst = std::max(
                    worst, std::abs(got[c] -
                                    want[static_cast<std::size_t>(c)]));
            }
            ++graphs_checked;
        }
    }

    detail = qgt::detail::format(
        "max logit diff %.2e across %d sentence graphs (both model kinds)",
        worst, graphs_checked);
    return worst < kTolBrute && graphs_checked == 40;
}

// ---------------------------------------------------------------------------
// 5. Learning property
// ---------------------------------------------------------------------------

bool criterion_learning(std::string &detail) {
    const Timer timer;
    int ok_seeds = 0;
    std::ostringstream per_seed;
    for (int s = 1; s <= 3; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        const train::TrainConfig tc = mc_train_config(seed);
        const train::GraphSplits splits = load_mc_splits(seed);
        const train::FitResult fitted = train::fit(tc, splits);
        double best_acc = 0.0;
        for (const auto &m : fitted.metrics) {
            best_acc = std::max(best_acc, m.train_acc);
        }
        const double first_loss = fitted.metrics.front().train_loss;
        const double best_loss =
            fitted.metrics[static_cast<std::size_t>(fitted.best_epoch - 1)]
                .train_loss;
        const bool acc_ok = best_acc >= kTrainAccTarget;
        const bool loss_ok = best_loss <= kLossHalving * first_loss;
        if (acc_ok && loss_ok) {
            ++ok_seeds;
        }
        per_seed << qgt::detail::format(
            " seed%d acc=%.3f loss %.3f->%.3f %s", s, best_acc, first_loss,
            best_loss, acc_ok && loss_ok ? "ok" : "MISS");
    }
    detail = qgt::detail::format("%d/3 seeds hit acc>=%.2f with best-epoch "
                                 "loss<=%.0f%% of epoch 1;%s (%.1fs)",
                                 ok_seeds, kTrainAccTarget,
                                 100.0 * kLossHalving,
                                 per_seed.str().c_str(), timer.seconds());
    return ok_seeds >= 2;
}

// ---------------------------------------------------------------------------
// 6. Desk-scale review corpus (soft)
// ---------------------------------------------------------------------------

bool criterion_desk_scale(std::string &detail) {
    const Timer timer;
    const char *yelp_env = std::getenv("QGT_YELP_PATH");
    const char *glove_env = std::getenv("QGT_GLOVE_PATH");
    const std::string corpus =
        yelp_env != nullptr ? yelp_env : data_path("yelp_synth.tsv");
    const std::string embeddings =
        glove_env != nullptr ? glove_env : data_path("embeddings_50d.txt");
    const bool stand_in = yelp_env == nullptr;

    const auto table = textgraph::load_embeddings(
        embeddings, textgraph::OovPolicy::ZeroVector, 0);
    const auto dataset =
        textgraph::load_dataset(corpus, textgraph::DatasetFormat::Tsv);

    double best_q = 0.0;
    double sum_q = 0.0;
    double sum_c = 0.0;
    std::ostringstream per_seed;
    for (int s = 1; s <= 3; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        train::TrainConfig tc;
        tc.seed = seed;
        tc.model.kind = model::ModelKind::Quantum;
        tc.model.d0 = table.dimension();
        tc.model.class_count = dataset.class_count;
        const auto splits =
            textgraph::split_dataset(dataset, 0.7, 0.1, 0.2, seed);
        const auto mode = textgraph::GraphMode::complete();
        const train::GraphSplits graphs{
            train::build_graphs(splits.train, table, mode, 0),
            train::build_graphs(splits.val, table, mode, 0),
            train::build_graphs(splits.test, table, mode, 0)};
        const auto rows =
            train::sample_efficiency_sweep(tc, graphs, {0.3});
        best_q = std::max(best_q, rows[0].qgt_acc);
        sum_q += rows[0].qgt_acc;
        sum_c += rows[0].classical_acc;
        per_seed << qgt::detail::format(" seed%d q=%.3f c=%.3f", s,
                                        rows[0].qgt_acc,
                                        rows[0].classical_acc);
    }
    const double mean_q = sum_q / 3.0;
    const double mean_c = sum_c / 3.0;

    detail = qgt::detail::format(
        "%s, 30%% fraction:%s; best q=%.3f (target %.2f), mean q=%.3f vs "
        "c=%.3f (%.0fs)",
        stand_in ? "synthetic stand-in corpus" : "override corpus",
        per_seed.str().c_str(), best_q, kDeskAccTarget, mean_q, mean_c,
        timer.seconds());
    return best_q >= kDeskAccTarget && mean_q >= mean_c;
}

// ---------------------------------------------------------------------------
// 7. CLI determinism
// ---------------------------------------------------------------------------

fs::path write_mc_run_config(const fs::path &dir) {
    const fs::path cfg = dir / "run.cfg";
    std::string text;
    text += "dataset = " + data_path("mc.tsv") + "\n";
    text += "embeddings = " + data_path("embeddings_50d.txt") + "\n";
    text += "format = mcrp\n";
    text += "max_epochs = 6\n";
    text += "seed = 11\n";
    qgt::io::write_text_file(cfg.string(), text);
    return cfg;
}

bool criterion_determinism(std::string &detail) {
    const std::string bin = require_env("QGT_BIN");
    const fs::path dir = g_tmp_root / "determinism";
    fs::create_directories(dir);
    const fs::path cfg = write_mc_run_config(dir);
    const fs::path out1 = dir / "run1";
    const fs::path out2 = dir / "run2";

    const std::string base =
        quoted(bin) + " train --config " + quoted(cfg.string()) + " --out ";
    const int rc1 = run_cli(base + quoted(out1.string()));
    const int rc2 = run_cli(base + quoted(out2.string()));
    if (rc1 != 0 || rc2 != 0) {
        detail = qgt::detail::format("train exit codes %d and %d, expected 0",
                                     rc1, rc2);
        return false;
    }
    const std::string metrics1 = slurp(out1 / "metrics.csv");
    const std::string ckpt1 = slurp(out1 / "checkpoint.qgt");
    const bool metrics_same = metrics1 == slurp(out2 / "metrics.csv");
    const bool ckpt_same = ckpt1 == slurp(out2 / "checkpoint.qgt");

    detail = qgt::detail::format(
        "metrics.csv %s (%zu bytes), checkpoint.qgt %s (%zu bytes)",
        metrics_same ? "identical" : "DIFFER", metrics1.size(),
        ckpt_same ? "identical" : "DIFFER", ckpt1.size());
    return metrics_same && ckpt_same && !metrics1.empty() && !ckpt1.empty();
}

// ---------------------------------------------------------------------------
// 8. Checkpoint round trip and CLI error contracts
// ---------------------------------------------------------------------------

bool criterion_cli_contracts(std::string &detail) {
    const std::string bin = require_env("QGT_BIN");
    const fs::path dir = g_tmp_root / "cli";
    fs::create_directories(dir);
    const fs::path cfg = write_mc_run_config(dir);
    const fs::path out = dir / "run";
    const std::string mc = quoted(data_path("mc.tsv"));
    const std::string emb = quoted(data_path("embeddings_50d.txt"));

    const int train_rc =
        run_cli(quoted(bin) + " train --config " + quoted(cfg.string()) +
                " --out " + quoted(out.string()));
    const fs::path ckpt = out / "checkpoint.qgt";

    bool roundtrip = false;
    if (train_rc == 0 && fs::exists(ckpt)) {
        const qgt::io::Checkpoint loaded =
            qgt::io::load_checkpoint(ckpt.string());
        const fs::path copy = dir / "copy.qgt";
        qgt::io::save_checkpoint(copy.string(), loaded);
        roundtrip = slurp(ckpt) == slurp(copy) && !slurp(ckpt).empty();
    }

    const int eval_rc = run_cli(quoted(bin) + " eval " +
                                quoted(ckpt.string()) + " --dataset " + mc +
                                " --embeddings " + emb + " --split test");
    const int attn_rc = run_cli(quoted(bin) + " attn " +
                                quoted(ckpt.string()) +
                                " 'time flies like an arrow' --embeddings " +
                                emb);
    const fs::path missing_out = dir / "missing-embeddings";
    const int missing_rc =
        run_cli(quoted(bin) + " train --config " + quoted(cfg.string()) +
                " --embeddings /nonexistent-embeddings.txt --out " +
                quoted(missing_out.string()));
    const bool no_partial_output = !fs::exists(missing_out);
    const int badflag_rc = run_cli(quoted(bin) + " train --config " +
                                   quoted(cfg.string()) + " --bogus");
    const int empty_rc = run_cli(quoted(bin) + " attn " +
                                 quoted(ckpt.string()) +
                                 " '!!!' --embeddings " + emb);
    const int help_rc = run_cli(quoted(bin) + " --help");

    detail = qgt::detail::format(
        "train=%d eval=%d attn=%d roundtrip=%s; missing-embeddings=%d "
        "(no output dir: %s) bad-flag=%d empty-sentence=%d help=%d",
        train_rc, eval_rc, attn_rc, roundtrip ? "ok" : "FAIL", missing_rc,
        no_partial_output ? "yes" : "NO", badflag_rc, empty_rc, help_rc);
    return train_rc == 0 && eval_rc == 0 && attn_rc == 0 && roundtrip &&
           missing_rc == 2 && no_partial_output && badflag_rc == 2 &&
           empty_rc == 1 && help_rc == 0;
}

struct Criterion {
    int num;
    const char *name;
    bool soft;
    std::function<bool(std::string &)> fn;
};

} // namespace

int main() {
    std::cout << "qgt acceptance gate\n";
    g_tmp_root = fs::temp_directory_path() /
                 qgt::detail::format("qgt-acceptance-%ld",
                                     static_cast<long>(getpid()));
    std::error_code ec;
    fs::remove_all(g_tmp_root, ec);
    fs::create_directories(g_tmp_root);

    const std::vector<Criterion> criteria = {
        {1, "simulator", false, criterion_simulator},
        {2, "gradients", false, criterion_gradients},
        {3, "structure", false, criterion_structure},
        {4, "brute-force", false, criterion_bruteforce},
        {5, "learning", false, criterion_learning},
        {6, "desk-scale", true, criterion_desk_scale},
        {7, "determinism", false, criterion_determinism},
        {8, "cli-contracts", false, criterion_cli_contracts},
    };
    for (const Criterion &c : criteria) {
        std::string detail;
        bool pass = false;
        try {
            pass = c.fn(detail);
        } catch (const std::exception &e) {
            detail = std::string("exception: ") + e.what();
            pass = false;
        }
        report(c.num, c.name, pass, detail, c.soft);
    }

    fs::remove_all(g_tmp_root, ec);
    if (g_hard_failures == 0) {
        std::cout << "acceptance: all hard criteria passed";
        if (g_soft_failures > 0) {
            std::cout << " (" << g_soft_failures
                      << " soft criterion needs investigation)";
        }
        std::cout << "\n";
        return 0;
    }
    std::cout << "acceptance: " << g_hard_failures
              << " hard criterion failure(s)\n";
    return 1;
}
