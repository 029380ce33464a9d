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
//
// qgt: command-line experiments for the quantum graph transformer.
//
//   qgt train   --config run.cfg [overrides]      fit one model
//   qgt eval    CHECKPOINT --dataset D --embeddings E [--split S]
//   qgt attn    CHECKPOINT SENTENCE --embeddings E [--out DIR]
//   qgt compare --config run.cfg [overrides]      quantum vs classical
//   qgt sweep   --config run.cfg [--fractions L]  sample-efficiency curve
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration/IO error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "qgt/io.hpp"
#include "qgt/model.hpp"
#include "qgt/textgraph.hpp"
#include "qgt/train.hpp"

namespace {

namespace fs = std::filesystem;
using qgt::format_double;

struct Overrides {
    std::string config_path;
    std::string out;
    std::string dataset;
    std::string embeddings;
    std::string model;
    std::string graph;
    std::string fractions;
    long long seed = 0;
    bool has_seed = false;
};

qgt::io::RunConfig merged_config(const Overrides &ov) {
    qgt::io::RunConfig rc;
    if (!ov.config_path.empty()) {
        rc = qgt::io::parse_run_config(ov.config_path);
    }
    if (!ov.out.empty()) {
        rc.out_dir = ov.out;
    }
    if (!ov.dataset.empty()) {
        rc.dataset_path = ov.dataset;
    }
    if (!ov.embeddings.empty()) {
        rc.embeddings_path = ov.embeddings;
    }
    if (!ov.model.empty()) {
        rc.train.model.kind = qgt::model::parse_model_kind(ov.model);
    }
    if (!ov.graph.empty()) {
        rc.train.graph_mode = qgt::textgraph::parse_graph_mode(ov.graph);
    }
    if (!ov.fractions.empty()) {
        rc.fractions = qgt::io::parse_fractions(ov.fractions);
    }
    if (ov.has_seed) {
        qgt::require_config(ov.seed >= 0, "--seed must be non-negative");
        rc.train.seed = static_cast<std::uint64_t>(ov.seed);
    }
    return rc;
}

/// Loaded corpus, splits and prebuilt graphs for one experiment. All input
/// validation happens here, before any output file is touched.
struct Experiment {
    qgt::io::RunConfig rc;
    qgt::textgraph::EmbeddingTable table;
    qgt::textgraph::Dataset dataset;
    qgt::textgraph::Splits splits;
    qgt::train::GraphSplits graphs;
};

Experiment load_experiment(qgt::io::RunConfig rc) {
    qgt::require_config(!rc.dataset_path.empty(),
                        "no dataset path (config key 'dataset' or --dataset)");
    qgt::require_config(!rc.embeddings_path.empty(),
                        "no embeddings path (config key 'embeddings' or "
                        "--embeddings)");
    qgt::require_config(fs::exists(rc.dataset_path),
                        qgt::detail::format("dataset file '%s' does not exist",
                                            rc.dataset_path.c_str()));
    qgt::require_config(fs::exists(rc.embeddings_path),
                        qgt::detail::format(
                            "embeddings file '%s' does not exist",
                            rc.embeddings_path.c_str()));

    auto table = qgt::textgraph::load_embeddings(
        rc.embeddings_path, qgt::io::parse_oov_policy(rc.oov_policy),
        rc.oov_seed);
    auto dataset = qgt::textgraph::load_dataset(
        rc.dataset_path, qgt::io::parse_dataset_format(rc.dataset_format));
    qgt::require_config(dataset.class_count >= 2,
                        qgt::detail::format("dataset '%s' has %d class(es); "
                                            "need at least 2",
                                            dataset.name.c_str(),
                                            dataset.class_count));
    rc.train.model.d0 = table.dimension();
    rc.train.model.class_count = dataset.class_count;
    rc.train.validate();

    auto splits = qgt::textgraph::split_dataset(
        dataset, rc.train_ratio, rc.val_ratio, rc.test_ratio, rc.train.seed);
    qgt::train::GraphSplits graphs{
        qgt::train::build_graphs(splits.train, table, rc.train.graph_mode,
                                 rc.train.max_tokens),
        qgt::train::build_graphs(splits.val, table, rc.train.graph_mode,
                                 rc.train.max_tokens),
        qgt::train::build_graphs(splits.test, table, rc.train.graph_mode,
                                 rc.train.max_tokens)};
    return {std::move(rc), std::move(table), std::move(dataset),
            std::move(splits), std::move(graphs)};
}

nlohmann::ordered_json split_summary(const Experiment &ex) {
    nlohmann::ordered_json j;
    j["sizes"] = {{"train", ex.splits.train.samples.size()},
                  {"val", ex.splits.val.samples.size()},
                  {"test", ex.splits.test.samples.size()}};
    j["hashes"] = {
        {"train",
         qgt::io::hex_hash(qgt::textgraph::dataset_fingerprint(ex.splits.train))},
        {"val",
         qgt::io::hex_hash(qgt::textgraph::dataset_fingerprint(ex.splits.val))},
        {"test",
         qgt::io::hex_hash(qgt::textgraph::dataset_fingerprint(ex.splits.test))}};
    return j;
}

nlohmann::ordered_json run_manifest(const char *command, const Experiment &ex,
                                    const qgt::io::RunConfig &rc,
                                    const qgt::train::FitResult &fitted,
                                    const qgt::train::EpochResult &test) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["dataset"] = rc.dataset_path;
    j["dataset_name"] = ex.dataset.name;
    j["embeddings"] = rc.embeddings_path;
    j["classes"] = ex.dataset.class_count;
    j["seed"] = rc.train.seed;
    j["config"] = qgt::io::manifest_config(rc);
    j["split"] = split_summary(ex);
    j["epochs_run"] = fitted.metrics.size();
    j["best_epoch"] = fitted.best_epoch;
    j["test_loss"] = test.loss;
    j["test_accuracy"] = test.accuracy;
    return j;
}

qgt::io::Checkpoint make_checkpoint(const qgt::io::RunConfig &rc,
                                    qgt::model::ModelParams params) {
    qgt::io::Checkpoint ckpt;
    ckpt.config = rc.train.model;
    ckpt.graph_mode = rc.train.graph_mode;
    ckpt.seed = rc.train.seed;
    ckpt.train_ratio = rc.train_ratio;
    ckpt.val_ratio = rc.val_ratio;
    ckpt.test_ratio = rc.test_ratio;
    ckpt.max_tokens = rc.train.max_tokens;
    ckpt.oov_policy = rc.oov_policy;
    ckpt.oov_seed = rc.oov_seed;
    ckpt.dataset_format = rc.dataset_format;
    ckpt.params = std::move(params);
    return ckpt;
}

int run_train(const Overrides &ov) {
    Experiment ex = load_experiment(merged_config(ov));
    const qgt::io::RunConfig &rc = ex.rc;

    const qgt::train::FitResult fitted = qgt::train::fit(rc.train, ex.graphs);
    const qgt::train::EpochResult test =
        qgt::train::evaluate(rc.train.model, fitted.params, ex.graphs.test);

    fs::create_directories(rc.out_dir);
    const fs::path out(rc.out_dir);
    qgt::io::write_text_file((out / "metrics.csv").string(),
                             qgt::io::metrics_csv(fitted.metrics));
    qgt::io::save_checkpoint((out / "checkpoint.qgt").string(),
                             make_checkpoint(rc, fitted.params));
    qgt::io::write_manifest((out / "manifest.json").string(),
                            run_manifest("train", ex, rc, fitted, test));

    std::cout << "dataset: " << ex.dataset.name << " ("
              << ex.dataset.samples.size() << " samples, "
              << ex.dataset.class_count << " classes)\n"
              << "model: " << qgt::model::to_string(rc.train.model.kind)
              << " graph: " << rc.train.graph_mode.to_string() << " seed: "
              << rc.train.seed << "\n"
              << "split: train=" << ex.splits.train.samples.size()
              << " val=" << ex.splits.val.samples.size()
              << " test=" << ex.splits.test.samples.size() << "\n"
              << "epochs_run: " << fitted.metrics.size()
              << " best_epoch: " << fitted.best_epoch << "\n"
              << "test_loss: " << format_double(test.loss) << "\n"
              << "test_accuracy: " << format_double(test.accuracy) << "\n"
              << "out: " << rc.out_dir << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string dataset;
    std::string embeddings;
    std::string split = "all";
};

int run_eval(const EvalArgs &args) {
    const qgt::io::Checkpoint ckpt = qgt::io::load_checkpoint(args.checkpoint);
    qgt::require_config(fs::exists(args.dataset),
                        qgt::detail::format("dataset file '%s' does not exist",
                                            args.dataset.c_str()));
    qgt::require_config(fs::exists(args.embeddings),
                        qgt::detail::format(
                            "embeddings file '%s' does not exist",
                            args.embeddings.c_str()));
    const auto table = qgt::textgraph::load_embeddings(
        args.embeddings, qgt::io::parse_oov_policy(ckpt.oov_policy),
        ckpt.oov_seed);
    qgt::require_config(
        table.dimension() == ckpt.config.d0,
        qgt::detail::format("embedding dimension mismatch: checkpoint "
                            "expects %d, file has %d",
                            ckpt.config.d0, table.dimension()));
    const auto dataset = qgt::textgraph::load_dataset(
        args.dataset, qgt::io::parse_dataset_format(ckpt.dataset_format));
    qgt::require_config(
        dataset.class_count == ckpt.config.class_count,
        qgt::detail::format("class count mismatch: checkpoint expects %d, "
                            "dataset has %d",
                            ckpt.config.class_count, dataset.class_count));

    qgt::textgraph::Dataset chosen;
    if (args.split == "all") {
        chosen = dataset;
    } else {
        const auto splits = qgt::textgraph::split_dataset(
            dataset, ckpt.train_ratio, ckpt.val_ratio, ckpt.test_ratio,
            ckpt.seed);
        if (args.split == "train") {
            chosen = splits.train;
        } else if (args.split == "val") {
            chosen = splits.val;
        } else if (args.split == "test") {
            chosen = splits.test;
        } else {
            throw qgt::ConfigError(qgt::detail::format(
                "bad --split '%s' (expected all|train|val|test)",
                args.split.c_str()));
        }
    }

    const auto graphs = qgt::train::build_graphs(
        chosen, table, ckpt.graph_mode, ckpt.max_tokens);
    const auto result =
        qgt::train::evaluate(ckpt.config, ckpt.params, graphs);
    std::cout << "split: " << args.split << " (" << graphs.size()
              << " samples)\n"
              << "loss: " << format_double(result.loss) << "\n"
              << "accuracy: " << format_double(result.accuracy) << "\n";
    return 0;
}

struct AttnArgs {
    std::string checkpoint;
    std::string sentence;
    std::string embeddings;
    std::string out;
};

int run_attn(const AttnArgs &args) {
    const qgt::io::Checkpoint ckpt = qgt::io::load_checkpoint(args.checkpoint);
    qgt::require_config(fs::exists(args.embeddings),
                        qgt::detail::format(
                            "embeddings file '%s' does not exist",
                            args.embeddings.c_str()));
    const auto table = qgt::textgraph::load_embeddings(
        args.embeddings, qgt::io::parse_oov_policy(ckpt.oov_policy),
        ckpt.oov_seed);
    qgt::require_config(
        table.dimension() == ckpt.config.d0,
        qgt::detail::format("embedding dimension mismatch: checkpoint "
                            "expects %d, file has %d",
                            ckpt.config.d0, table.dimension()));

    std::vector<std::string> tokens = qgt::textgraph::tokenize(args.sentence);
    if (ckpt.max_tokens > 0 &&
        tokens.size() > static_cast<std::size_t>(ckpt.max_tokens)) {
        tokens.resize(static_cast<std::size_t>(ckpt.max_tokens));
    }
    const auto graph =
        qgt::textgraph::build_graph(tokens, table, ckpt.graph_mode, 0);
    const auto cache = qgt::model::forward(ckpt.config, ckpt.params, graph);

    // Last layer's attention, densified: 0 on the diagonal and off-edges.
    const std::size_t n = tokens.size();
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto &lc = cache.layers.back();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t idx = 0; idx < cache.nbrs[i].size(); ++idx) {
            dense(static_cast<Eigen::Index>(i), cache.nbrs[i][idx]) =
                lc.alpha[i][idx];
        }
    }

    std::ostringstream csv;
    for (const auto &token : tokens) {
        csv << "," << token;
    }
    csv << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        csv << tokens[i];
        for (std::size_t j = 0; j < n; ++j) {
            csv << ","
                << format_double(dense(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(j)));
        }
        csv << "\n";
    }

    std::cout << "prediction: " << qgt::model::argmax_lowest(cache.logits)
              << "\n"
              << csv.str();
    if (!args.out.empty()) {
        fs::create_directories(args.out);
        qgt::io::write_text_file(
            (fs::path(args.out) / "attention.csv").string(), csv.str());
    }
    return 0;
}

int run_compare(const Overrides &ov) {
    Experiment ex = load_experiment(merged_config(ov));
    const qgt::io::RunConfig &rc = ex.rc;

    double accuracy[2] = {0.0, 0.0};
    nlohmann::ordered_json manifests[2];
    const qgt::model::ModelKind kinds[2] = {qgt::model::ModelKind::Quantum,
                                            qgt::model::ModelKind::Classical};
    for (int k = 0; k < 2; ++k) {
        qgt::io::RunConfig run = rc;
        run.train.model.kind = kinds[k];
        const auto fitted = qgt::train::fit(run.train, ex.graphs);
        const auto test =
            qgt::train::evaluate(run.train.model, fitted.params, ex.graphs.test);
        accuracy[k] = test.accuracy;
        manifests[k] = run_manifest("compare", ex, run, fitted, test);
    }

    fs::create_directories(rc.out_dir);
    const fs::path out(rc.out_dir);
    qgt::io::write_manifest((out / "manifest_quantum.json").string(),
                            manifests[0]);
    qgt::io::write_manifest((out / "manifest_classical.json").string(),
                            manifests[1]);

    std::cout << "qgt_accuracy=" << format_double(accuracy[0]) << "\n"
              << "classical_accuracy=" << format_double(accuracy[1]) << "\n"
              << "delta=" << format_double(accuracy[0] - accuracy[1]) << "\n";
    return 0;
}

int run_sweep(const Overrides &ov) {
    Experiment ex = load_experiment(merged_config(ov));
    const qgt::io::RunConfig &rc = ex.rc;

    const auto rows =
        qgt::train::sample_efficiency_sweep(rc.train, ex.graphs, rc.fractions);

    std::ostringstream csv;
    csv << "fraction,qgt_acc,classical_acc\n";
    for (const auto &row : rows) {
        csv << qgt::detail::format("%g", row.fraction) << ","
            << format_double(row.qgt_acc) << ","
            << format_double(row.classical_acc) << "\n";
    }

    fs::create_directories(rc.out_dir);
    const fs::path out(rc.out_dir);
    qgt::io::write_text_file((out / "sweep.csv").string(), csv.str());

    nlohmann::ordered_json manifest;
    manifest["command"] = "sweep";
    manifest["dataset"] = rc.dataset_path;
    manifest["dataset_name"] = ex.dataset.name;
    manifest["embeddings"] = rc.embeddings_path;
    manifest["seed"] = rc.train.seed;
    manifest["config"] = qgt::io::manifest_config(rc);
    manifest["split"] = split_summary(ex);
    manifest["fractions"] = rc.fractions;
    qgt::io::write_manifest((out / "sweep_manifest.json").string(), manifest);

    std::cout << csv.str();
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum graph transformer sentence-classification "
                 "experiments"};
    app.require_subcommand(1);

    Overrides ov;
    EvalArgs eval_args;
    AttnArgs attn_args;

    auto add_overrides = [&](CLI::App *cmd, bool with_model, bool with_fractions) {
        cmd->add_option("--config", ov.config_path,
                        "run configuration file (key = value lines)")
            ->required();
        cmd->add_option("--seed", ov.seed, "training seed override")
            ->check(CLI::NonNegativeNumber)
            ->each([&](const std::string &) { ov.has_seed = true; });
        cmd->add_option("--out", ov.out, "output directory override");
        cmd->add_option("--dataset", ov.dataset, "dataset path override");
        cmd->add_option("--embeddings", ov.embeddings,
                        "embeddings path override");
        cmd->add_option("--graph", ov.graph,
                        "graph mode override: complete or knn:K");
        if (with_model) {
            cmd->add_option("--model", ov.model,
                            "model kind override: quantum or classical");
        }
        if (with_fractions) {
            cmd->add_option("--fractions", ov.fractions,
                            "comma-separated training fractions");
        }
    };

    CLI::App *train_cmd =
        app.add_subcommand("train", "fit a model and write run artifacts");
    add_overrides(train_cmd, true, false);

    CLI::App *eval_cmd =
        app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("checkpoint", eval_args.checkpoint, "checkpoint file")
        ->required();
    eval_cmd->add_option("--dataset", eval_args.dataset, "dataset file")
        ->required();
    eval_cmd->add_option("--embeddings", eval_args.embeddings,
                         "embeddings file")
        ->required();
    eval_cmd->add_option("--split", eval_args.split,
                         "all|train|val|test (split rederived from the "
                         "checkpoint's seed)");

    CLI::App *attn_cmd = app.add_subcommand(
        "attn", "print attention scores and prediction for one sentence");
    attn_cmd->add_option("checkpoint", attn_args.checkpoint, "checkpoint file")
        ->required();
    attn_cmd->add_option("sentence", attn_args.sentence, "input sentence")
        ->required();
    attn_cmd->add_option("--embeddings", attn_args.embeddings,
                         "embeddings file")
        ->required();
    attn_cmd->add_option("--out", attn_args.out,
                         "also write attention.csv to this directory");

    CLI::App *compare_cmd = app.add_subcommand(
        "compare", "train quantum and classical models on identical splits");
    add_overrides(compare_cmd, false, false);

    CLI::App *sweep_cmd = app.add_subcommand(
        "sweep", "sample-efficiency sweep over training fractions");
    add_overrides(sweep_cmd, false, true);

    try {
        app.parse(argc, argv);
        if (train_cmd->parsed()) {
            return run_train(ov);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_args);
        }
        if (attn_cmd->parsed()) {
            return run_attn(attn_args);
        }
        if (compare_cmd->parsed()) {
            return run_compare(ov);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(ov);
        }
        return 2; // unreachable with require_subcommand(1)
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const qgt::ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qgt::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
