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
 * @file io.hpp
 * Serialization: the versioned text checkpoint (bit-exact round trip via
 * 17-significant-digit decimals), the `key = value` run configuration
 * parser, the metrics CSV writer and the JSON run manifest.
 */
#pragma once

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "qgt/common.hpp"
#include "qgt/model.hpp"
#include "qgt/textgraph.hpp"
#include "qgt/train.hpp"

namespace qgt::io {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char *kCheckpointMagic = "qgt checkpoint v1";

/// Everything needed to reload a trained model and replay its evaluation
/// protocol: architecture, graph mode, the training seed and the split /
/// preprocessing settings the run used.
struct Checkpoint {
    model::ModelConfig config;
    textgraph::GraphMode graph_mode = textgraph::GraphMode::complete();
    std::uint64_t seed = 0;
    double train_ratio = 0.7;
    double val_ratio = 0.1;
    double test_ratio = 0.2;
    int max_tokens = 0;
    std::string oov_policy = "zero";
    std::uint64_t oov_seed = 0;
    std::string dataset_format = "tsv";
    model::ModelParams params;
};

inline textgraph::OovPolicy parse_oov_policy(const std::string &text) {
    if (text == "zero") {
        return textgraph::OovPolicy::ZeroVector;
    }
    if (text == "hashed") {
        return textgraph::OovPolicy::HashedGaussian;
    }
    throw ConfigError(qgt::detail::format(
        "bad oov_policy '%s' (expected 'zero' or 'hashed')", text.c_str()));
}

inline textgraph::DatasetFormat parse_dataset_format(const std::string &text) {
    if (text == "tsv") {
        return textgraph::DatasetFormat::Tsv;
    }
    if (text == "mcrp") {
        return textgraph::DatasetFormat::Mcrp;
    }
    throw ConfigError(qgt::detail::format(
        "bad dataset format '%s' (expected 'tsv' or 'mcrp')", text.c_str()));
}

inline void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
    std::ostringstream out;
    out << kCheckpointMagic << "\n";
    out << "kind " << model::to_string(ckpt.config.kind) << "\n";
    out << "d0 " << ckpt.config.d0 << "\n";
    out << "d " << ckpt.config.d << "\n";
    out << "qubits "
        << (ckpt.config.kind == model::ModelKind::Quantum
                ? ckpt.config.qubit_count()
                : 0)
        << "\n";
    out << "classes " << ckpt.config.class_count << "\n";
    out << "layers " << ckpt.config.layer_count << "\n";
    out << "scale_dim " << ckpt.config.scale_dim << "\n";
    out << "dk " << ckpt.config.dk << "\n";
    out << "graph " << ckpt.graph_mode.to_string() << "\n";
    out << "seed " << ckpt.seed << "\n";
    out << "cfg train_ratio " << format_double(ckpt.train_ratio) << "\n";
    out << "cfg val_ratio " << format_double(ckpt.val_ratio) << "\n";
    out << "cfg test_ratio " << format_double(ckpt.test_ratio) << "\n";
    out << "cfg max_tokens " << ckpt.max_tokens << "\n";
    out << "cfg oov_policy " << ckpt.oov_policy << "\n";
    out << "cfg oov_seed " << ckpt.oov_seed << "\n";
    out << "cfg dataset_format " << ckpt.dataset_format << "\n";
    model::visit_named_tensors(
        const_cast<model::ModelParams &>(ckpt.params),
        [&](const std::string &name, Eigen::Map<Eigen::MatrixXd> m) {
            out << "tensor " << name << " " << m.rows() << " " << m.cols()
                << "\n";
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) {
                    if (c > 0) {
                        out << " ";
                    }
                    out << format_double(m(r, c));
                }
                out << "\n";
            }
        });
    out << "end\n";

    std::ofstream file(path, std::ios::binary);
    require_config(file.good(), qgt::detail::format("cannot write checkpoint '%s'",
                                               path.c_str()));
    file << out.str();
    require_config(file.good(), qgt::detail::format("failed writing checkpoint '%s'",
                                               path.c_str()));
}

inline Checkpoint load_checkpoint(const std::string &path) {
    std::ifstream file(path, std::ios::binary);
    require_config(file.good(), qgt::detail::format("cannot open checkpoint '%s'",
                                               path.c_str()));
    std::string line;
    require_config(std::getline(file, line) && line == kCheckpointMagic,
                   qgt::detail::format("'%s' is not a qgt checkpoint (bad magic)",
                                  path.c_str()));

    Checkpoint ckpt;
    std::unordered_map<std::string, std::string> header;
    std::string pending; // first "tensor ..." line, already consumed
    while (std::getline(file, line)) {
        if (line.rfind("tensor ", 0) == 0 || line == "end") {
            pending = line;
            break;
        }
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        require_config(!key.empty(), qgt::detail::format(
            "checkpoint '%s': blank header line", path.c_str()));
        if (key == "cfg") {
            fields >> key;
        }
        std::string value;
        std::getline(fields, value);
        if (!value.empty() && value.front() == ' ') {
            value.erase(0, 1);
        }
        require_config(!value.empty(),
                       qgt::detail::format("checkpoint '%s': header key '%s' has "
                                      "no value",
                                      path.c_str(), key.c_str()));
        header[key] = value;
    }

    auto take = [&](const char *key) {
        const auto it = header.find(key);
        require_config(it != header.end(),
                       qgt::detail::format("checkpoint '%s': missing header key "
                                      "'%s'",
                                      path.c_str(), key));
        return it->second;
    };
    auto to_int = [&](const std::string &text) {
        char *end = nullptr;
        const long v = std::strtol(text.c_str(), &end, 10);
        require_config(end != text.c_str() && *end == '\0',
                       qgt::detail::format("checkpoint '%s': bad integer '%s'",
                                      path.c_str(), text.c_str()));
        return static_cast<int>(v);
    };
    auto to_u64 = [&](const std::string &text) {
        char *end = nullptr;
        const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
        require_config(end != text.c_str() && *end == '\0',
                       qgt::detail::format("checkpoint '%s': bad integer '%s'",
                                      path.c_str(), text.c_str()));
        return static_cast<std::uint64_t>(v);
    };
    auto to_real = [&](const std::string &text) {
        char *end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        require_config(end != text.c_str() && *end == '\0',
                       qgt::detail::format("checkpoint '%s': bad real '%s'",
                                      path.c_str(), text.c_str()));
        return v;
    };

    ckpt.config.kind = model::parse_model_kind(take("kind"));
    ckpt.config.d0 = to_int(take("d0"));
    ckpt.config.d = to_int(take("d"));
    ckpt.config.class_count = to_int(take("classes"));
    ckpt.config.layer_count = to_int(take("layers"));
    ckpt.config.scale_dim = to_int(take("scale_dim"));
    ckpt.config.dk = to_int(take("dk"));
    ckpt.graph_mode = textgraph::parse_graph_mode(take("graph"));
    ckpt.seed = to_u64(take("seed"));
    ckpt.train_ratio = to_real(take("train_ratio"));
    ckpt.val_ratio = to_real(take("val_ratio"));
    ckpt.test_ratio = to_real(take("test_ratio"));
    ckpt.max_tokens = to_int(take("max_tokens"));
    ckpt.oov_policy = take("oov_policy");
    parse_oov_policy(ckpt.oov_policy); // validate
    ckpt.oov_seed = to_u64(take("oov_seed"));
    ckpt.dataset_format = take("dataset_format");
    parse_dataset_format(ckpt.dataset_format); // validate
    if (ckpt.config.kind == model::ModelKind::Quantum) {
        require_config(to_int(take("qubits")) == ckpt.config.qubit_count(),
                       qgt::detail::format("checkpoint '%s': qubit count does not "
                                      "match d",
                                      path.c_str()));
    }

    ckpt.params = model::make_params(ckpt.config);
    struct Slot {
        double *data = nullptr;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        bool filled = false;
    };
    std::unordered_map<std::string, Slot> slots;
    std::vector<std::string> expected_order;
    model::visit_named_tensors(
        ckpt.params, [&](const std::string &name, Eigen::Map<Eigen::MatrixXd> m) {
            slots[name] = Slot{m.data(), m.rows(), m.cols(), false};
            expected_order.push_back(name);
        });

    bool saw_end = (pending == "end");
    while (!saw_end) {
        require_config(!pending.empty(),
                       qgt::detail::format("checkpoint '%s': truncated (no 'end')",
                                      path.c_str()));
        std::istringstream fields(pending);
        std::string tag, name;
        long rows = 0, cols = 0;
        fields >> tag >> name >> rows >> cols;
        require_config(tag == "tensor" && !fields.fail(),
                       qgt::detail::format("checkpoint '%s': bad tensor header "
                                      "'%s'",
                                      path.c_str(), pending.c_str()));
        const auto it = slots.find(name);
        require_config(it != slots.end(),
                       qgt::detail::format("checkpoint '%s': unexpected tensor "
                                      "'%s'",
                                      path.c_str(), name.c_str()));
        Slot &slot = it->second;
        require_config(!slot.filled,
                       qgt::detail::format("checkpoint '%s': duplicate tensor "
                                      "'%s'",
                                      path.c_str(), name.c_str()));
        require_config(rows == slot.rows && cols == slot.cols,
                       qgt::detail::format("checkpoint '%s': tensor '%s' is "
                                      "%ldx%ld, expected %ldx%ld",
                                      path.c_str(), name.c_str(), rows, cols,
                                      long(slot.rows), long(slot.cols)));
        Eigen::Map<Eigen::MatrixXd> m(slot.data, slot.rows, slot.cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                double v = 0.0;
                file >> v;
                require_config(!file.fail(),
                               qgt::detail::format("checkpoint '%s': tensor '%s' "
                                              "is truncated",
                                              path.c_str(), name.c_str()));
                m(r, c) = v;
            }
        }
        slot.filled = true;
        pending.clear();
        while (std::getline(file, line)) {
            if (line.empty()) {
                continue;
            }
            pending = line;
            break;
        }
        saw_end = (pending == "end");
    }
    for (const auto &name : expected_order) {
        require_config(slots[name].filled,
                       qgt::detail::format("checkpoint '%s': missing tensor '%s'",
                                      path.c_str(), name.c_str()));
    }
    return ckpt;
}

// ---------------------------------------------------------------------------
// Run configuration files
// ---------------------------------------------------------------------------

/// Parses "0.1,0.3,1.0" into fractions; used by config files and --fractions.
inline std::vector<double> parse_fractions(const std::string &text) {
    std::vector<double> fractions;
    std::istringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        char *end = nullptr;
        const double f = std::strtod(item.c_str(), &end);
        require_config(end != item.c_str() && *end == '\0',
                       qgt::detail::format("bad fraction '%s'", item.c_str()));
        fractions.push_back(f);
    }
    require_config(!fractions.empty(), "fractions list is empty");
    return fractions;
}

/// Run settings mirroring TrainConfig plus file locations. Populated from
/// a `key = value` file; command-line flags overwrite individual fields
/// afterwards.
struct RunConfig {
    std::string dataset_path;
    std::string embeddings_path;
    std::string out_dir = "qgt-out";
    std::string dataset_format = "tsv";
    std::string oov_policy = "zero";
    std::uint64_t oov_seed = 0;
    double train_ratio = 0.7;
    double val_ratio = 0.1;
    double test_ratio = 0.2;
    std::vector<double> fractions = {0.1, 0.3, 0.6, 1.0};
    train::TrainConfig train;
};

namespace detail {

inline double parse_real(const std::string &value, const std::string &key) {
    char *end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    require_config(end != value.c_str() && *end == '\0',
                   qgt::detail::format("config key '%s': bad real '%s'",
                                       key.c_str(), value.c_str()));
    return v;
}

inline long parse_int(const std::string &value, const std::string &key) {
    char *end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    require_config(end != value.c_str() && *end == '\0',
                   qgt::detail::format("config key '%s': bad integer '%s'",
                                       key.c_str(), value.c_str()));
    return v;
}

inline std::string trim(const std::string &text) {
    const std::size_t first = text.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return "";
    }
    const std::size_t last = text.find_last_not_of(" \t");
    return text.substr(first, last - first + 1);
}

} // namespace detail

/// Applies one key/value pair; unknown keys are rejected.
inline void apply_config_entry(RunConfig &config, const std::string &key,
                               const std::string &value) {
    auto real = [&] { return detail::parse_real(value, key); };
    auto integer = [&] { return detail::parse_int(value, key); };
    if (key == "dataset") {
        config.dataset_path = value;
    } else if (key == "embeddings") {
        config.embeddings_path = value;
    } else if (key == "out") {
        config.out_dir = value;
    } else if (key == "format") {
        parse_dataset_format(value);
        config.dataset_format = value;
    } else if (key == "model") {
        config.train.model.kind = model::parse_model_kind(value);
    } else if (key == "graph") {
        config.train.graph_mode = textgraph::parse_graph_mode(value);
    } else if (key == "lr") {
        config.train.lr = real();
    } else if (key == "step_size") {
        config.train.step_size = static_cast<int>(integer());
    } else if (key == "gamma") {
        config.train.gamma = real();
    } else if (key == "batch_size") {
        config.train.batch_size = static_cast<int>(integer());
    } else if (key == "max_epochs") {
        config.train.max_epochs = static_cast<int>(integer());
    } else if (key == "patience") {
        config.train.patience = static_cast<int>(integer());
    } else if (key == "init_std") {
        config.train.init_std = real();
    } else if (key == "seed") {
        config.train.seed = static_cast<std::uint64_t>(integer());
    } else if (key == "d") {
        config.train.model.d = static_cast<int>(integer());
    } else if (key == "scale_dim") {
        config.train.model.scale_dim = static_cast<int>(integer());
    } else if (key == "dk") {
        config.train.model.dk = static_cast<int>(integer());
    } else if (key == "layer_count") {
        config.train.model.layer_count = static_cast<int>(integer());
    } else if (key == "max_tokens") {
        config.train.max_tokens = static_cast<int>(integer());
    } else if (key == "train_ratio") {
        config.train_ratio = real();
    } else if (key == "val_ratio") {
        config.val_ratio = real();
    } else if (key == "test_ratio") {
        config.test_ratio = real();
    } else if (key == "oov_policy") {
        parse_oov_policy(value);
        config.oov_policy = value;
    } else if (key == "oov_seed") {
        config.oov_seed = static_cast<std::uint64_t>(integer());
    } else if (key == "rl_reg") {
        if (value == "on") {
            config.train.rl_reg.enabled = true;
        } else if (value == "off") {
            config.train.rl_reg.enabled = false;
        } else {
            throw ConfigError(qgt::detail::format(
                "config key 'rl_reg': expected 'on' or 'off', got '%s'",
                value.c_str()));
        }
    } else if (key == "rl_sigma") {
        config.train.rl_reg.sigma = real();
    } else if (key == "rl_step") {
        config.train.rl_reg.step = real();
    } else if (key == "fractions") {
        config.fractions = parse_fractions(value);
    } else {
        throw ConfigError(
            qgt::detail::format("unknown config key '%s'", key.c_str()));
    }
}

/// `key = value` per line; '#' starts a comment; blank lines ignored.
inline RunConfig parse_run_config(const std::string &path) {
    std::ifstream file(path);
    require_config(file.good(),
                   qgt::detail::format("cannot open config file '%s'",
                                       path.c_str()));
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const std::size_t eq = trimmed.find('=');
        require_config(eq != std::string::npos,
                       qgt::detail::format("%s line %zu: expected 'key = "
                                           "value'",
                                           path.c_str(), line_no));
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));
        require_config(!key.empty() && !value.empty(),
                       qgt::detail::format("%s line %zu: empty key or value",
                                           path.c_str(), line_no));
        try {
            apply_config_entry(config, key, value);
        } catch (const ConfigError &e) {
            throw ConfigError(qgt::detail::format("%s line %zu: %s",
                                                  path.c_str(), line_no,
                                                  e.what()));
        }
    }
    return config;
}

// ---------------------------------------------------------------------------
// Metrics / manifests
// ---------------------------------------------------------------------------

inline std::string metrics_csv(const std::vector<train::EpochMetrics> &metrics) {
    std::ostringstream out;
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto &m : metrics) {
        out << m.epoch << "," << format_double(m.train_loss) << ","
            << format_double(m.train_acc) << "," << format_double(m.val_loss)
            << "," << format_double(m.val_acc) << "\n";
    }
    return out.str();
}

inline void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream file(path, std::ios::binary);
    require_config(file.good(),
                   qgt::detail::format("cannot write '%s'", path.c_str()));
    file << text;
    require_config(file.good(),
                   qgt::detail::format("failed writing '%s'", path.c_str()));
}

inline std::string hex_hash(std::uint64_t h) {
    char buffer[19];
    std::snprintf(buffer, sizeof(buffer), "0x%016llx",
                  static_cast<unsigned long long>(h));
    return buffer;
}

/// Config echo shared by manifests of every subcommand.
inline nlohmann::ordered_json manifest_config(const RunConfig &config) {
    nlohmann::ordered_json j;
    j["model"] = model::to_string(config.train.model.kind);
    j["graph"] = config.train.graph_mode.to_string();
    j["d"] = config.train.model.d;
    j["layer_count"] = config.train.model.layer_count;
    j["scale_dim"] = config.train.model.scale_dim;
    j["dk"] = config.train.model.dk;
    j["lr"] = config.train.lr;
    j["step_size"] = config.train.step_size;
    j["gamma"] = config.train.gamma;
    j["batch_size"] = config.train.batch_size;
    j["max_epochs"] = config.train.max_epochs;
    j["patience"] = config.train.patience;
    j["init_std"] = config.train.init_std;
    j["max_tokens"] = config.train.max_tokens;
    j["train_ratio"] = config.train_ratio;
    j["val_ratio"] = config.val_ratio;
    j["test_ratio"] = config.test_ratio;
    j["oov_policy"] = config.oov_policy;
    j["oov_seed"] = config.oov_seed;
    j["dataset_format"] = config.dataset_format;
    j["rl_reg"] = config.train.rl_reg.enabled ? "on" : "off";
    if (config.train.rl_reg.enabled) {
        j["rl_sigma"] = config.train.rl_reg.sigma;
        j["rl_step"] = config.train.rl_reg.step;
    }
    return j;
}

inline void write_manifest(const std::string &path,
                           const nlohmann::ordered_json &manifest) {
    write_text_file(path, manifest.dump(2) + "\n");
}

} // namespace qgt::io
