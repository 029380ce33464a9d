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
 * @file textgraph.hpp
 * Text preprocessing: tokenization, embedding tables, sentence graphs,
 * dataset loading and the seeded train/val/test split.
 */
#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qgt/common.hpp"

namespace qgt::textgraph {

/// Lowercases, deletes ASCII punctuation and splits on whitespace.
/// One token per occurrence; duplicates are preserved.
inline std::vector<std::string> tokenize(const std::string &sentence) {
    std::string cleaned;
    cleaned.reserve(sentence.size());
    for (const unsigned char c : sentence) {
        if (std::ispunct(c)) {
            continue;
        }
        cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    std::vector<std::string> tokens;
    std::istringstream stream(cleaned);
    std::string token;
    while (stream >> token) {
        tokens.push_back(token);
    }
    require(!tokens.empty(), "sentence tokenizes to zero tokens");
    return tokens;
}

enum class OovPolicy { ZeroVector, HashedGaussian };

/// Token to embedding-vector map with a configurable out-of-vocabulary
/// policy. HashedGaussian vectors depend only on (token, oov_seed), so the
/// same unknown token always maps to the same vector.
class EmbeddingTable {
  public:
    static constexpr double kOovStd = 0.1;

    explicit EmbeddingTable(int dimension,
                            OovPolicy policy = OovPolicy::ZeroVector,
                            std::uint64_t oov_seed = 0)
        : dimension_(dimension), policy_(policy), oov_seed_(oov_seed) {
        require(dimension >= 1,
                qgt::detail::format("embedding dimension must be >= 1, got %d",
                               dimension));
    }

    int dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string &token) const {
        return entries_.count(token) != 0;
    }

    void insert(const std::string &token, Eigen::VectorXd vector) {
        require(vector.size() == dimension_,
                qgt::detail::format("embedding for '%s' has %ld components, "
                               "expected %d",
                               token.c_str(), long(vector.size()), dimension_));
        entries_[token] = std::move(vector);
    }

    Eigen::VectorXd lookup(const std::string &token) const {
        const auto it = entries_.find(token);
        if (it != entries_.end()) {
            return it->second;
        }
        if (policy_ == OovPolicy::ZeroVector) {
            return Eigen::VectorXd::Zero(dimension_);
        }
        std::mt19937_64 rng(fnv1a(token) ^ oov_seed_);
        std::normal_distribution<double> normal(0.0, kOovStd);
        Eigen::VectorXd v(dimension_);
        for (int i = 0; i < dimension_; ++i) {
            v(i) = normal(rng);
        }
        return v;
    }

  private:
    int dimension_;
    OovPolicy policy_;
    std::uint64_t oov_seed_;
    std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

/// Parses a whitespace-separated embedding file: token then `dimension`
/// decimals per line, dimension fixed by the first row. Lines whose floats
/// fail to parse are skipped and counted; a wrong field count is a format
/// error because it usually means a truncated file.
inline EmbeddingTable load_embeddings(const std::string &path,
                                      OovPolicy policy = OovPolicy::ZeroVector,
                                      std::uint64_t oov_seed = 0) {
    std::ifstream in(path);
    require_config(in.good(),
                   qgt::detail::format("cannot open embeddings file '%s'",
                                  path.c_str()));

    int dimension = -1;
    std::size_t malformed = 0;
    std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string token;
        if (!(fields >> token)) {
            continue; // blank line
        }
        std::vector<std::string> values;
        std::string field;
        while (fields >> field) {
            values.push_back(field);
        }
        if (dimension < 0) {
            require_config(!values.empty(),
                           qgt::detail::format("%s line %zu: no embedding values",
                                          path.c_str(), line_no));
            dimension = static_cast<int>(values.size());
        } else {
            require_config(
                static_cast<int>(values.size()) == dimension,
                qgt::detail::format("%s line %zu: expected %d values, found %zu",
                               path.c_str(), line_no, dimension,
                               values.size()));
        }
        Eigen::VectorXd v(dimension);
        bool ok = true;
        for (int i = 0; i < dimension; ++i) {
            const char *text = values[static_cast<std::size_t>(i)].c_str();
            char *end = nullptr;
            v(i) = std::strtod(text, &end);
            if (end == text || *end != '\0') {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++malformed;
            continue;
        }
        rows.emplace_back(std::move(token), std::move(v));
    }
    require_config(dimension > 0,
                   qgt::detail::format("embeddings file '%s' contains no rows",
                                  path.c_str()));
    if (malformed > 0) {
        std::cerr << "warning: skipped " << malformed
                  << " malformed line(s) in " << path << "\n";
    }
    EmbeddingTable table(dimension, policy, oov_seed);
    for (auto &row : rows) {
        table.insert(row.first, std::move(row.second));
    }
    return table;
}

/// Graph topology selector: complete (every ordered pair of distinct
/// nodes) or knn(k) (sequence-position neighbors within distance k,
/// both directions).
struct GraphMode {
    enum class Kind { Complete, Knn };
    Kind kind = Kind::Complete;
    int k = 1;

    static GraphMode complete() { return {Kind::Complete, 1}; }
    static GraphMode knn(int k) {
        require_config(k >= 1,
                       qgt::detail::format("knn k must be >= 1, got %d", k));
        return {Kind::Knn, k};
    }

    std::string to_string() const {
        if (kind == Kind::Complete) {
            return "complete";
        }
        return qgt::detail::format("knn:%d", k);
    }
};

/// Accepts "complete" or "knn:K".
inline GraphMode parse_graph_mode(const std::string &text) {
    if (text == "complete") {
        return GraphMode::complete();
    }
    if (text.rfind("knn:", 0) == 0) {
        const char *digits = text.c_str() + 4;
        char *end = nullptr;
        const long k = std::strtol(digits, &end, 10);
        require_config(end != digits && *end == '\0',
                       qgt::detail::format("bad graph mode '%s'", text.c_str()));
        return GraphMode::knn(static_cast<int>(k));
    }
    throw ConfigError(qgt::detail::format(
        "bad graph mode '%s' (expected 'complete' or 'knn:K')", text.c_str()));
}

struct SentenceGraph {
    std::vector<std::string> tokens;
    Eigen::MatrixXd features; // N x d0, row i = raw embedding of token i
    std::vector<std::pair<int, int>> edges; // directed (src, dst), no self-loops
    int label = 0;
};

inline SentenceGraph build_graph(const std::vector<std::string> &tokens,
                                 const EmbeddingTable &table,
                                 const GraphMode &mode, int label) {
    require(!tokens.empty(), "cannot build a graph from zero tokens");
    const int n = static_cast<int>(tokens.size());
    SentenceGraph graph;
    graph.tokens = tokens;
    graph.label = label;
    graph.features.resize(n, table.dimension());
    for (int i = 0; i < n; ++i) {
        graph.features.row(i) =
            table.lookup(tokens[static_cast<std::size_t>(i)]).transpose();
    }
    for (int i = 0; i < n; ++i) {
        if (mode.kind == GraphMode::Kind::Complete) {
            for (int j = 0; j < n; ++j) {
                if (j != i) {
                    graph.edges.emplace_back(i, j);
                }
            }
        } else {
            for (int j = std::max(0, i - mode.k);
                 j <= std::min(n - 1, i + mode.k); ++j) {
                if (j != i) {
                    graph.edges.emplace_back(i, j);
                }
            }
        }
    }
    return graph;
}

struct Dataset {
    std::vector<std::pair<std::string, int>> samples; // (sentence, label)
    std::string name;
    int class_count = 0;
};

enum class DatasetFormat { Tsv, Mcrp };

/// Loads `sentence<TAB>label` lines. The label is the text after the last
/// TAB; sentences that tokenize to nothing are skipped with a warning.
/// Mcrp additionally requires exactly 4 tokens per sentence.
inline Dataset load_dataset(const std::string &path,
                            DatasetFormat format = DatasetFormat::Tsv) {
    std::ifstream in(path);
    require_config(in.good(), qgt::detail::format("cannot open dataset file '%s'",
                                             path.c_str()));
    Dataset ds;
    ds.name = std::filesystem::path(path).stem().string();
    int max_label = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue; // blank line
        }
        const std::size_t tab = line.rfind('\t');
        require_config(tab != std::string::npos,
                       qgt::detail::format("%s line %zu: missing TAB separator",
                                      path.c_str(), line_no));
        const std::string sentence = line.substr(0, tab);
        const std::string label_text = line.substr(tab + 1);
        const char *digits = label_text.c_str();
        char *end = nullptr;
        const long label = std::strtol(digits, &end, 10);
        require_config(end != digits && *end == '\0' && label >= 0,
                       qgt::detail::format("%s line %zu: label '%s' is not a "
                                      "non-negative integer",
                                      path.c_str(), line_no,
                                      label_text.c_str()));
        std::vector<std::string> tokens;
        try {
            tokens = tokenize(sentence);
        } catch (const Error &) {
            std::cerr << "warning: " << path << " line " << line_no
                      << ": sentence tokenizes to zero tokens; skipped\n";
            continue;
        }
        if (format == DatasetFormat::Mcrp) {
            require_config(tokens.size() == 4,
                           qgt::detail::format("%s line %zu: mcrp sentence must "
                                          "have 4 tokens, found %zu",
                                          path.c_str(), line_no,
                                          tokens.size()));
        }
        ds.samples.emplace_back(sentence, static_cast<int>(label));
        max_label = std::max(max_label, static_cast<int>(label));
    }
    require_config(!ds.samples.empty(),
                   qgt::detail::format("dataset file '%s' contains no samples",
                                  path.c_str()));
    ds.class_count = max_label + 1;
    return ds;
}

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Seeded Fisher-Yates (explicit draws, so the permutation does not depend
/// on the standard library's shuffle) followed by a contiguous cut. Val and
/// test get floor(ratio * n); the remainder goes to train.
inline Splits split_dataset(const Dataset &dataset, double train_ratio,
                            double val_ratio, double test_ratio,
                            std::uint64_t seed) {
    require_config(train_ratio > 0 && val_ratio > 0 && test_ratio > 0,
                   "split ratios must be positive");
    require_config(std::abs(train_ratio + val_ratio + test_ratio - 1.0) < 1e-9,
                   "split ratios must sum to 1");
    const std::size_t n = dataset.samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_val =
        static_cast<std::size_t>(val_ratio * static_cast<double>(n));
    const std::size_t n_test =
        static_cast<std::size_t>(test_ratio * static_cast<double>(n));
    require_config(n_val >= 1 && n_test >= 1 && n > n_val + n_test,
                   qgt::detail::format("dataset of %zu samples is too small for "
                                  "the requested split",
                                  n));
    const std::size_t n_train = n - n_val - n_test;

    Splits splits;
    auto fill = [&](Dataset &out, std::size_t begin, std::size_t count,
                    const char *suffix) {
        out.name = dataset.name + suffix;
        out.class_count = dataset.class_count;
        out.samples.reserve(count);
        for (std::size_t i = begin; i < begin + count; ++i) {
            out.samples.push_back(dataset.samples[order[i]]);
        }
    };
    fill(splits.train, 0, n_train, "/train");
    fill(splits.val, n_train, n_val, "/val");
    fill(splits.test, n_train + n_val, n_test, "/test");
    return splits;
}

/// Order-sensitive content hash, used by run manifests to certify that two
/// runs consumed identical split membership.
inline std::uint64_t dataset_fingerprint(const Dataset &dataset) {
    std::uint64_t h = fnv1a(dataset.name);
    for (const auto &[sentence, label] : dataset.samples) {
        h = fnv1a(sentence, h);
        h = fnv1a("\t", h);
        h = fnv1a(std::to_string(label), h);
        h = fnv1a("\n", h);
    }
    return h;
}

} // namespace qgt::textgraph
