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
#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "qgt/common.hpp"

namespace qgt::parallel {

/// Number of worker threads. QGT_THREADS overrides hardware concurrency;
/// values below 1 or unparseable values fall back to 1.
inline int worker_count() {
    if (const char *env = std::getenv("QGT_THREADS")) {
        try {
            const int n = std::stoi(env);
            return n >= 1 ? n : 1;
        } catch (const std::exception &) {
            return 1;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? static_cast<int>(hw) : 1;
}

namespace detail {
inline bool &inside_worker() {
    thread_local bool flag = false;
    return flag;
}
} // namespace detail

/// Runs fn(i) for i in [0, count). Results must be written to slots indexed
/// by i so that the outcome is independent of thread scheduling; reduction
/// order is the caller's responsibility and stays deterministic as long as
/// the caller walks the slots in index order. Calls made from inside a
/// worker run serially, so only the outermost loop fans out.
template <typename Fn> void parallel_for(std::size_t count, Fn &&fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1 || detail::inside_worker()) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            detail::inside_worker() = true;
            for (std::size_t i = w; i < count; i += workers) {
                fn(i);
            }
        });
    }
    for (auto &t : threads) {
        t.join();
    }
}

} // namespace qgt::parallel
