/*
 * Copyright 2026 The meshvec Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace meshvec {

/// Worker count: MESHVEC_THREADS if set and positive, else hardware concurrency.
inline int thread_count()
{
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MESHVEC_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0) n = cap;
        } catch (...) {
        }
    }
    return std::max(n, 1);
}

/// Runs fn(i) for i in [0, count) over contiguous chunks. fn must be safe to
/// call concurrently for distinct i.
template <typename Fn>
void parallel_for(int count, Fn&& fn)
{
    const int workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
        const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
        pool.emplace_back([&fn, begin, end] {
            for (int i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace meshvec
