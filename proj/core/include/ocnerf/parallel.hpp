// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace ocnerf {

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Indices are
/// handed out in contiguous blocks, so any per-index result is independent
/// of the worker count. workers <= 0 uses the hardware concurrency.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

int resolve_workers(int workers);

}  // namespace ocnerf
