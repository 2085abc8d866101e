#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace sf {

/// Global worker count used by parallel_rows. Results must not depend on it;
/// each row is written by exactly one worker.
int thread_count();
void set_thread_count(int n);

/// Runs fn(y) for y in [0, rows), statically partitioned over threads.
void parallel_rows(int rows, const std::function<void(int)>& fn);

}  // namespace sf
