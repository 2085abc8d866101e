#include "sf/parallel.h"

#include <atomic>

namespace sf {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }
void set_thread_count(int n) { g_threads.store(n < 1 ? 1 : n); }

void parallel_rows(int rows, const std::function<void(int)>& fn) {
    const int nt = std::min(thread_count(), rows);
    if (nt <= 1) {
        for (int y = 0; y < rows; ++y) fn(y);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        workers.emplace_back([&, t] {
            for (int y = t; y < rows; y += nt) fn(y);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace sf
