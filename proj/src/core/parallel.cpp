#include "parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ov {

int thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const char* env = std::getenv("OVOXEL_THREADS");
    if (env != nullptr && *env != '\0') {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<int>(v);
    }
    return static_cast<int>(hw);
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& body) {
    if (n == 0) return;
    size_t workers = static_cast<size_t>(thread_count());
    if (workers > n) workers = n;
    if (workers <= 1) {
        body(0, n);
        return;
    }
    size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        size_t begin = w * chunk;
        size_t end = begin + chunk < n ? begin + chunk : n;
        if (begin >= end) break;
        threads.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace ov
