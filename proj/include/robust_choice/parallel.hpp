#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace robust_choice::detail {

/// Parallelism cap: ROBUST_CHOICE_THREADS when set to a positive integer
/// (anything unparseable means "run serial"), hardware concurrency otherwise.
inline unsigned thread_limit() {
    static const unsigned limit = [] {
        if (const char* env = std::getenv("ROBUST_CHOICE_THREADS")) {
            char* end = nullptr;
            const long parsed = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || parsed <= 0) return 1u;
            return static_cast<unsigned>(parsed);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }();
    return limit;
}

/**
 * Runs fn(i) for i in [0, count). Splits across threads only when the
 * caller marks the work as heavy and a cap above 1 allows it; each index
 * owns its output slot, so results do not depend on scheduling.
 */
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         bool heavy = false) {
    const unsigned threads = thread_limit();
    if (!heavy || threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace robust_choice::detail
