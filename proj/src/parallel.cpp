#include "affinekit/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace affinekit {

unsigned thread_budget() {
    unsigned budget = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AFFINEKIT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) budget = static_cast<unsigned>(v);
        } catch (const std::exception&) {
            // Unparseable values fall back to the default.
        }
    }
    return budget;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(thread_budget(), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace affinekit
