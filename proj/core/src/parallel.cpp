// SPDX-License-Identifier: Apache-2.0
#include "rough/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace rough {

std::size_t thread_count() {
    std::size_t n = std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
    if (const char* env = std::getenv("ROUGH_BILLIARDS_THREADS")) {
        std::size_t cap = 0;
        const char* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, cap);
        if (ec == std::errc() && ptr == end && cap > 0) n = std::min(n, cap);
    }
    return n;
}

}  // namespace rough
