#pragma once

#include <cstddef>
#include <deque>
#include <future>
#include <thread>

namespace fnl {

// Work items are split into fixed-size blocks; each block is evaluated
// independently and the per-block results are combined strictly in block
// order. The partition depends only on (count, block_size), never on the
// number of workers, so results are bit-identical across thread counts.
//
// BlockFn: R(std::size_t begin, std::size_t end)
// Combine: void(R&& block_result)  -- called in block order
template <typename R, typename BlockFn, typename Combine>
void blocked_reduce(std::size_t count, std::size_t block_size, int threads,
                    BlockFn&& block_fn, Combine&& combine) {
    if (count == 0) return;
    if (block_size == 0) block_size = 1;
    const std::size_t nblocks = (count + block_size - 1) / block_size;

    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(count, lo + block_size);
        return block_fn(lo, hi);
    };

    if (threads <= 1 || nblocks == 1) {
        for (std::size_t b = 0; b < nblocks; ++b) combine(run_block(b));
        return;
    }

    const std::size_t width = static_cast<std::size_t>(threads);
    std::deque<std::future<R>> inflight;
    std::size_t next = 0;
    while (next < nblocks || !inflight.empty()) {
        while (next < nblocks && inflight.size() < width) {
            const std::size_t b = next++;
            inflight.push_back(std::async(std::launch::async, [b, &run_block] {
                return run_block(b);
            }));
        }
        R r = inflight.front().get();
        inflight.pop_front();
        combine(std::move(r));
    }
}

inline int hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace fnl
