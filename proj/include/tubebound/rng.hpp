// tubebound/rng.hpp
//
// Deterministic random streams and fixed-partition parallel reduction.
// A stream is a pure function of (master seed, index); a reduction over n
// items cut into P contiguous partitions gives bit-identical results for a
// given P no matter how many worker threads execute it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace tubebound::rng {

using Engine = std::mt19937_64;

/// Independent engine for item `index` under master `seed`.
inline Engine stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x54424e44u};
    return Engine(seq);
}

/// Running mean / variance (Welford), mergeable in a fixed order.
struct Accumulator {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const Accumulator& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(count + o.count);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.count) / n;
        m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }

    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double stderr_of_mean() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

struct PartitionRange {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
    std::uint32_t index = 0;
};

inline unsigned default_threads(unsigned partitions) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return std::max(1u, std::min(hw, partitions));
}

/// Split [0, n) into `partitions` contiguous ranges, run `work(range)` for
/// each on up to `threads` workers, and return the per-partition results
/// in partition order.
template <class Work>
auto run_partitions(std::uint64_t n, unsigned partitions, unsigned threads, Work work) {
    using Result = decltype(work(PartitionRange{}));
    partitions = std::max(1u, partitions);
    if (threads == 0) threads = default_threads(partitions);
    threads = std::min(threads, partitions);

    std::vector<Result> results(partitions);
    const auto range_of = [n, partitions](unsigned j) {
        return PartitionRange{n * j / partitions, n * (j + 1) / partitions, j};
    };
    if (threads <= 1) {
        for (unsigned j = 0; j < partitions; ++j) results[j] = work(range_of(j));
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (unsigned j = w; j < partitions; j += threads) results[j] = work(range_of(j));
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace tubebound::rng
