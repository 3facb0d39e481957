#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

namespace gplab {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Counter-based generator (SplitMix64): draw i is a pure function of (seed, i),
// so any subsequence can be regenerated without replaying the stream.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t at(std::uint64_t counter) const { return mix(key_ + (counter + 1) * 0x9E3779B97F4A7C15ULL); }
    std::uint64_t operator()() { return at(counter_++); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    // Uniform integer in [lo, hi] by multiply-shift; bias below 2^-40 for the ranges used here.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<unsigned __int128>(static_cast<std::uint64_t>(hi - lo) + 1);
        return lo + static_cast<std::int64_t>((span * (*this)()) >> 64);
    }
    double normal() {
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Runs fn(block) for block in [0, n_blocks) on up to `threads` workers and
// returns results indexed by block. The block partition is fixed by the caller,
// so a subsequent in-order reduction is independent of the thread count.
template <class T, class F>
std::vector<T> map_blocks(std::size_t n_blocks, unsigned threads, F&& fn) {
    std::vector<T> out(n_blocks);
    if (threads <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) out[b] = fn(b);
        return out;
    }
    std::vector<std::thread> pool;
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));
    for (unsigned w = 0; w < nt; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t b = w; b < n_blocks; b += nt) out[b] = fn(b);
        });
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace gplab
