#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gpvec {

// Every stochastic decision in the project goes through this wrapper so runs
// are replayable from a single 64-bit seed.  The sampling primitives are
// implemented here instead of through std::uniform_*_distribution, whose
// output is not pinned down by the standard and differs across libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, bound); bound must be nonzero.
    std::size_t uniform_index(std::size_t bound) {
        const std::uint64_t b = bound;
        const std::uint64_t threshold = (0 - b) % b;  // 2^64 mod b
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return static_cast<std::size_t>(r % b);
        }
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform_real() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform_real() < p; }

    // k distinct values from [0, n) in sampled order (partial Fisher-Yates,
    // one uniform_index draw per selected element).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_index(n - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    // In-place Fisher-Yates shuffle; n-1 uniform_index draws, high index first.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[uniform_index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gpvec
