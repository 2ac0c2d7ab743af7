#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace qi {

// Small, fast 64-bit generator (splitmix64). One instance per Monte Carlo
// trial; substreams are derived by hashing (master seed, label) so results
// never depend on worker scheduling.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return UINT64_MAX; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, lo + width).
    double uniform(double lo, double width) { return lo + uniform01() * width; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return (*this)() % n; }

  private:
    std::uint64_t state_;
};

// Deterministic substream seed for (master, label) pairs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (label + 0x632BE59BD9B4E019ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Visits every firing index of `count` independent Bernoulli(p) cells in
// increasing order. Geometric gap sampling keeps the cost proportional to
// the number of hits rather than to `count`; the visited set has exactly
// the per-cell Bernoulli(p) distribution.
template <class Visitor>
void sample_bernoulli_hits(std::size_t count, double p, SplitMix64& rng, Visitor&& visit) {
    if (count == 0 || p <= 0.0) return;
    if (p >= 1.0) {
        for (std::size_t i = 0; i < count; ++i) visit(i);
        return;
    }
    const double log1m_p = std::log1p(-p);
    std::size_t idx = 0;
    while (true) {
        const double u = rng.uniform01();
        const double gap = std::floor(std::log1p(-u) / log1m_p);
        if (!(gap < static_cast<double>(count))) return;
        idx += static_cast<std::size_t>(gap);
        if (idx >= count) return;
        visit(idx);
        ++idx;
    }
}

}  // namespace qi
