#ifndef FLASHSIM_RNG_HPP
#define FLASHSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace flashsim {

// splitmix64 scrambler; used to derive stream seeds so that nearby
// (seed, index) pairs land far apart in mt19937_64 state space.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Seeded generator with explicitly-coded output distributions.  The
// standard library leaves distribution algorithms implementation-defined,
// so sampling goes through fixed formulas here: trajectories replay
// bit-identically for a given seed no matter which libstdc++ built them.
//
// Stream splitting rule: substream k of master seed s is seeded with
// splitmix64(s ^ splitmix64(k + 1)).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)), seed_(seed) {}

    static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(master_seed ^ splitmix64(index + 1));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform on (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one fresh pair per call, second value discarded to keep
    // the stream position a simple function of the call count.
    double normal() {
        double u = uniform_pos();
        double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // exponential with given rate (inverse-CDF)
    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // Poisson by exponential-gap counting; fine for desk-scale means.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        double acc = 0.0;
        std::uint64_t n = 0;
        for (;;) {
            acc += exponential(1.0);
            if (acc > mean) return n;
            ++n;
        }
    }

    // index in [0, n) with probability weights[i] / sum(weights)
    std::size_t categorical(const double* weights, std::size_t n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += weights[i];
        double r = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return n - 1;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace flashsim

#endif
