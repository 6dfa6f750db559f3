#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace pmrl {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded random stream with deterministic child-stream derivation.
///
/// A root seed plus a path of integer tags names a stream; the same
/// (seed, path) always yields the same draws, independent of how many
/// draws any sibling stream consumed. Draw helpers avoid
/// std::*_distribution so results are identical across standard
/// library implementations.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(mix_(seed)) {}

    /// Derives the stream named by `seed` followed by `path` tags.
    static RngStream child(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = seed;
        (void)splitmix64(h);
        for (std::uint64_t tag : path) {
            h ^= 0x632be59bd9b4e019ULL + tag;
            (void)splitmix64(h);
        }
        return RngStream(h);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Requires n >= 1.
    int uniform_int(int n) {
        int v = static_cast<int>(uniform01() * static_cast<double>(n));
        return v >= n ? n - 1 : v;
    }

    /// Samples an index from an explicit probability vector (assumed normalized).
    int sample_categorical(std::span<const double> probs) {
        double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    static std::uint64_t mix_(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64(s);
    }

    std::mt19937_64 engine_;
};

}  // namespace pmrl
