#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fafsp {

/// Seedable random source whose output is identical on every platform.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard distributions are not (their algorithms are implementation
/// defined), so every transform used by the generators lives here.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    /// Independent substream keyed by `stream`. Depends only on the seed this
    /// Rng was built from, never on how many numbers were drawn so far.
    [[nodiscard]] Rng split(std::uint64_t stream) const;

    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform on (0, 1).
    double uniform_open01();
    /// Uniform on [lo, hi]; returns lo exactly when lo == hi.
    double uniform(double lo, double hi);
    /// Uniform integer on [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    std::size_t index(std::size_t n);
    bool bernoulli(double p);
    double normal(double mean, double sd);
    /// Exponential with the given mean (not rate). Strictly positive.
    double exponential(double mean);
    /// Geometric on {1, 2, ...} with success probability 1/2.
    int geometric_half();

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace fafsp
