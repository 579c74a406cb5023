#pragma once

#include <cstdint>
#include <random>

namespace shotclust {

/// Deterministic RNG wrapper around mt19937_64.
///
/// Substreams are derived with `split`: child seed =
/// splitmix64(parent_seed + (stream + 1) * 0x9E3779B97F4A7C15). This is the
/// documented splitting rule for per-replicate / per-chain streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : seed_(seed)
        , gen_(seed)
    {
    }

    std::uint64_t seed() const { return seed_; }

    /// Uniform on [0, 1).
    double uniform()
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    double uniform(double lo, double hi)
    {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double normal(double mean = 0.0, double sd = 1.0)
    {
        return std::normal_distribution<double>(mean, sd)(gen_);
    }

    double exponential(double rate)
    {
        return std::exponential_distribution<double>(rate)(gen_);
    }

    /// Gamma with shape/rate parameterization (mean = shape / rate).
    double gamma(double shape, double rate)
    {
        return std::gamma_distribution<double>(shape, 1.0 / rate)(gen_);
    }

    double beta(double a, double b)
    {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    long poisson(double mu)
    {
        return std::poisson_distribution<long>(mu)(gen_);
    }

    bool bernoulli(double p)
    {
        return uniform() < p;
    }

    /// Uniform integer in [0, bound).
    std::uint64_t integer(std::uint64_t bound)
    {
        return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(gen_);
    }

    /// Derive an independent substream for worker `stream`.
    Rng split(std::uint64_t stream) const
    {
        return Rng(splitmix64(seed_ + (stream + 1) * 0x9E3779B97F4A7C15ull));
    }

    static std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace shotclust
