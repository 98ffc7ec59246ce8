#pragma once

#include <cstdint>
#include <string>

#include "oscnorm/dyadic_grid.hpp"

namespace oscnorm {

/// SplitMix64; doubles take the top 53 bits.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform in [0,1).
    double uniform();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t state_;
};

/// Seed of trial t in a suite seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

enum class Generator { uniform_iid, step, log_singularity, indicator, custom_file };

struct GeneratorSpec {
    Generator kind = Generator::uniform_iid;
    int dimension = 1;
    int depth = 2;
    std::string path;  // custom_file only
};

Generator generator_from_name(const std::string& name);
std::string generator_name(Generator g);

/// uniform_iid: iid values in [-1,1). step: indicator of x0 < 1/2. log_singularity: cell
/// averages of log(1/x0). indicator: indicator of a random dyadic cube. custom_file: loaded JSON.
GridFunction generate(const GeneratorSpec& spec, std::uint64_t seed);

/// iid values in [-1,1) drawn from rng.
GridFunction random_grid(int dimension, int depth, SplitMix64& rng);

/// Exact average of log(1/x) over [a, b), 0 <= a < b.
double log_singularity_average(double a, double b);

}  // namespace oscnorm
