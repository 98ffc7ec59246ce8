#include "oscnorm/generators.hpp"

#include <cmath>

#include "oscnorm/error.hpp"
#include "oscnorm/io.hpp"

namespace oscnorm {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    if (bound == 0) throw Error("empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return seed + 0x9E3779B97F4A7C15ULL * (trial + 1); }

Generator generator_from_name(const std::string& name) {
    if (name == "uniform-iid") return Generator::uniform_iid;
    if (name == "step") return Generator::step;
    if (name == "log-singularity") return Generator::log_singularity;
    if (name == "indicator") return Generator::indicator;
    if (name == "custom-file") return Generator::custom_file;
    throw Error("unknown generator '" + name + "'");
}

std::string generator_name(Generator g) {
    switch (g) {
        case Generator::uniform_iid: return "uniform-iid";
        case Generator::step: return "step";
        case Generator::log_singularity: return "log-singularity";
        case Generator::indicator: return "indicator";
        case Generator::custom_file: return "custom-file";
    }
    return "";
}

double log_singularity_average(double a, double b) {
    if (!(a >= 0.0 && b > a)) throw Error("need 0 <= a < b");
    auto F = [](double x) { return x == 0.0 ? 0.0 : x - x * std::log(x); };
    return (F(b) - F(a)) / (b - a);
}

GridFunction random_grid(int dimension, int depth, SplitMix64& rng) {
    const std::size_t count = std::size_t{1} << (dimension * depth);
    std::vector<double> v(count);
    for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
    return GridFunction(dimension, depth, std::move(v));
}

GridFunction generate(const GeneratorSpec& spec, std::uint64_t seed) {
    const int n = spec.dimension, L = spec.depth;
    if (spec.kind == Generator::custom_file) return load_function(spec.path);
    if (n != 1 && n != 2) throw Error("dimension must be 1 or 2");
    if (L < 0) throw Error("depth must be nonnegative");
    SplitMix64 rng(seed);
    if (spec.kind == Generator::uniform_iid) return random_grid(n, L, rng);

    const std::int64_t side_count = std::int64_t{1} << L;
    const std::size_t count = std::size_t{1} << (n * L);
    std::vector<double> v(count);
    const double h = 1.0 / static_cast<double>(side_count);
    switch (spec.kind) {
        case Generator::step:
            for (std::size_t i = 0; i < count; ++i) {
                const auto x0 = static_cast<std::int64_t>(n == 2 ? i / static_cast<std::size_t>(side_count) : i);
                v[i] = 2 * x0 < side_count ? 1.0 : 0.0;
            }
            break;
        case Generator::log_singularity:
            for (std::size_t i = 0; i < count; ++i) {
                const auto x0 = static_cast<double>(n == 2 ? i / static_cast<std::size_t>(side_count) : i);
                v[i] = log_singularity_average(x0 * h, (x0 + 1.0) * h);
            }
            break;
        case Generator::indicator: {
            const int level = static_cast<int>(rng.below(static_cast<std::uint64_t>(L) + 1));
            CubeId c{level, {0, 0}};
            for (int d = 0; d < n; ++d)
                c.coords[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(rng.below(std::uint64_t{1} << level));
            for (auto i : cells_in(c, n, L)) v[i] = 1.0;
            break;
        }
        default: break;
    }
    return GridFunction(n, L, std::move(v));
}

}  // namespace oscnorm
