#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oscnorm/generators.hpp"
#include "oscnorm/io.hpp"

namespace oscnorm {

enum class Suite { sparse_jn, sv_equivalence, fractional_sv, jn_extrapolation, sobolev_chain, embedding_chain, riesz };

Suite suite_from_name(const std::string& name);
std::string suite_name(Suite s);

struct SuiteConfig {
    Suite suite = Suite::riesz;
    int dimension = 1;
    int depth = 2;
    int trials = 100;
    std::uint64_t seed = 0;
    std::vector<double> p;          // empty: the suite's default list
    int k = 1;
    int q = 1;
    std::optional<double> lambda;   // unset: the suite's default
    Generator generator = Generator::uniform_iid;
    std::string input_path;         // custom-file generator
    bool keep_rows = true;
    unsigned threads = 0;           // 0: hardware concurrency
};

struct Stat {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;

    void add(double v);
};

struct Assertion {
    std::string name;
    std::size_t checked = 0;
    std::size_t violations = 0;

    bool passed() const { return violations == 0; }
};

struct SuiteReport {
    SuiteConfig config;
    Json rows = Json::array();
    std::map<std::string, Stat> stats;
    std::vector<Assertion> assertions;

    bool passed() const;
    const Stat& stat(const std::string& name) const;
    const Assertion& assertion(const std::string& name) const;
};

/// Runs a verification suite. Trials run in parallel; rows are kept in trial order.
SuiteReport run_suite(const SuiteConfig& config);

/// The function used by trial `t` of `config`.
GridFunction trial_function(const SuiteConfig& config, int trial);

Json to_json(const SuiteConfig& config);
Json to_json(const SuiteReport& report);

}  // namespace oscnorm
