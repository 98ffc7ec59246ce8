#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "oscnorm/error.hpp"
#include "oscnorm/generators.hpp"
#include "oscnorm/io.hpp"
#include "oscnorm/suites.hpp"

using namespace oscnorm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "oscnorm_test_cli_verify";
    fs::create_directories(dir);
    return dir / name;
}

std::string write_text(const std::string& name, const std::string& text) {
    const fs::path p = scratch(name);
    std::ofstream(p) << text;
    return p.string();
}

SuiteConfig config(Suite s, int n, int L, int trials, std::uint64_t seed) {
    SuiteConfig c;
    c.suite = s;
    c.dimension = n;
    c.depth = L;
    c.trials = trials;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("uniform generator golden values") {
    const GridFunction f = generate({Generator::uniform_iid, 1, 1, ""}, 42);
    REQUIRE(f.cell_count() == 2);
    CHECK(f[0] == 0.4831297575436466);
    CHECK(f[1] == -0.6801792142461598);
    CHECK(generate({Generator::uniform_iid, 2, 3, ""}, 7) == generate({Generator::uniform_iid, 2, 3, ""}, 7));
    CHECK_FALSE(generate({Generator::uniform_iid, 2, 3, ""}, 7) == generate({Generator::uniform_iid, 2, 3, ""}, 8));
    for (double v : generate({Generator::uniform_iid, 2, 4, ""}, 1).values()) {
        CHECK(v >= -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("step generator") {
    const GridFunction a = generate({Generator::step, 1, 3, ""}, 0);
    CHECK(std::vector<double>(a.values().begin(), a.values().end()) ==
          std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0});
    const GridFunction b = generate({Generator::step, 2, 1, ""}, 0);
    CHECK(std::vector<double>(b.values().begin(), b.values().end()) == std::vector<double>{1, 1, 0, 0});
}

TEST_CASE("log-singularity generator") {
    const GridFunction f = generate({Generator::log_singularity, 1, 2, ""}, 0);
    const double expect[] = {2.386294361119891, 1.0, 0.476751856235452, 0.13695378264465718};
    for (std::size_t i = 0; i < 4; ++i) CHECK(f[i] == doctest::Approx(expect[i]).epsilon(1e-14));
    // Cell averages: the mean over Q0 of log(1/x) is 1.
    const GridFunction g = generate({Generator::log_singularity, 1, 6, ""}, 0);
    double mean = 0.0;
    for (double v : g.values()) mean += v;
    CHECK(mean / static_cast<double>(g.cell_count()) == doctest::Approx(1.0).epsilon(1e-13));
    // Midpoint rule away from the singularity.
    for (std::size_t i = 1; i < g.cell_count(); i += 9) {
        const double a = static_cast<double>(i) / 64.0;
        double s = 0.0;
        const int m = 20000;
        for (int k = 0; k < m; ++k) s += -std::log(a + (k + 0.5) / (64.0 * m));
        CHECK(g[i] == doctest::Approx(s / m).epsilon(1e-8));
    }
}

TEST_CASE("indicator generator") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const GridFunction f = generate({Generator::indicator, 2, 3, ""}, seed);
        std::size_t ones = 0;
        for (double v : f.values()) {
            CHECK((v == 0.0 || v == 1.0));
            ones += v == 1.0;
        }
        // The support is a dyadic cube: 4^k cells for some k.
        bool power = false;
        for (std::size_t k = 0; k <= 3; ++k) power = power || ones == (std::size_t{1} << (2 * k));
        CHECK(power);
        CHECK(f == generate({Generator::indicator, 2, 3, ""}, seed));
    }
}

TEST_CASE("generator names") {
    for (auto g : {Generator::uniform_iid, Generator::step, Generator::log_singularity, Generator::indicator,
                   Generator::custom_file})
        CHECK(generator_from_name(generator_name(g)) == g);
    CHECK_THROWS_WITH_AS(generator_from_name("gaussian"), "unknown generator 'gaussian'", Error);
    CHECK_THROWS_AS(suite_from_name("commutator"), Error);
}

TEST_CASE("function files") {
    const GridFunction f = oracle::random_function(2, 3, 11);
    const std::string path = scratch("f.json").string();
    save_function(f, path);
    CHECK(load_function(path) == f);

    const std::string ok = write_text("ok.json", R"({"dimension": 1, "depth": 1, "values": [0.25, -3]})");
    CHECK(load_function(ok) == GridFunction(1, 1, {0.25, -3.0}));

    const std::string bad = write_text("len.json", R"({"dimension": 1, "depth": 1, "values": [1, 2, 3]})");
    CHECK_THROWS_WITH_AS(load_function(bad), "schema error: field 'values' has length 3, expected 2^(n*depth) = 2",
                         Error);
    const std::string missing = write_text("missing.json", R"({"dimension": 1, "values": [1, 2]})");
    CHECK_THROWS_WITH_AS(load_function(missing), "schema error: missing field 'depth'", Error);
    const std::string dim = write_text("dim.json", R"({"dimension": 3, "depth": 0, "values": [1]})");
    CHECK_THROWS_WITH_AS(load_function(dim), "schema error: field 'dimension' must be 1 or 2", Error);
    const std::string text = write_text("text.json", R"({"dimension": 1, "depth": 0, "values": ["x"]})");
    CHECK_THROWS_AS(load_function(text), Error);
    const std::string broken = write_text("broken.json", R"({"dimension": 1,)");
    CHECK_THROWS_AS(load_function(broken), Error);
    CHECK_THROWS_AS(load_function(scratch("absent.json").string()), Error);
}

TEST_CASE("families and parameters serialize") {
    const DyadicTree tree(2, 2);
    const auto fam = std::get<CubeFamily>(
        validate(tree, std::vector<CubeId>{unit_cube, CubeId{2, {1, 3}}}, FamilyClass::sparse(0.5)));
    const Json j = to_json(fam);
    CHECK(j["kind"] == "sparse");
    CHECK(j["cubes"][1]["level"] == 2);
    CHECK(j["cubes"][1]["coords"] == Json::array({1, 3}));
    const CubeFamily back = family_from_json(j, 2, 2);
    CHECK(back.members() == fam.members());
    CHECK(back.kind() == fam.kind());

    Json nested = to_json(std::get<CubeFamily>(validate(tree, std::vector<CubeId>{unit_cube, CubeId{1, {0, 0}}},
                                                        FamilyClass::general())));
    nested["kind"] = to_json(FamilyClass::packing())["kind"];
    CHECK_THROWS_AS(family_from_json(nested, 2, 2), Error);

    for (const NormParams& p : {NormParams::jn(2.0), NormParams::svt(2, 2, 2, 1.0, 4.0), NormParams::bmo()}) {
        const NormParams q = params_from_json(to_json(p));
        CHECK(q.k == p.k);
        CHECK(q.q == p.q);
        CHECK(q.lambda == p.lambda);
        CHECK(q.p == p.p);
        CHECK(q.convention == p.convention);
        CHECK(q.family_class == p.family_class);
        CHECK(q.oscillation == p.oscillation);
    }
    CHECK(to_json(NormParams::bmo())["p"] == "inf");

    const Json r = to_json(packing_sup_norm(GridFunction(1, 1, {0.0, 1.0}), NormParams::jn(2.0)));
    for (const char* key : {"value_lower", "value_upper", "exact", "params", "witness", "dyadic"}) CHECK(r.contains(key));
    CHECK(r["dyadic"] == true);
}

TEST_CASE("riesz suite") {
    const auto r = run_suite(config(Suite::riesz, 1, 3, 100, 0));
    CHECK(r.passed());
    REQUIRE(r.assertions.size() == 1);
    CHECK(r.assertions[0].checked == 300);
    CHECK(r.rows.size() == 300);
}

TEST_CASE("sparse-jn example row") {
    const std::string path = write_text("alt.json", R"({"dimension": 1, "depth": 2, "values": [0, 1, 0, 1]})");
    SuiteConfig c = config(Suite::sparse_jn, 1, 2, 1, 0);
    c.generator = Generator::custom_file;
    c.input_path = path;
    c.p = {2.0};
    const auto r = run_suite(c);
    CHECK(r.passed());
    REQUIRE(r.rows.size() == 1);
    const Json& row = r.rows[0];
    CHECK(row["sjn"].get<double>() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(row["twice_maximal"].get<double>() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(row["ratio"].get<double>() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("constant input keeps every chain trivially") {
    const std::string path = write_text("const.json", R"({"dimension": 1, "depth": 3, "values": [2, 2, 2, 2, 2, 2, 2, 2]})");
    SuiteConfig c = config(Suite::embedding_chain, 1, 3, 1, 0);
    c.generator = Generator::custom_file;
    c.input_path = path;
    const auto r = run_suite(c);
    CHECK(r.passed());
    for (const auto& row : r.rows)
        for (const char* key : {"garo", "jn", "sjn", "weak_lp", "bmo", "bds", "sjn1", "llogl"})
            if (row.contains(key)) CHECK(row[key].get<double>() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("scale limits are enforced before running") {
    CHECK_THROWS_AS(run_suite(config(Suite::sparse_jn, 1, 4, 1, 0)), Error);
    CHECK_THROWS_AS(run_suite(config(Suite::sobolev_chain, 2, 1, 1, 0)), Error);
    CHECK_THROWS_AS(run_suite(config(Suite::jn_extrapolation, 1, 1, 1, 0)), Error);
    CHECK_THROWS_AS(run_suite(config(Suite::riesz, 3, 1, 1, 0)), Error);
    CHECK_THROWS_AS(run_suite(config(Suite::riesz, 1, 1, 0, 0)), Error);
}

TEST_CASE("reports are deterministic and self-auditing") {
    SuiteConfig c = config(Suite::sparse_jn, 1, 3, 40, 5);
    c.threads = 1;
    const std::string a = dump(to_json(run_suite(c)));
    c.threads = 4;
    const auto report = run_suite(c);
    const std::string b = dump(to_json(report));
    CHECK(a == b);

    const std::string path = scratch("report.json").string();
    write_json(to_json(report), path);
    CHECK(dump(read_json(path)) == b);

    for (const auto& row : report.rows) {
        const GridFunction f = trial_function(c, row["trial"].get<int>());
        const CubeFamily w = family_from_json(row["witness"], 1, 3);
        const double v = evaluate_family(f, NormParams::sjn(row["p"].get<double>()), w);
        CHECK(v == doctest::Approx(row["sjn"].get<double>()).epsilon(1e-12));
    }
}

TEST_CASE("suites pass at small scale") {
    for (Suite s : {Suite::sv_equivalence, Suite::fractional_sv, Suite::sobolev_chain, Suite::embedding_chain}) {
        const auto r = run_suite(config(s, 1, 2, 20, 3));
        CHECK(r.passed());
        CHECK_FALSE(r.assertions.empty());
    }
    SuiteConfig q2 = config(Suite::sv_equivalence, 1, 2, 10, 4);
    q2.k = 2;
    q2.q = 2;
    q2.lambda = 0.5;
    CHECK(run_suite(q2).passed());

    SuiteConfig e = config(Suite::jn_extrapolation, 1, 8, 1, 0);
    e.generator = Generator::log_singularity;
    const auto r = run_suite(e);
    CHECK(r.passed());
    CHECK(r.stat("max_ratio_depth8").max <= 1.05 * r.stat("max_ratio_depth6").max);
}
