#include "oscnorm/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "oscnorm/error.hpp"

namespace oscnorm {

namespace {

const Json& field(const Json& j, const char* name) {
    if (!j.is_object()) throw Error("schema error: expected an object");
    auto it = j.find(name);
    if (it == j.end()) throw Error(std::string("schema error: missing field '") + name + "'");
    return *it;
}

int int_field(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number_integer()) throw Error(std::string("schema error: field '") + name + "' must be an integer");
    return v.get<int>();
}

Json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from(const Json& v, const char* name) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) throw Error(std::string("schema error: field '") + name + "' must be a number");
    return v.get<double>();
}

}  // namespace

Json to_json(const GridFunction& f) {
    Json j;
    j["dimension"] = f.dimension();
    j["depth"] = f.depth();
    j["values"] = std::vector<double>(f.values().begin(), f.values().end());
    return j;
}

GridFunction function_from_json(const Json& j) {
    const int n = int_field(j, "dimension");
    const int L = int_field(j, "depth");
    const Json& vals = field(j, "values");
    if (!vals.is_array()) throw Error("schema error: field 'values' must be an array");
    if (n != 1 && n != 2) throw Error("schema error: field 'dimension' must be 1 or 2");
    if (L < 0) throw Error("schema error: field 'depth' must be nonnegative");
    const std::size_t expected = std::size_t{1} << (n * L);
    if (vals.size() != expected) {
        std::ostringstream os;
        os << "schema error: field 'values' has length " << vals.size() << ", expected 2^(n*depth) = " << expected;
        throw Error(os.str());
    }
    std::vector<double> v;
    v.reserve(vals.size());
    for (const auto& x : vals) {
        if (!x.is_number()) throw Error("schema error: field 'values' must contain numbers");
        v.push_back(x.get<double>());
    }
    return GridFunction(n, L, std::move(v));
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("malformed JSON in " + path + ": " + e.what());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << dump(j);
}

GridFunction load_function(const std::string& path) { return function_from_json(read_json(path)); }

void save_function(const GridFunction& f, const std::string& path) { write_json(to_json(f), path); }

Json to_json(const CubeId& c, int dimension) {
    Json j;
    j["level"] = c.level;
    if (dimension == 1) j["coords"] = {c.coords[0]};
    else j["coords"] = {c.coords[0], c.coords[1]};
    return j;
}

Json to_json(const FamilyClass& cls) {
    Json j;
    j["kind"] = cls.kind == FamilyClass::Kind::packing         ? "packing"
                : cls.kind == FamilyClass::Kind::sparse        ? "sparse"
                : cls.kind == FamilyClass::Kind::weakly_sparse ? "weakly_sparse"
                                                               : "general";
    if (cls.kind == FamilyClass::Kind::sparse) j["order"] = cls.order;
    return j;
}

FamilyClass family_class_from_json(const Json& j) {
    const Json& k = field(j, "kind");
    if (!k.is_string()) throw Error("schema error: field 'kind' must be a string");
    const auto s = k.get<std::string>();
    if (s == "packing") return FamilyClass::packing();
    if (s == "weakly_sparse") return FamilyClass::weakly_sparse();
    if (s == "general") return FamilyClass::general();
    if (s == "sparse") return FamilyClass::sparse(number_from(field(j, "order"), "order"));
    throw Error("schema error: unknown family kind '" + s + "'");
}

Json to_json(const CubeFamily& family) {
    Json j = to_json(family.kind());
    Json cubes = Json::array();
    for (const auto& c : family.cubes()) cubes.push_back(to_json(c, family.tree().dimension()));
    j["cubes"] = std::move(cubes);
    return j;
}

CubeFamily family_from_json(const Json& j, int dimension, int depth) {
    const FamilyClass cls = family_class_from_json(j);
    const Json& cubes = field(j, "cubes");
    if (!cubes.is_array()) throw Error("schema error: field 'cubes' must be an array");
    std::vector<CubeId> ids;
    for (const auto& c : cubes) {
        CubeId id;
        id.level = int_field(c, "level");
        const Json& co = field(c, "coords");
        if (!co.is_array() || co.size() != static_cast<std::size_t>(dimension))
            throw Error("schema error: field 'coords' must have one entry per dimension");
        for (int d = 0; d < dimension; ++d) id.coords[static_cast<std::size_t>(d)] = co[static_cast<std::size_t>(d)].get<std::int64_t>();
        require_valid(id, dimension, depth);
        ids.push_back(id);
    }
    const DyadicTree tree(dimension, depth);
    auto checked = validate(tree, ids, cls);
    if (auto* v = std::get_if<Violation>(&checked)) throw Error("family does not validate: " + v->message);
    return std::get<CubeFamily>(checked);
}

Json to_json(const NormParams& params) {
    Json j;
    j["k"] = params.k;
    j["q"] = params.q;
    j["lambda"] = params.lambda;
    j["p"] = number(params.p);
    j["convention"] = params.convention == ExponentConvention::V ? "V" : "SV";
    j["family_class"] = to_json(params.family_class);
    j["oscillation"] = params.oscillation == Oscillation::mean ? "mean" : "best_fit";
    return j;
}

NormParams params_from_json(const Json& j) {
    NormParams p;
    p.k = int_field(j, "k");
    p.q = int_field(j, "q");
    p.lambda = number_from(field(j, "lambda"), "lambda");
    p.p = number_from(field(j, "p"), "p");
    const auto conv = field(j, "convention").get<std::string>();
    if (conv != "V" && conv != "SV") throw Error("schema error: field 'convention' must be V or SV");
    p.convention = conv == "V" ? ExponentConvention::V : ExponentConvention::SV;
    p.family_class = family_class_from_json(field(j, "family_class"));
    const auto osc = field(j, "oscillation").get<std::string>();
    if (osc != "mean" && osc != "best_fit") throw Error("schema error: field 'oscillation' must be mean or best_fit");
    p.oscillation = osc == "mean" ? Oscillation::mean : Oscillation::best_fit;
    return p;
}

Json to_json(const NormReport& report) {
    Json j;
    j["value_lower"] = number(report.value_lower);
    j["value_upper"] = number(report.value_upper);
    j["exact"] = report.exact;
    j["params"] = to_json(report.params);
    j["witness"] = to_json(report.witness);
    if (report.q_weighted) j["q_weighted"] = number(*report.q_weighted);
    j["dyadic"] = true;
    return j;
}

Json to_json(const MaximalResult& result) {
    Json j;
    j["q"] = result.q;
    j["lambda"] = result.lambda;
    j["values"] = to_json(result.values);
    return j;
}

}  // namespace oscnorm
