#pragma once

#include <string>

#include <json.hpp>

#include "oscnorm/dyadic_grid.hpp"
#include "oscnorm/families.hpp"
#include "oscnorm/maximal_ops.hpp"
#include "oscnorm/norms.hpp"

namespace oscnorm {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const GridFunction& f);
GridFunction function_from_json(const Json& j);

GridFunction load_function(const std::string& path);
void save_function(const GridFunction& f, const std::string& path);

Json to_json(const CubeId& c, int dimension);
Json to_json(const CubeFamily& family);
/// Rebuilds a family on the depth-`depth` tree; the stored kind is validated.
CubeFamily family_from_json(const Json& j, int dimension, int depth);

Json to_json(const FamilyClass& cls);
FamilyClass family_class_from_json(const Json& j);
Json to_json(const NormParams& params);
NormParams params_from_json(const Json& j);
Json to_json(const NormReport& report);
Json to_json(const MaximalResult& result);

Json read_json(const std::string& path);
/// Two-space indented dump with a trailing newline.
void write_json(const Json& j, const std::string& path);
std::string dump(const Json& j);

}  // namespace oscnorm
