#pragma once

#include "genprior/geometry.hpp"
#include "genprior/priors.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace genprior {

Vec2 json_vec2(const nlohmann::json& j, const std::string& what);
Vec3 json_vec3(const nlohmann::json& j, const std::string& what);
nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const Mat3& m);
Mat3 json_mat3(const nlohmann::json& j, const std::string& what);

/// [{"id": 1, "name": "bed"}, ...]; ids must be unique and nonzero.
std::vector<LabelEntry> parse_vocabulary(const nlohmann::json& j);
nlohmann::json vocabulary_json(const std::vector<LabelEntry>& vocab);

/// {"width", "height", "hfov", "near", "far", "expansion"}; near/far/expansion optional.
Frustum parse_frustum(const nlohmann::json& j);
nlohmann::json frustum_json(const Frustum& f);

}  // namespace genprior
