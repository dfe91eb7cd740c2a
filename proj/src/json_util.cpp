#include "genprior/json_util.hpp"

#include "genprior/error.hpp"

#include <set>

namespace genprior {

using nlohmann::json;

namespace {

double number_at(const json& j, std::size_t i, const std::string& what)
{
    if (!j.is_array() || i >= j.size() || !j[i].is_number()) fail_config(what + ": expected a numeric array");
    return j[i].get<double>();
}

}  // namespace

Vec2 json_vec2(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 2) fail_config(what + ": expected [x, y]");
    return {number_at(j, 0, what), number_at(j, 1, what)};
}

Vec3 json_vec3(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3) fail_config(what + ": expected [x, y, z]");
    return {number_at(j, 0, what), number_at(j, 1, what), number_at(j, 2, what)};
}

json to_json(const Vec3& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

json to_json(const Mat3& m)
{
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

Mat3 json_mat3(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3) fail_config(what + ": expected a 3x3 row-major array");
    Mat3 m;
    for (int r = 0; r < 3; ++r) m.row(r) = json_vec3(j[r], what).transpose();
    return m;
}

std::vector<LabelEntry> parse_vocabulary(const json& j)
{
    if (!j.is_array()) fail_config("vocabulary: expected an array of {id, name}");
    std::vector<LabelEntry> out;
    std::set<LabelId> ids;
    std::set<std::string> names;
    for (const auto& e : j) {
        LabelEntry entry{e.at("id").get<LabelId>(), e.at("name").get<std::string>()};
        if (entry.id == kUnlabeled) fail_config("vocabulary: id 0 is reserved for unlabeled points");
        if (!ids.insert(entry.id).second) fail_config("vocabulary: duplicate id " + std::to_string(entry.id));
        if (!names.insert(entry.name).second) fail_config("vocabulary: duplicate name '" + entry.name + "'");
        out.push_back(std::move(entry));
    }
    return out;
}

json vocabulary_json(const std::vector<LabelEntry>& vocab)
{
    json out = json::array();
    for (const auto& e : vocab) out.push_back({{"id", e.id}, {"name", e.name}});
    return out;
}

Frustum parse_frustum(const json& j)
{
    Frustum f;
    f.intrinsics.width = j.at("width").get<int>();
    f.intrinsics.height = j.at("height").get<int>();
    f.intrinsics.hfov = j.at("hfov").get<double>();
    f.near = j.value("near", f.near);
    f.far = j.value("far", f.far);
    f.expansion = j.value("expansion", f.expansion);
    try {
        f.validate();
    } catch (const Error& e) {
        fail_config(std::string("frustum: ") + e.what());
    }
    return f;
}

json frustum_json(const Frustum& f)
{
    return {{"width", f.intrinsics.width}, {"height", f.intrinsics.height}, {"hfov", f.intrinsics.hfov},
            {"near", f.near},              {"far", f.far},                  {"expansion", f.expansion}};
}

}  // namespace genprior
