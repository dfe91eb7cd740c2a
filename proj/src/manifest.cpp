#include "genprior/manifest.hpp"

#include "genprior/error.hpp"
#include "genprior/io.hpp"
#include "genprior/json_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace genprior {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

CloudSource parse_source(const json& j, const fs::path& base, const std::string& what)
{
    CloudSource s;
    if (j.is_string()) {
        s.ply = resolve(base, j.get<std::string>());
        return s;
    }
    if (!j.is_object()) fail_config(what + ": expected a path or an object");
    if (j.contains("ply")) s.ply = resolve(base, j.at("ply").get<std::string>());
    if (j.contains("depth")) s.depth = resolve(base, j.at("depth").get<std::string>());
    if (j.contains("labels")) s.labels = resolve(base, j.at("labels").get<std::string>());
    if (j.contains("confidence")) s.confidence = resolve(base, j.at("confidence").get<std::string>());
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (s.ply.empty() == s.depth.empty()) fail_config(what + ": give exactly one of 'ply' or 'depth'");
    if (!s.ply.empty() && !(s.labels.empty() && s.confidence.empty()))
        fail_config(what + ": label/confidence grids only apply to depth sources");
    return s;
}

void parse_preprocess(const json& j, PreprocessParams& p)
{
    p.max_depth = j.value("max_depth", p.max_depth);
    p.outlier_radius = j.value("outlier_radius", p.outlier_radius);
    p.outlier_neighbors = j.value("outlier_neighbors", p.outlier_neighbors);
    p.trim_band = j.value("trim_band", p.trim_band);
    p.icp = j.value("icp", p.icp);
    p.icp_max_iters = j.value("icp_max_iters", p.icp_max_iters);
    p.icp_tolerance = j.value("icp_tolerance", p.icp_tolerance);
    if (j.contains("max_icp_rms") && !j.at("max_icp_rms").is_null()) p.max_icp_rms = j.at("max_icp_rms").get<double>();
    if (!(p.max_depth > 0.0)) fail_config("preprocess.max_depth must be > 0");
    if (!(p.outlier_radius > 0.0)) fail_config("preprocess.outlier_radius must be > 0");
    if (!(p.icp_tolerance > 0.0)) fail_config("preprocess.icp_tolerance must be > 0");
}

void parse_alignment(const json& j, AlignmentPolicy& a)
{
    const auto policy = j.value("policy", std::string("estimate"));
    if (policy == "estimate") a.mode = AlignmentPolicy::Mode::Estimate;
    else if (policy == "given") a.mode = AlignmentPolicy::Mode::Given;
    else fail_config("alignment.policy must be 'estimate' or 'given', got '" + policy + "'");
    if (j.contains("floor_labels")) a.floor_labels = j.at("floor_labels").get<std::vector<LabelId>>();
    a.ransac.inlier_threshold = j.value("inlier_threshold", a.ransac.inlier_threshold);
    a.ransac.max_iters = j.value("max_iters", a.ransac.max_iters);
    a.ransac.seed = j.value("seed", a.ransac.seed);
    if (j.contains("rotation")) a.given.rotation = json_mat3(j.at("rotation"), "alignment.rotation");
    if (j.contains("translation")) a.given.translation = json_vec3(j.at("translation"), "alignment.translation");
    if (a.mode == AlignmentPolicy::Mode::Given) {
        try {
            a.given.validate();
        } catch (const Error& e) {
            fail_config(std::string("alignment: ") + e.what());
        }
    }
}

}  // namespace

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail_config(e.what());
    }
    try {
        if (j.value("format", std::string()) != "genprior-manifest") fail_config("not a genprior-manifest");
        if (j.value("version", 0) != 1) fail_config("unsupported manifest version");
        Manifest m;
        m.base_dir = base_dir;
        const auto frame = j.value("frame", std::string("camera"));
        if (frame == "camera") m.frame = Manifest::Frame::Camera;
        else if (frame == "floor") m.frame = Manifest::Frame::Floor;
        else fail_config("frame must be 'camera' or 'floor', got '" + frame + "'");

        m.observed = parse_source(j.at("observed"), base_dir, "observed");
        const auto& samples = j.at("samples");
        if (!samples.is_array()) fail_config("samples: expected an array");
        for (std::size_t i = 0; i < samples.size(); ++i)
            m.samples.push_back(parse_source(samples[i], base_dir, "samples[" + std::to_string(i) + "]"));
        m.vocabulary = parse_vocabulary(j.at("vocabulary"));
        m.frustum = parse_frustum(j.at("frustum"));
        if (j.contains("camera")) {
            const auto& c = j.at("camera");
            m.camera_xy = Vec2(c.value("x", 0.0), c.value("y", 0.0));
            m.camera_yaw = c.value("yaw", 0.0);
            if (c.contains("height")) m.camera_height = c.at("height").get<double>();
        }
        if (j.contains("floor")) m.floor = parse_plane(j.at("floor").get<std::string>());
        if (j.contains("recorded_alignment")) {
            const auto& a = j.at("recorded_alignment");
            m.recorded_alignment.rotation = json_mat3(a.at("rotation"), "recorded_alignment.rotation");
            m.recorded_alignment.translation = json_vec3(a.at("translation"), "recorded_alignment.translation");
        }
        if (j.contains("alignment")) parse_alignment(j.at("alignment"), m.alignment);
        if (j.contains("preprocess")) parse_preprocess(j.at("preprocess"), m.preprocess);
        return m;
    } catch (const json::exception& e) {
        fail_config(e.what());
    }
}

Manifest read_manifest(const fs::path& path)
{
    try {
        return parse_manifest(read_text_file(path), path.parent_path());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) fail_config("manifest '" + path.string() + "': " + e.what());
        throw;
    }
}

namespace {

struct LoadedCloud
{
    LabeledPointCloud cloud;
    bool has_labels = false;
    std::string name;
};

LoadedCloud load_cloud(const CloudSource& src, const Frustum& frustum)
{
    LoadedCloud out;
    if (!src.ply.empty()) {
        auto r = read_ply(src.ply);
        out.cloud = std::move(r.cloud);
        out.has_labels = r.has_labels;
        out.name = src.ply.filename().string();
        return out;
    }
    const DepthImage depth = read_depth(src.depth);
    const CameraIntrinsics intr = frustum.intrinsics.resized(depth.width, depth.height);
    out.name = src.depth.filename().string();
    if (!src.labels.empty()) {
        const PixelLabels labels = read_label_grid(src.labels, src.confidence);
        if (labels.width != depth.width || labels.height != depth.height)
            fail_io("'" + src.labels.string() + "': label grid size does not match '" + src.depth.string() + "'");
        out.cloud = backproject(depth, intr, &labels);
        out.has_labels = true;
    } else {
        out.cloud = backproject(depth, intr);
    }
    return out;
}

void check_vocabulary(const LabeledPointCloud& c, const std::set<LabelId>& allowed, const std::string& name)
{
    for (LabelId l : c.labels)
        if (l != kUnlabeled && !allowed.count(l))
            fail_config("vocabulary mismatch: '" + name + "' carries label " + std::to_string(l) +
                        " which is not in the vocabulary");
}

LabeledPointCloud clean(const LabeledPointCloud& c, const PreprocessParams& p)
{
    auto out = cull_depth(c, p.max_depth);
    if (p.outlier_neighbors > 0) out = radius_outlier_removal(out, p.outlier_radius, p.outlier_neighbors);
    return out;
}

double heading_of(const RigidTransform& t)
{
    const Vec3 fwd = t.rotation * Vec3::UnitZ();
    if (std::hypot(fwd.x(), fwd.y()) < 1e-9) fail("alignment: camera looks straight up or down");
    return std::atan2(fwd.y(), fwd.x());
}

}  // namespace

SampleSet load_sample_set(const Manifest& m)
{
    if (m.samples.empty()) fail("manifest lists no samples; at least one is required");
    std::set<LabelId> allowed;
    for (const auto& e : m.vocabulary) allowed.insert(e.id);

    SampleSet set;
    set.vocabulary = m.vocabulary;
    set.support.frustum = m.frustum;

    auto obs = load_cloud(m.observed, m.frustum);
    if (!obs.has_labels) set.warnings.push_back("observed '" + obs.name + "': no label channel, all points unlabeled");

    std::vector<LoadedCloud> raw;
    raw.reserve(m.samples.size());
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
        raw.push_back(load_cloud(m.samples[i], m.frustum));
        if (!raw.back().has_labels)
            set.warnings.push_back("sample " + std::to_string(i) + " '" + raw.back().name +
                                   "': no label channel, all points unlabeled");
    }

    if (m.frame == Manifest::Frame::Floor) {
        check_vocabulary(obs.cloud, allowed, obs.name);
        set.observed = std::move(obs.cloud);
        set.support.origin = m.camera_xy;
        set.support.yaw = m.camera_yaw;
        set.camera_height = m.camera_height;
        set.floor = m.floor;
        set.alignment = m.recorded_alignment;
    } else {
        const auto& p = m.preprocess;
        auto observed = frustum_filter(clean(obs.cloud, p), m.frustum);

        RigidTransform align = m.alignment.given;
        if (m.alignment.mode == AlignmentPolicy::Mode::Estimate) {
            const auto& fl = m.alignment.floor_labels;
            LabeledPointCloud candidates =
                fl.empty() ? observed : observed.filter([&](std::size_t i) {
                    return std::find(fl.begin(), fl.end(), observed.labels[i]) != fl.end();
                });
            if (fl.empty()) set.warnings.push_back("no floor labels given; fitting the floor to every observed point");
            if (candidates.size() < 3)
                fail("floor estimation: only " + std::to_string(candidates.size()) + " floor-labeled observed points");
            const PlaneModel plane = ransac_plane(candidates, m.alignment.ransac);
            set.floor = plane;
            align = floor_alignment(plane);
        }
        set.alignment = align;
        set.camera_height = camera_height(align);
        set.support.origin = align.apply(Vec3::Zero()).head<2>();
        set.support.yaw = heading_of(align);

        for (LabelId l : m.alignment.floor_labels) allowed.insert(l);
        check_vocabulary(observed, allowed, obs.name);
        set.observed = trim_above_floor(apply_transform(observed, align), p.trim_band);

        for (std::size_t i = 0; i < raw.size(); ++i) {
            const std::string name = "sample " + std::to_string(i) + " '" + raw[i].name + "'";
            auto c = clean(raw[i].cloud, p);
            if (p.icp && !c.empty() && !observed.empty()) {
                const IcpResult icp = translation_icp(c, observed, p.icp_max_iters, p.icp_tolerance);
                if (p.max_icp_rms && icp.rms_trace.back() > *p.max_icp_rms) {
                    char buf[96];
                    std::snprintf(buf, sizeof buf, ": misaligned, ICP residual %.3f m exceeds %.3f m",
                                  icp.rms_trace.back(), *p.max_icp_rms);
                    fail(name + buf);
                }
                c = apply_transform(c, RigidTransform{Mat3::Identity(), icp.translation});
            }
            const bool had_points = !c.empty();
            c = frustum_filter(c, m.frustum);
            if (had_points && c.empty()) fail(name + ": misaligned, no points inside the frustum");
            check_vocabulary(c, allowed, raw[i].name);
            raw[i].cloud = trim_above_floor(apply_transform(c, align), p.trim_band);
        }
    }

    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (m.frame == Manifest::Frame::Floor) check_vocabulary(raw[i].cloud, allowed, raw[i].name);
        WorkspaceSample s;
        s.cloud = std::move(raw[i].cloud);
        s.sample_id = static_cast<int>(i);
        s.seed = m.samples[i].seed.value_or(0);
        s.source = raw[i].name;
        set.samples.push_back(std::move(s));
    }
    merge_observed(set);
    set.validate();
    return set;
}

SampleSet load_sample_set(const fs::path& manifest_path)
{
    return load_sample_set(read_manifest(manifest_path));
}

namespace {

std::string sample_file_name(std::size_t i, std::size_t n)
{
    const int digits = std::max<int>(3, static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size()));
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%0*zu.ply", digits, i);
    return buf;
}

}  // namespace

void write_bundle(const SampleSet& set, const fs::path& out_dir)
{
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail_io("cannot create '" + out_dir.string() + "': " + ec.message());

    write_ply(out_dir / "observed.ply", set.observed);
    json samples = json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& s = set.samples[i];
        const std::size_t own = s.cloud.size() - s.observed_tail;
        std::vector<std::size_t> idx(own);
        for (std::size_t k = 0; k < own; ++k) idx[k] = k;
        const std::string file = sample_file_name(i, set.size());
        write_ply(out_dir / file, s.cloud.select(idx));
        samples.push_back({{"ply", file}, {"seed", s.seed}});
    }

    json j;
    j["format"] = "genprior-manifest";
    j["version"] = 1;
    j["frame"] = "floor";
    j["observed"] = "observed.ply";
    j["samples"] = samples;
    j["vocabulary"] = vocabulary_json(set.vocabulary);
    j["frustum"] = frustum_json(set.support.frustum);
    json cam = {{"x", set.support.origin.x()}, {"y", set.support.origin.y()}, {"yaw", set.support.yaw}};
    if (set.camera_height) cam["height"] = *set.camera_height;
    j["camera"] = cam;
    if (set.floor) j["floor"] = format_plane(*set.floor);
    j["recorded_alignment"] = {{"rotation", to_json(set.alignment.rotation)},
                               {"translation", to_json(set.alignment.translation)}};
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace genprior
