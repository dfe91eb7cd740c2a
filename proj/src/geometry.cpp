#include "genprior/geometry.hpp"

#include "genprior/error.hpp"
#include "genprior/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace genprior {

void LabeledPointCloud::reserve(std::size_t n)
{
    points.reserve(n);
    labels.reserve(n);
    confidences.reserve(n);
    if (colors) colors->reserve(n);
}

void LabeledPointCloud::push_back(const Vec3& p, LabelId label, double confidence)
{
    points.push_back(p);
    labels.push_back(label);
    confidences.push_back(confidence);
    if (colors) colors->push_back(Rgb{});
}

void LabeledPointCloud::append(const LabeledPointCloud& other)
{
    const bool keep_colors = colors.has_value() && other.colors.has_value();
    points.insert(points.end(), other.points.begin(), other.points.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    confidences.insert(confidences.end(), other.confidences.begin(), other.confidences.end());
    if (keep_colors)
        colors->insert(colors->end(), other.colors->begin(), other.colors->end());
    else
        colors.reset();
}

LabeledPointCloud LabeledPointCloud::select(std::span<const std::size_t> indices) const
{
    LabeledPointCloud out;
    if (colors) out.colors.emplace();
    out.reserve(indices.size());
    for (const std::size_t i : indices) {
        out.points.push_back(points[i]);
        out.labels.push_back(labels[i]);
        out.confidences.push_back(confidences[i]);
        if (colors) out.colors->push_back((*colors)[i]);
    }
    return out;
}

LabeledPointCloud LabeledPointCloud::with_label(LabelId label) const
{
    return filter([&](std::size_t i) { return labels[i] == label; });
}

void LabeledPointCloud::validate() const
{
    if (labels.size() != points.size() || confidences.size() != points.size())
        fail("point cloud: label/confidence arrays do not match point count");
    if (colors && colors->size() != points.size())
        fail("point cloud: color array does not match point count");
    for (const auto& p : points)
        if (!p.allFinite()) fail("point cloud: non-finite coordinate");
    for (const double c : confidences)
        if (!(c >= 0.0 && c <= 1.0)) fail("point cloud: confidence outside [0, 1]");
}

double CameraIntrinsics::focal() const
{
    return static_cast<double>(width) / (2.0 * std::tan(0.5 * hfov));
}

void CameraIntrinsics::validate() const
{
    if (width < 1 || height < 1) fail("intrinsics: width and height must be >= 1");
    if (!(hfov > 0.0 && hfov < std::numbers::pi)) fail("intrinsics: hfov must lie in (0, pi)");
}

CameraIntrinsics CameraIntrinsics::resized(int new_width, int new_height) const
{
    const double f = focal();
    return CameraIntrinsics{new_width, new_height, 2.0 * std::atan(0.5 * new_width / f)};
}

DepthImage::DepthImage(int w, int h, float fill)
    : width(w), height(h), depths(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill)
{
}

void DepthImage::validate() const
{
    if (width < 0 || height < 0 ||
        depths.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        fail("depth image: grid size does not match width*height");
    for (const float d : depths)
        if (std::isfinite(d) && d <= 0.0f) fail("depth image: finite depth must be positive");
}

RigidTransform RigidTransform::inverse() const
{
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& first) const
{
    RigidTransform out;
    out.rotation = rotation * first.rotation;
    out.translation = rotation * first.translation + translation;
    return out;
}

void RigidTransform::validate() const
{
    if (!rotation.allFinite() || !translation.allFinite()) fail("transform: non-finite entry");
    if (((rotation.transpose() * rotation) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        fail("transform: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9) fail("transform: rotation determinant is not +1");
}

double Frustum::tan_half_h() const
{
    return (0.5 * intrinsics.width + expansion) / intrinsics.focal();
}

double Frustum::tan_half_v() const
{
    return 0.5 * intrinsics.height / intrinsics.focal();
}

bool Frustum::contains(const Vec3& p) const
{
    if (!(p.z() >= near && p.z() <= far)) return false;
    const double reach = p.z() - near;
    return std::abs(p.x()) <= reach * tan_half_h() && std::abs(p.y()) <= reach * tan_half_v();
}

void Frustum::validate() const
{
    intrinsics.validate();
    if (!(near < far)) fail("frustum: near must be < far");
    if (expansion < 0) fail("frustum: expansion must be >= 0");
}

PixelCoord project(const Vec3& p, const CameraIntrinsics& intrinsics)
{
    const double f = intrinsics.focal();
    return PixelCoord{intrinsics.cx() + f * p.x() / p.z(),
                      intrinsics.cy() - f * p.y() / p.z(),
                      p.z()};
}

LabeledPointCloud backproject(const DepthImage& depth,
                              const CameraIntrinsics& intrinsics,
                              const PixelLabels* labels)
{
    intrinsics.validate();
    depth.validate();
    if (depth.width != intrinsics.width || depth.height != intrinsics.height)
        fail("backproject: depth image is " + std::to_string(depth.width) + "x" +
             std::to_string(depth.height) + " but intrinsics are " +
             std::to_string(intrinsics.width) + "x" + std::to_string(intrinsics.height));
    const std::size_t n = depth.depths.size();
    if (labels) {
        if (labels->width != depth.width || labels->height != depth.height ||
            labels->labels.size() != n ||
            (!labels->confidences.empty() && labels->confidences.size() != n))
            fail("backproject: label grid dimensions do not match the depth image");
    }

    const double f = intrinsics.focal();
    const double cx = intrinsics.cx();
    const double cy = intrinsics.cy();
    LabeledPointCloud cloud;
    cloud.reserve(n);
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            const float d = depth.at(u, v);
            if (!DepthImage::is_valid(d)) continue;
            const double z = d;
            const double x = (u + 0.5 - cx) * z / f;
            const double y = (cy - (v + 0.5)) * z / f;
            const std::size_t k = static_cast<std::size_t>(v) * depth.width + u;
            LabelId label = kUnlabeled;
            double conf = 1.0;
            if (labels) {
                label = labels->labels[k];
                if (!labels->confidences.empty()) conf = labels->confidences[k];
            }
            cloud.push_back(Vec3(x, y, z), label, conf);
        }
    }
    return cloud;
}

LabeledPointCloud cull_depth(const LabeledPointCloud& cloud, double max_depth)
{
    if (!(max_depth > 0.0)) fail("cull_depth: max_depth must be > 0");
    return cloud.filter([&](std::size_t i) { return cloud.points[i].z() <= max_depth; });
}

LabeledPointCloud radius_outlier_removal(const LabeledPointCloud& cloud,
                                         double radius,
                                         std::size_t min_neighbors)
{
    if (!(radius > 0.0)) fail("radius_outlier_removal: radius must be > 0");
    if (min_neighbors == 0 || cloud.empty()) return cloud;
    const KdTree3 tree(cloud.points);
    return cloud.filter([&](std::size_t i) {
        return tree.count_within(cloud.points[i], radius, i, min_neighbors) >= min_neighbors;
    });
}

LabeledPointCloud apply_transform(const LabeledPointCloud& cloud, const RigidTransform& t)
{
    LabeledPointCloud out = cloud;
    for (auto& p : out.points) p = t.apply(p);
    return out;
}

LabeledPointCloud frustum_filter(const LabeledPointCloud& cloud, const Frustum& f)
{
    f.validate();
    return cloud.filter([&](std::size_t i) { return f.contains(cloud.points[i]); });
}

namespace {

struct MatchStats
{
    Vec3 mean_residual = Vec3::Zero();
    double rms = 0.0;
    double mean = 0.0;
};

MatchStats match(const LabeledPointCloud& source, const KdTree3& tree,
                 const LabeledPointCloud& target, const Vec3& t)
{
    MatchStats s;
    double sum2 = 0.0, sum = 0.0;
    for (const auto& p : source.points) {
        const Vec3 moved = p + t;
        const auto nn = tree.nearest(moved);
        s.mean_residual += target.points[nn.index] - moved;
        sum2 += nn.dist2;
        sum += std::sqrt(nn.dist2);
    }
    const double n = static_cast<double>(source.size());
    s.mean_residual /= n;
    s.rms = std::sqrt(sum2 / n);
    s.mean = sum / n;
    return s;
}

}  // namespace

IcpResult translation_icp(const LabeledPointCloud& source,
                          const LabeledPointCloud& target,
                          std::size_t max_iters,
                          double tolerance)
{
    if (source.empty() || target.empty()) fail("translation_icp: source and target must be non-empty");
    const KdTree3 tree(target.points);
    IcpResult result;
    MatchStats stats = match(source, tree, target, result.translation);
    result.rms_trace.push_back(stats.rms);
    result.mean_trace.push_back(stats.mean);
    while (result.iterations < max_iters) {
        const Vec3 step = stats.mean_residual;
        result.translation += step;
        ++result.iterations;
        stats = match(source, tree, target, result.translation);
        result.rms_trace.push_back(stats.rms);
        result.mean_trace.push_back(stats.mean);
        if (step.norm() < tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace genprior
