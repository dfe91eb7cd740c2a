#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace genprior {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Semantic label id; 0 is reserved for unlabeled points and structure.
using LabelId = std::int32_t;
inline constexpr LabelId kUnlabeled = 0;

struct Rgb
{
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/**
 * Points with per-point semantic label and confidence, plus optional colors.
 * All per-point arrays share the length of `points`.
 */
struct LabeledPointCloud
{
    std::vector<Vec3> points;
    std::vector<LabelId> labels;
    std::vector<double> confidences;
    std::optional<std::vector<Rgb>> colors;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }

    void reserve(std::size_t n);
    void push_back(const Vec3& p, LabelId label = kUnlabeled, double confidence = 1.0);

    /// Append all points of `other` (colors kept only when both carry them).
    void append(const LabeledPointCloud& other);

    /// Copy of the points at `indices`, in order, with every channel kept in lockstep.
    LabeledPointCloud select(std::span<const std::size_t> indices) const;

    template<typename Pred>
    LabeledPointCloud filter(Pred&& keep) const
    {
        std::vector<std::size_t> idx;
        idx.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i)
            if (keep(i)) idx.push_back(i);
        return select(idx);
    }

    /// Points carrying `label`.
    LabeledPointCloud with_label(LabelId label) const;

    /// Throws if channel lengths disagree, a coordinate is non-finite or a
    /// confidence is outside [0, 1].
    void validate() const;

    bool operator==(const LabeledPointCloud&) const = default;
};

/// Pinhole camera with square pixels and principal point at the image center.
struct CameraIntrinsics
{
    int width = 1;
    int height = 1;
    double hfov = 1.0;  ///< radians

    double focal() const;
    double cx() const { return 0.5 * width; }
    double cy() const { return 0.5 * height; }

    void validate() const;

    /// Intrinsics for a grid of another size sharing this camera's focal length
    /// and optical axis (e.g. a laterally outpainted image).
    CameraIntrinsics resized(int new_width, int new_height) const;
};

/// Pixel coordinates in the continuous image plane; pixel (u, v) has its center at (u + 0.5, v + 0.5).
struct PixelCoord
{
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

/**
 * Row-major depth grid in meters. Invalid pixels hold a non-finite value
 * (kInvalidDepth); every other entry must be finite and positive.
 */
struct DepthImage
{
    static constexpr float kInvalidDepth = std::numeric_limits<float>::quiet_NaN();

    int width = 0;
    int height = 0;
    std::vector<float> depths;

    DepthImage() = default;
    DepthImage(int w, int h, float fill = kInvalidDepth);

    float at(int u, int v) const { return depths[static_cast<std::size_t>(v) * width + u]; }
    float& at(int u, int v) { return depths[static_cast<std::size_t>(v) * width + u]; }
    static bool is_valid(float d) noexcept { return std::isfinite(d) && d > 0.0f; }

    void validate() const;
};

/// Optional per-pixel semantics aligned with a DepthImage.
struct PixelLabels
{
    int width = 0;
    int height = 0;
    std::vector<LabelId> labels;
    std::vector<double> confidences;  ///< empty means confidence 1 everywhere
};

struct RigidTransform
{
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    RigidTransform inverse() const;
    /// (*this) after `first`: p -> this(first(p)).
    RigidTransform compose(const RigidTransform& first) const;

    /// Throws unless the rotation is orthonormal with determinant +1 (1e-9).
    void validate() const;
};

/**
 * Camera viewing volume widened laterally by `expansion` pixels per side.
 *
 * The pyramid apex sits at z = near on the optical axis; with the default
 * near = -0.2 the volume therefore includes a clearance region around and
 * slightly behind the camera. A camera-frame point is inside iff
 *   near <= z <= far, |x| <= (z - near) tan_h, |y| <= (z - near) tan_v.
 */
struct Frustum
{
    CameraIntrinsics intrinsics;
    double near = -0.2;
    double far = 11.0;
    int expansion = 0;

    double tan_half_h() const;
    double tan_half_v() const;
    bool contains(const Vec3& p) const;
    void validate() const;
};

// Camera frame: +Z forward, +X right, -Y down (i.e. +Y up).

PixelCoord project(const Vec3& p, const CameraIntrinsics& intrinsics);

LabeledPointCloud backproject(const DepthImage& depth,
                              const CameraIntrinsics& intrinsics,
                              const PixelLabels* labels = nullptr);

/// Keep points whose forward (z) coordinate is <= max_depth.
LabeledPointCloud cull_depth(const LabeledPointCloud& cloud, double max_depth);

/// Keep points with at least `min_neighbors` other points strictly within `radius`.
LabeledPointCloud radius_outlier_removal(const LabeledPointCloud& cloud,
                                         double radius,
                                         std::size_t min_neighbors);

LabeledPointCloud apply_transform(const LabeledPointCloud& cloud, const RigidTransform& t);

LabeledPointCloud frustum_filter(const LabeledPointCloud& cloud, const Frustum& f);

struct IcpResult
{
    Vec3 translation = Vec3::Zero();
    std::size_t iterations = 0;
    bool converged = false;
    /// RMS matched-pair distance before each update and after the last one
    /// (iterations + 1 entries).
    std::vector<double> rms_trace;
    /// Mean matched-pair distance at the same points as rms_trace.
    std::vector<double> mean_trace;
};

/**
 * Translation-only point-to-point ICP: each iteration matches every shifted
 * source point to its nearest target point and moves the source by the mean
 * residual. Stops when the update norm drops below `tolerance` or after
 * `max_iters` updates. The returned translation maps source onto target.
 */
IcpResult translation_icp(const LabeledPointCloud& source,
                          const LabeledPointCloud& target,
                          std::size_t max_iters,
                          double tolerance);

}  // namespace genprior
