#pragma once

#include "genprior/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace genprior {

/// Plane normal . p = offset, with the camera origin on the positive side.
struct PlaneModel
{
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
    double inlier_ratio = 0.0;
    double rmse = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
    void validate() const;
};

struct RansacParams
{
    double inlier_threshold = 0.01;  ///< meters
    std::size_t max_iters = 1000;
    std::uint64_t seed = 1234;
};

/**
 * RANSAC plane fit over 3-point hypotheses drawn from a seeded counter-based
 * stream, followed by one least-squares refit over the best hypothesis'
 * inliers. inlier_ratio and rmse are reported for the refined plane.
 */
PlaneModel ransac_plane(const LabeledPointCloud& points, const RansacParams& params = {});

/// Minimal rotation taking the plane normal to +Z, plus the translation that puts the plane at z = 0.
RigidTransform floor_alignment(const PlaneModel& plane);

/// Drop points below `band` meters above the floor (below-floor points included).
LabeledPointCloud trim_above_floor(const LabeledPointCloud& cloud, double band = 0.20);

/// Height of the camera origin above the floor after alignment.
double camera_height(const RigidTransform& alignment);

// Five-line text record:
//   genprior-plane 1
//   normal <nx> <ny> <nz>
//   offset <d>
//   rmse <r>
//   inlier_ratio <q>
std::string format_plane(const PlaneModel& plane);
PlaneModel parse_plane(const std::string& text);
void write_plane(const std::filesystem::path& path, const PlaneModel& plane);
PlaneModel read_plane(const std::filesystem::path& path);

}  // namespace genprior
