#include "genprior/floor.hpp"

#include "genprior/error.hpp"
#include "genprior/io.hpp"
#include "genprior/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace genprior {

void PlaneModel::validate() const
{
    if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-9) fail("plane: normal is not unit length");
    if (!std::isfinite(offset)) fail("plane: non-finite offset");
    if (!(inlier_ratio >= 0.0 && inlier_ratio <= 1.0)) fail("plane: inlier ratio outside [0, 1]");
    if (!(rmse >= 0.0)) fail("plane: negative rmse");
}

namespace {

// Orient so that the origin (camera center) has positive signed distance.
void orient_towards_origin(Vec3& n, double& d)
{
    if (d > 0.0) {
        n = -n;
        d = -d;
    }
}

std::size_t count_inliers(const std::vector<Vec3>& pts, const Vec3& n, double d, double thr)
{
    std::size_t c = 0;
    for (const auto& p : pts)
        if (std::abs(n.dot(p) - d) <= thr) ++c;
    return c;
}

}  // namespace

PlaneModel ransac_plane(const LabeledPointCloud& cloud, const RansacParams& params)
{
    const auto& pts = cloud.points;
    const std::size_t n = pts.size();
    if (n < 3) fail("ransac_plane: need at least 3 points, got " + std::to_string(n));
    if (!(params.inlier_threshold > 0.0)) fail("ransac_plane: inlier threshold must be > 0");

    Vec3 lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double scale = std::max((hi - lo).norm(), 1e-300);
    const double degenerate = 1e-12 * scale * scale;

    CounterRng rng = CounterRng::for_stream(params.seed, 0x52414E53u /* "RANS" */);
    std::size_t best_count = 0;
    Vec3 best_n = Vec3::UnitZ();
    double best_d = 0.0;
    for (std::size_t it = 0; it < params.max_iters; ++it) {
        const auto i = rng.uniform_index(n);
        auto j = rng.uniform_index(n - 1);
        if (j >= i) ++j;
        auto k = rng.uniform_index(n - 2);
        if (k >= std::min(i, j)) ++k;
        if (k >= std::max(i, j)) ++k;
        const Vec3 c = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        if (c.norm() <= degenerate) continue;
        const Vec3 normal = c.normalized();
        const double d = normal.dot(pts[i]);
        const std::size_t count = count_inliers(pts, normal, d, params.inlier_threshold);
        if (count > best_count) {
            best_count = count;
            best_n = normal;
            best_d = d;
        }
    }
    if (best_count == 0) fail("ransac_plane: no non-degenerate plane found (points collinear?)");

    Vec3 centroid = Vec3::Zero();
    std::size_t m = 0;
    for (const auto& p : pts) {
        if (std::abs(best_n.dot(p) - best_d) <= params.inlier_threshold) {
            centroid += p;
            ++m;
        }
    }
    centroid /= static_cast<double>(m);
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) {
        if (std::abs(best_n.dot(p) - best_d) <= params.inlier_threshold) {
            const Vec3 q = p - centroid;
            cov += q * q.transpose();
        }
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 normal = eig.eigenvectors().col(0).normalized();
    if (normal.dot(best_n) < 0.0) normal = -normal;
    double offset = normal.dot(centroid);
    orient_towards_origin(normal, offset);

    PlaneModel plane;
    plane.normal = normal;
    plane.offset = offset;
    double sum2 = 0.0;
    std::size_t inliers = 0;
    for (const auto& p : pts) {
        const double r = normal.dot(p) - offset;
        if (std::abs(r) <= params.inlier_threshold) {
            sum2 += r * r;
            ++inliers;
        }
    }
    plane.inlier_ratio = static_cast<double>(inliers) / static_cast<double>(n);
    plane.rmse = inliers > 0 ? std::sqrt(sum2 / static_cast<double>(inliers)) : 0.0;
    return plane;
}

RigidTransform floor_alignment(const PlaneModel& plane)
{
    if (!plane.normal.allFinite() || plane.normal.norm() < 1e-12)
        fail("floor_alignment: degenerate plane normal");
    const Vec3 n = plane.normal.normalized();
    RigidTransform t;
    // Rotation that takes n onto +Z about the axis n x Z.
    const Vec3 axis = n.cross(Vec3::UnitZ());
    const double s = axis.norm();
    const double c = n.z();
    if (s < 1e-15) {
        t.rotation = c > 0.0 ? Mat3::Identity() : Mat3(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()));
    } else {
        t.rotation = Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
    }
    // z of the rotated inlier equals n . p = offset, so shift by -offset.
    t.translation = Vec3(0.0, 0.0, -plane.offset / plane.normal.norm());
    return t;
}

LabeledPointCloud trim_above_floor(const LabeledPointCloud& cloud, double band)
{
    return cloud.filter([&](std::size_t i) { return cloud.points[i].z() >= band; });
}

double camera_height(const RigidTransform& alignment)
{
    return alignment.apply(Vec3::Zero()).z();
}

std::string format_plane(const PlaneModel& plane)
{
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "genprior-plane 1\nnormal %.17g %.17g %.17g\noffset %.17g\nrmse %.17g\ninlier_ratio %.17g\n",
                  plane.normal.x(), plane.normal.y(), plane.normal.z(), plane.offset, plane.rmse,
                  plane.inlier_ratio);
    return buf;
}

PlaneModel parse_plane(const std::string& text)
{
    std::istringstream in(text);
    std::string key;
    int version = 0;
    in >> key >> version;
    if (key != "genprior-plane" || version != 1) fail("plane record: bad header");
    PlaneModel p;
    bool has_normal = false, has_offset = false;
    while (in >> key) {
        if (key == "normal") {
            in >> p.normal.x() >> p.normal.y() >> p.normal.z();
            has_normal = true;
        } else if (key == "offset") {
            in >> p.offset;
            has_offset = true;
        } else if (key == "rmse") {
            in >> p.rmse;
        } else if (key == "inlier_ratio") {
            in >> p.inlier_ratio;
        } else {
            fail("plane record: unknown key '" + key + "'");
        }
        if (!in) fail("plane record: malformed value for '" + key + "'");
    }
    if (!has_normal || !has_offset) fail("plane record: missing normal or offset");
    p.validate();
    return p;
}

void write_plane(const std::filesystem::path& path, const PlaneModel& plane)
{
    write_text_file(path, format_plane(plane));
}

PlaneModel read_plane(const std::filesystem::path& path)
{
    return parse_plane(read_text_file(path));
}

}  // namespace genprior
