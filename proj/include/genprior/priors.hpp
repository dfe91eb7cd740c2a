#pragma once

#include "genprior/floor.hpp"
#include "genprior/geometry.hpp"
#include "genprior/sample_mask.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genprior {

/// Wrap an angle into [-pi, pi).
double wrap_angle(double theta);

/// SE(2) robot pose on the floor plane.
struct Configuration
{
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Configuration() = default;
    Configuration(double x_, double y_, double theta_ = 0.0) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    Vec2 xy() const { return {x, y}; }
    bool operator==(const Configuration&) const = default;
};

/// Disc footprint; points whose height lies in [z_min, z_max] are obstacles.
struct RobotFootprint
{
    double radius = 0.25;
    double z_min = 0.20;
    double z_max = 1.50;

    void validate() const;
};

/// Squared planar distance between a configuration and a point. Every
/// indicator uses this exact expression so indexed and direct queries agree bit for bit.
inline double planar_dist2(double x, double y, const Vec3& p)
{
    const double dx = p.x() - x;
    const double dy = p.y() - y;
    return dx * dx + dy * dy;
}

/// One floor-aligned workspace realization.
struct WorkspaceSample
{
    LabeledPointCloud cloud;
    int sample_id = 0;
    std::uint64_t seed = 0;
    std::string source;
    /// Number of trailing points of `cloud` that are the merged observation.
    std::size_t observed_tail = 0;
    /// Per-entity inclusion flags, filled by the synthetic sampler.
    std::vector<bool> entity_present;
};

struct LabelEntry
{
    LabelId id = kUnlabeled;
    std::string name;
    bool operator==(const LabelEntry&) const = default;
};

/**
 * Floor footprint of the expanded viewing frustum: the triangle swept by the
 * frustum's horizontal half-angle, with its apex `-near` meters behind the
 * camera and its far edge `far` meters ahead, placed at `origin` facing `yaw`.
 */
struct SupportRegion
{
    Frustum frustum;
    Vec2 origin = Vec2::Zero();
    double yaw = 0.0;

    std::vector<Vec2> polygon() const;
    double area() const;
    bool contains(const Vec2& p) const;
};

/// Point-in-convex-polygon test (counter-clockwise vertices, boundary inclusive).
bool polygon_contains(const std::vector<Vec2>& polygon, const Vec2& p);
double polygon_area(const std::vector<Vec2>& polygon);

struct SampleSet
{
    std::vector<WorkspaceSample> samples;
    LabeledPointCloud observed;
    SupportRegion support;
    std::vector<LabelEntry> vocabulary;
    /// Transform that was applied to bring input clouds into the floor frame.
    RigidTransform alignment;
    std::optional<PlaneModel> floor;
    std::optional<double> camera_height;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return samples.size(); }
    bool has_label(LabelId id) const;
    const LabelEntry& label(LabelId id) const;
    std::optional<LabelId> find_label(const std::string& name) const;
    void require_label(LabelId id) const;
    void validate() const;
};

/// Append the observed cloud to every sample and record it as the observed tail.
void merge_observed(SampleSet& set);

struct SemanticQuery
{
    enum class Kind { Obstacle, Target, ObstacleFreeAndTarget };

    Kind kind = Kind::Obstacle;
    LabelId label = kUnlabeled;
    double target_radius = 1.0;

    static SemanticQuery obstacle() { return {Kind::Obstacle, kUnlabeled, 1.0}; }
    static SemanticQuery target(LabelId l, double radius = 1.0) { return {Kind::Target, l, radius}; }
    static SemanticQuery free_and_target(LabelId l, double radius = 1.0)
    {
        return {Kind::ObstacleFreeAndTarget, l, radius};
    }
};

/// Any obstacle-band point strictly within the footprint radius of (q.x, q.y).
bool collision_indicator(const Configuration& q, const WorkspaceSample& s, const RobotFootprint& fp);

/// Any point carrying `label` within `radius` (inclusive) of (q.x, q.y).
bool target_indicator(const Configuration& q, const WorkspaceSample& s, LabelId label, double radius = 1.0);

bool semantic_indicator(const Configuration& q, const WorkspaceSample& s, const SemanticQuery& query,
                        const RobotFootprint& fp);

/// Bit i set iff the query's indicator holds in sample i.
SampleMask indicator_mask(const Configuration& q, const SampleSet& set, const SemanticQuery& query,
                          const RobotFootprint& fp);

/// Fraction of samples in which the query holds: exactly k / N.
double prior_estimate(const Configuration& q, const SampleSet& set, const SemanticQuery& query,
                      const RobotFootprint& fp);

/**
 * Points visited when checking the segment a -> b at resolution `step`:
 * k = max(1, ceil(|ab| / step)) equal pieces, endpoints included. The
 * endpoints are put in a canonical order first, so (a, b) and (b, a) yield
 * bit-identical positions.
 */
std::vector<Configuration> densify_segment(const Configuration& a, const Configuration& b, double step);

/// Per-sample joint indicator: every densified configuration collision-free and the last one reaching `label`.
SampleMask path_success_mask(const std::vector<Configuration>& path, const SampleSet& set, LabelId label,
                             const RobotFootprint& fp, double step = 0.05, double target_radius = 1.0);

double path_success_probability(const std::vector<Configuration>& path, const SampleSet& set, LabelId label,
                                const RobotFootprint& fp, double step = 0.05, double target_radius = 1.0);

SampleMask detection_mask(const SampleSet& set, LabelId label);
double detection_probability(const SampleSet& set, LabelId label);

inline double mask_fraction(const SampleMask& m)
{
    return m.size() == 0 ? 0.0 : static_cast<double>(m.count()) / static_cast<double>(m.size());
}

}  // namespace genprior
