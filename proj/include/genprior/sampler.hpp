#pragma once

#include "genprior/priors.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace genprior {

struct Box3
{
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();

    bool contains(const Box3& inner) const;
};

/// Axis-aligned vertical wall segment, rasterized over length x height.
struct WallSpec
{
    std::string name;
    Vec2 from = Vec2::Zero();
    Vec2 to = Vec2::Zero();
    double z_min = 0.0;
    double z_max = 2.5;
    double presence = 1.0;
    double density = 50.0;  ///< points per m^2
    LabelId label = kUnlabeled;
};

/// Upright cylinder of `radius` whose axis is placed uniformly in the x-y extent of
/// `region`; its lateral surface spans the region's z range.
struct ObjectSpec
{
    std::string name;
    LabelId label = kUnlabeled;
    Box3 region;
    double presence = 1.0;
    double radius = 0.2;
    double density = 100.0;  ///< points per m^2 of lateral surface
};

/**
 * Fully known distribution over rooms: every wall and object is included
 * independently with its presence probability. Entities are numbered walls
 * first, then objects.
 */
struct RoomDistribution
{
    Box3 extent;
    std::vector<WallSpec> walls;
    std::vector<ObjectSpec> objects;
    std::vector<LabelEntry> vocabulary;

    std::size_t entity_count() const { return walls.size() + objects.size(); }
    void validate() const;
};

/// Points rasterized for an entity: ceil(area * density).
std::size_t wall_point_count(const WallSpec& w);
std::size_t object_point_count(const ObjectSpec& o);

/**
 * Draw one room. Presence of entity e uses the first output of stream 2e of
 * CounterRng(seed); its geometry uses stream 2e + 1. The result is a pure
 * function of (dist, seed).
 */
WorkspaceSample draw_sample(const RoomDistribution& dist, std::uint64_t seed);

/**
 * Exact probability of the query at q, by enumerating presence combinations
 * of the uncertain entities that reach the relevant disc(s). Every entity's
 * reachable x-y box must lie wholly inside or wholly outside each disc, and
 * an obstacle candidate's z range wholly inside or outside the footprint band.
 * Throws on ambiguous geometry or more than 20 uncertain relevant entities.
 */
double exact_prior(const RoomDistribution& dist, const Configuration& q, const SemanticQuery& query,
                   const RobotFootprint& fp);

/// Synthetic scene: sampled distribution, always-present observed part, and camera support.
struct SyntheticScene
{
    RoomDistribution distribution;
    RoomDistribution observed;
    SupportRegion support;
    double camera_height = 1.45;
};

SyntheticScene parse_scene(const std::string& json_text);
SyntheticScene load_scene(const std::filesystem::path& path);

/// Seeds follow base_seed + i for sample i; the observed part uses its own derived stream.
std::uint64_t sample_seed(std::uint64_t base_seed, std::size_t index);
std::uint64_t observed_seed(std::uint64_t base_seed);

/// Draw n samples, attach the observation and support, and merge the observation into every sample.
SampleSet synthesize_sample_set(const SyntheticScene& scene, std::size_t n, std::uint64_t base_seed);

}  // namespace genprior
