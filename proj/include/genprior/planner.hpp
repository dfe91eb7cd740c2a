#pragma once

#include "genprior/priors.hpp"
#include "genprior/sample_mask.hpp"
#include "genprior/spatial_index.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genprior {

struct PrmParams
{
    std::size_t n_vertices = 2000;
    /// Connection-radius constant; unset uses 2 * sqrt(3 * area(support) / pi).
    std::optional<double> gamma;
    double step = 0.05;
    std::uint64_t seed = 1234;
    /// Cap on vertex draws, as a multiple of n_vertices.
    std::size_t max_draws_factor = 100;
    /// Worker threads for edge masks; 0 uses the hardware concurrency.
    unsigned threads = 0;
};

struct RoadmapEdge
{
    std::uint32_t a = 0, b = 0;  ///< a < b
    double length = 0.0;
    SampleMask free;
};

/**
 * Undirected roadmap over the support. Vertex 0 is the start. Each edge
 * carries the samples in which every densified point along it is
 * collision-free, so a path's joint feasibility is the AND of its edge masks.
 * Edges free in no sample are not stored.
 */
struct Roadmap
{
    std::vector<Configuration> vertices;
    std::vector<SampleMask> vertex_free;
    std::vector<RoadmapEdge> edges;
    /// adjacency[v] lists (neighbor, edge index), sorted by neighbor.
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> adjacency;
    double connection_radius = 0.0;
    double step = 0.05;
    std::size_t n_samples = 0;
    std::size_t draws = 0;
    double target_radius = 1.0;
    std::map<LabelId, std::vector<SampleMask>> targets;
};

double prm_gamma(double support_area);
double prm_radius(double gamma, std::size_t n);

Roadmap build_prm(const SampleSet& set, const Configuration& start, const RobotFootprint& fp,
                  const PrmParams& params = {});
Roadmap build_prm(const SampleSet& set, const SampleSetIndex& index, const Configuration& start,
                  const PrmParams& params = {});

/// Bit i of entry v set iff target_indicator holds at vertex v in sample i.
void annotate_targets(Roadmap& map, const SampleSetIndex& index, LabelId label, double radius);

struct PlanParams
{
    double target_radius = 1.0;
    double angular_weight = 0.0;  ///< meters per radian in path_length
    /// Maximum number of search states generated before giving up on optimality.
    std::size_t frontier_cap = 4'000'000;
    /// Off: exhaustive search over simple paths without dominance or bound pruning.
    bool prune = true;
};

struct PlanResult
{
    LabelId label = kUnlabeled;
    std::vector<Configuration> path;
    std::vector<std::uint32_t> vertex_ids;
    double p_plan = 0.0;
    double p_det = 0.0;
    double length = 0.0;
    SampleMask success_mask;
    bool cap_hit = false;
    std::size_t states = 0;
};

/**
 * Best-first search over (vertex, surviving-sample mask) states for the
 * start-rooted path maximizing popcount(edge masks AND terminal target mask),
 * ties broken by shorter length. A state is dropped when another state at the
 * same vertex has a superset mask and no greater length. A best popcount of 0
 * yields an empty path.
 */
PlanResult plan(const Roadmap& map, const SampleSet& set, LabelId label, const RobotFootprint& fp,
                const PlanParams& params = {});

/// Sum of sqrt(dx^2 + dy^2 + (w * wrapped dtheta)^2) over consecutive configurations.
double path_length(const std::vector<Configuration>& path, double angular_weight = 0.0);

/// Text dump: header, vertices with free masks, edges, and target masks (hex, sample 0 = lowest bit).
std::string format_roadmap(const Roadmap& map);

}  // namespace genprior
