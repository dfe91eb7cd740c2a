#pragma once

#include "genprior/floor.hpp"
#include "genprior/priors.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace genprior {

/// A cloud given either as a PLY file or as a depth grid with optional label/confidence grids.
struct CloudSource
{
    std::filesystem::path ply;
    std::filesystem::path depth;
    std::filesystem::path labels;
    std::filesystem::path confidence;
    std::optional<std::uint64_t> seed;

    bool is_depth() const { return !depth.empty(); }
};

struct PreprocessParams
{
    double max_depth = 20.0;
    double outlier_radius = 0.1;
    std::size_t outlier_neighbors = 10;
    double trim_band = 0.20;
    bool icp = true;
    std::size_t icp_max_iters = 30;
    double icp_tolerance = 1e-4;
    /// ICP residual RMS above which a sample is rejected as misaligned; unset disables the check.
    std::optional<double> max_icp_rms;
};

struct AlignmentPolicy
{
    enum class Mode { Estimate, Given };

    Mode mode = Mode::Estimate;
    std::vector<LabelId> floor_labels;
    RansacParams ransac;
    RigidTransform given;
};

/**
 * Sample-set manifest (JSON). Relative paths resolve against the manifest's
 * directory.
 *
 * frame "camera": clouds are camera-frame captures; loading culls, removes
 * outliers, optionally registers each sample to the observation, restricts
 * to the frustum, floor-aligns and trims.
 *
 * frame "floor": clouds are already floor-aligned and frustum-restricted (as
 * written by write_bundle); loading only merges the observation.
 */
struct Manifest
{
    enum class Frame { Camera, Floor };

    Frame frame = Frame::Camera;
    std::filesystem::path base_dir;
    CloudSource observed;
    std::vector<CloudSource> samples;
    std::vector<LabelEntry> vocabulary;
    Frustum frustum;
    /// Floor frame only: camera position, heading and height.
    Vec2 camera_xy = Vec2::Zero();
    double camera_yaw = 0.0;
    std::optional<double> camera_height;
    std::optional<PlaneModel> floor;
    RigidTransform recorded_alignment;
    AlignmentPolicy alignment;
    PreprocessParams preprocess;
};

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);
Manifest read_manifest(const std::filesystem::path& path);

SampleSet load_sample_set(const Manifest& manifest);
SampleSet load_sample_set(const std::filesystem::path& manifest_path);

/**
 * Write a floor-frame bundle: manifest.json, observed.ply and one
 * sample_NNN.ply per sample (the merged observation is not repeated).
 */
void write_bundle(const SampleSet& set, const std::filesystem::path& out_dir);

}  // namespace genprior
