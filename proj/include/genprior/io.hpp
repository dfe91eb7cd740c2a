#pragma once

#include "genprior/geometry.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace genprior {

/**
 * PLY point clouds.
 *
 * Reading accepts `ascii` and `binary_little_endian` files with a `vertex`
 * element carrying x/y/z and, optionally, an integer `label`, a float
 * `confidence` and uchar `red`/`green`/`blue`. Other properties and elements
 * are skipped. Writing always produces ASCII with x/y/z as doubles printed
 * at round-trip precision, followed by label and confidence.
 */
struct PlyReadResult
{
    LabeledPointCloud cloud;
    bool has_labels = false;
    bool has_confidence = false;
};

PlyReadResult read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const LabeledPointCloud& cloud);

/**
 * Single-channel float grid files (depth maps, label maps, confidence maps).
 *
 * Binary layout (little endian):
 *   bytes 0..3   magic "GPD1"
 *   bytes 4..7   uint32 width
 *   bytes 8..11  uint32 height
 *   then width*height float32 values, row-major (row 0 first).
 *
 * Text layout: a first line `GPD1-TEXT`, a line `width height`, then
 * width*height whitespace-separated values in row-major order; `nan` marks
 * an invalid entry. Lines starting with '#' are comments.
 */
struct FloatGrid
{
    int width = 0;
    int height = 0;
    std::vector<float> values;
};

FloatGrid read_grid(const std::filesystem::path& path);
void write_grid_binary(const std::filesystem::path& path, const FloatGrid& grid);
void write_grid_text(const std::filesystem::path& path, const FloatGrid& grid);

DepthImage read_depth(const std::filesystem::path& path);
/// Integer label grid stored as a float grid; every entry must be integral.
PixelLabels read_label_grid(const std::filesystem::path& label_path,
                            const std::filesystem::path& confidence_path = {});

/// Whole-file helpers shared by the manifest and report code.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace genprior
