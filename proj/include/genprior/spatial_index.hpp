#pragma once

#include "genprior/priors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace genprior {

/// Uniform 2-d bucket grid over tagged points (x, y, sample id).
class TaggedGrid2
{
public:
    static constexpr std::uint32_t kShared = 0xFFFFFFFFu;  ///< point present in every sample

    struct Entry
    {
        double x, y;
        std::uint32_t sample;
    };

    TaggedGrid2() = default;
    TaggedGrid2(std::vector<Entry> entries, double cell);

    bool empty() const noexcept { return entries_.empty(); }

    /// Visit entries in cells overlapping the square of half-width r around (x, y).
    /// The visitor returns false to stop early.
    template<typename Visitor>
    void visit(double x, double y, double r, Visitor&& v) const
    {
        if (entries_.empty()) return;
        r += 1e-9;  // cell range slack; the exact distance test is done by the visitor
        const double fx0 = std::max(0.0, std::floor((x - r - min_x_) / cell_));
        const double fx1 = std::min(static_cast<double>(nx_) - 1.0, std::floor((x + r - min_x_) / cell_));
        const double fy0 = std::max(0.0, std::floor((y - r - min_y_) / cell_));
        const double fy1 = std::min(static_cast<double>(ny_) - 1.0, std::floor((y + r - min_y_) / cell_));
        if (!(fx0 <= fx1) || !(fy0 <= fy1)) return;
        const auto x0 = static_cast<long>(fx0), x1 = static_cast<long>(fx1);
        const auto y0 = static_cast<long>(fy0), y1 = static_cast<long>(fy1);
        for (long cy = y0; cy <= y1; ++cy) {
            for (long cx = x0; cx <= x1; ++cx) {
                const std::size_t c = static_cast<std::size_t>(cy) * nx_ + static_cast<std::size_t>(cx);
                for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k)
                    if (!v(entries_[k])) return;
            }
        }
    }

private:
    double cell_ = 1.0;
    double min_x_ = 0.0, min_y_ = 0.0;
    std::size_t nx_ = 0, ny_ = 0;
    std::vector<std::uint32_t> start_;
    std::vector<Entry> entries_;
};

/**
 * Accelerated per-sample collision and target masks over a SampleSet.
 * Semantics match collision_indicator / target_indicator exactly; points of
 * the merged observation are stored once and flagged as shared by every
 * sample.
 */
class SampleSetIndex
{
public:
    SampleSetIndex(const SampleSet& set, const RobotFootprint& fp);

    std::size_t n_samples() const noexcept { return n_; }

    /// Bit i set iff the footprint at (x, y) collides in sample i.
    SampleMask collision_mask(double x, double y) const;
    SampleMask free_mask(double x, double y) const { return ~collision_mask(x, y); }

    /// Bit i set iff a `label` point lies within `radius` of (x, y) in sample i.
    /// Builds the label's grid on first use, so it is not safe to call
    /// concurrently for a label that has not been prepared. Use prepare_label().
    SampleMask target_mask(double x, double y, LabelId label, double radius) const;
    void prepare_label(LabelId label, double radius) const;

private:
    const SampleSet* set_;
    RobotFootprint fp_;
    std::size_t n_;
    TaggedGrid2 obstacles_;
    mutable std::map<LabelId, TaggedGrid2> targets_;
};

}  // namespace genprior
