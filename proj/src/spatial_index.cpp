#include "genprior/spatial_index.hpp"

#include "genprior/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace genprior {

namespace {
constexpr std::size_t kMaxCells = std::size_t{1} << 22;
}

TaggedGrid2::TaggedGrid2(std::vector<Entry> entries, double cell) : cell_(cell)
{
    if (!(cell > 0.0)) fail("grid: cell size must be > 0");
    if (entries.empty()) return;
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = max_x;
    min_x_ = min_y_ = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) {
        min_x_ = std::min(min_x_, e.x);
        min_y_ = std::min(min_y_, e.y);
        max_x = std::max(max_x, e.x);
        max_y = std::max(max_y, e.y);
    }
    // Coarsen the grid for very sparse, wide clouds so the cell table stays bounded.
    for (;;) {
        nx_ = static_cast<std::size_t>(std::floor((max_x - min_x_) / cell_)) + 1;
        ny_ = static_cast<std::size_t>(std::floor((max_y - min_y_) / cell_)) + 1;
        if (nx_ * ny_ <= kMaxCells) break;
        cell_ *= 2.0;
    }
    auto cell_of = [&](const Entry& e) {
        const auto cx = std::min(nx_ - 1, static_cast<std::size_t>(std::floor((e.x - min_x_) / cell_)));
        const auto cy = std::min(ny_ - 1, static_cast<std::size_t>(std::floor((e.y - min_y_) / cell_)));
        return cy * nx_ + cx;
    };
    start_.assign(nx_ * ny_ + 1, 0);
    for (const auto& e : entries) ++start_[cell_of(e) + 1];
    for (std::size_t c = 0; c < nx_ * ny_; ++c) start_[c + 1] += start_[c];
    entries_.resize(entries.size());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (const auto& e : entries) entries_[fill[cell_of(e)]++] = e;
}

SampleSetIndex::SampleSetIndex(const SampleSet& set, const RobotFootprint& fp)
    : set_(&set), fp_(fp), n_(set.size())
{
    fp.validate();
    if (n_ >= TaggedGrid2::kShared) fail("index: too many samples");
    const bool shared_tail =
        !set.observed.empty() && std::all_of(set.samples.begin(), set.samples.end(), [&](const auto& s) {
            return s.observed_tail == set.observed.size();
        });
    std::vector<TaggedGrid2::Entry> entries;
    auto in_band = [&](const Vec3& p) { return !(p.z() < fp.z_min || p.z() > fp.z_max); };
    for (std::size_t i = 0; i < n_; ++i) {
        const auto& pts = set.samples[i].cloud.points;
        const std::size_t own = shared_tail ? pts.size() - set.observed.size() : pts.size();
        for (std::size_t k = 0; k < own; ++k)
            if (in_band(pts[k])) entries.push_back({pts[k].x(), pts[k].y(), static_cast<std::uint32_t>(i)});
    }
    if (shared_tail) {
        // The tail of sample 0 is value-identical to every other sample's tail.
        const auto& pts = set.samples[0].cloud.points;
        for (std::size_t k = pts.size() - set.observed.size(); k < pts.size(); ++k)
            if (in_band(pts[k])) entries.push_back({pts[k].x(), pts[k].y(), TaggedGrid2::kShared});
    }
    obstacles_ = TaggedGrid2(std::move(entries), std::max(fp.radius, 0.05));
}

SampleMask SampleSetIndex::collision_mask(double x, double y) const
{
    SampleMask m(n_);
    const double r2 = fp_.radius * fp_.radius;
    std::size_t hits = 0;
    obstacles_.visit(x, y, fp_.radius, [&](const TaggedGrid2::Entry& e) {
        const double dx = e.x - x;
        const double dy = e.y - y;
        if (!(dx * dx + dy * dy < r2)) return true;
        if (e.sample == TaggedGrid2::kShared) {
            m = SampleMask::ones(n_);
            return false;
        }
        if (!m.test(e.sample)) {
            m.set(e.sample);
            if (++hits == n_) return false;
        }
        return true;
    });
    return m;
}

void SampleSetIndex::prepare_label(LabelId label, double radius) const
{
    if (targets_.count(label)) return;
    std::vector<TaggedGrid2::Entry> entries;
    for (std::size_t i = 0; i < n_; ++i) {
        const auto& c = set_->samples[i].cloud;
        for (std::size_t k = 0; k < c.size(); ++k)
            if (c.labels[k] == label)
                entries.push_back({c.points[k].x(), c.points[k].y(), static_cast<std::uint32_t>(i)});
    }
    targets_.emplace(label, TaggedGrid2(std::move(entries), std::max(radius, 0.05)));
}

SampleMask SampleSetIndex::target_mask(double x, double y, LabelId label, double radius) const
{
    prepare_label(label, radius);
    const TaggedGrid2& grid = targets_.at(label);
    SampleMask m(n_);
    const double r2 = radius * radius;
    std::size_t hits = 0;
    grid.visit(x, y, radius, [&](const TaggedGrid2::Entry& e) {
        const double dx = e.x - x;
        const double dy = e.y - y;
        if (dx * dx + dy * dy <= r2 && !m.test(e.sample)) {
            m.set(e.sample);
            if (++hits == n_) return false;
        }
        return true;
    });
    return m;
}

}  // namespace genprior
