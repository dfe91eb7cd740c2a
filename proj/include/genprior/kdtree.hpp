#pragma once

#include "genprior/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace genprior {

/// Static 3-d tree over a borrowed point array. Read-only after construction.
class KdTree3
{
public:
    explicit KdTree3(std::span<const Vec3> points);

    std::size_t size() const noexcept { return points_.size(); }

    struct Nearest
    {
        std::size_t index = 0;
        double dist2 = 0.0;
    };

    /// Nearest stored point to q. The tree must be non-empty.
    Nearest nearest(const Vec3& q) const;

    /**
     * Number of stored points with squared distance < radius^2 from q,
     * skipping index `skip` (pass npos to skip nothing). Counting stops once
     * `limit` is reached.
     */
    std::size_t count_within(const Vec3& q, double radius, std::size_t skip,
                             std::size_t limit) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Node
    {
        std::uint32_t begin, end;  // range into order_
        std::int32_t left = -1, right = -1;
        std::uint8_t axis = 0;
        double split = 0.0;
        Vec3 lo, hi;  // bounding box
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    static double box_dist2(const Node& n, const Vec3& q);

    std::span<const Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    static constexpr std::uint32_t kLeafSize = 12;
};

}  // namespace genprior
