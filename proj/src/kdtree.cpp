#include "genprior/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace genprior {

KdTree3::KdTree3(std::span<const Vec3> points) : points_(points)
{
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points.empty()) {
        nodes_.reserve(2 * points.size() / kLeafSize + 2);
        build(0, static_cast<std::uint32_t>(points.size()));
    }
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end)
{
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (std::uint32_t i = begin; i < end; ++i) {
        node.lo = node.lo.cwiseMin(points_[order_[i]]);
        node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    Eigen::Index axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return points_[a][axis] < points_[b][axis];
                     });
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].axis = static_cast<std::uint8_t>(axis);
    nodes_[id].split = points_[order_[mid]][axis];
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree3::box_dist2(const Node& n, const Vec3& q)
{
    const Vec3 d = (n.lo - q).cwiseMax(q - n.hi).cwiseMax(0.0);
    return d.squaredNorm();
}

KdTree3::Nearest KdTree3::nearest(const Vec3& q) const
{
    Nearest best{0, std::numeric_limits<double>::infinity()};
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (box_dist2(n, q) >= best.dist2) continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i) {
                const std::uint32_t k = order_[i];
                const double d2 = (points_[k] - q).squaredNorm();
                if (d2 < best.dist2 || (d2 == best.dist2 && k < best.index)) best = {k, d2};
            }
            continue;
        }
        // Visit the nearer child first.
        const bool go_left = q[n.axis] < n.split;
        stack[top++] = go_left ? n.right : n.left;
        stack[top++] = go_left ? n.left : n.right;
    }
    return best;
}

std::size_t KdTree3::count_within(const Vec3& q, double radius, std::size_t skip,
                                  std::size_t limit) const
{
    if (nodes_.empty()) return 0;
    const double r2 = radius * radius;
    std::size_t count = 0;
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0 && count < limit) {
        const Node& n = nodes_[stack[--top]];
        if (box_dist2(n, q) >= r2) continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end && count < limit; ++i) {
                const std::uint32_t k = order_[i];
                if (k != skip && (points_[k] - q).squaredNorm() < r2) ++count;
            }
            continue;
        }
        stack[top++] = n.left;
        stack[top++] = n.right;
    }
    return count;
}

}  // namespace genprior
