#pragma once

#include "udfmi/core.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace udfmi {

/// Static 3-d tree over a point set. Queries are exact and read-only, so one
/// tree can serve many threads.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::vector<Vec3> points, int leaf_size = 12);

    const std::vector<Vec3>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    /// Indices of points with ||p - q|| <= radius, sorted ascending by index.
    void radius_query(const Vec3& q, double radius, std::vector<std::uint32_t>& out) const;

    /// k nearest (index, squared distance) pairs, nearest first; ties broken by index.
    void knn(const Vec3& q, std::size_t k, std::vector<std::pair<std::uint32_t, double>>& out) const;

    /// Nearest point index and squared distance. Tree must be non-empty.
    std::pair<std::uint32_t, double> nearest(const Vec3& q) const;

private:
    struct Node {
        Vec3 lo, hi;           // bounding box
        std::uint32_t begin;   // range in order_
        std::uint32_t end;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end, int leaf_size);
    static double box_dist2(const Node& n, const Vec3& q);

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace udfmi
