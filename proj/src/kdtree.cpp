#include "udfmi/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace udfmi {

KdTree::KdTree(std::vector<Vec3> points, int leaf_size) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / std::max(1, leaf_size) + 1);
        build(0, static_cast<std::uint32_t>(points_.size()), std::max(1, leaf_size));
    }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int leaf_size) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = points_[order_[begin]];
    node.hi = node.lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        node.lo = node.lo.cwiseMin(points_[order_[i]]);
        node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= static_cast<std::uint32_t>(leaf_size)) return id;

    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
        const double pa = points_[a][axis];
        const double pb = points_[b][axis];
        return pa < pb || (pa == pb && a < b);
    });
    const auto l = build(begin, mid, leaf_size);
    const auto r = build(mid, end, leaf_size);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

double KdTree::box_dist2(const Node& n, const Vec3& q) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        double d = 0.0;
        if (q[a] < n.lo[a]) d = n.lo[a] - q[a];
        else if (q[a] > n.hi[a]) d = q[a] - n.hi[a];
        d2 += d * d;
    }
    return d2;
}

void KdTree::radius_query(const Vec3& q, double radius, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (nodes_.empty()) return;
    const double r2 = radius * radius;
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (box_dist2(n, q) > r2) continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i) {
                const auto idx = order_[i];
                if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
            }
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
    std::sort(out.begin(), out.end());
}

void KdTree::knn(const Vec3& q, std::size_t k, std::vector<std::pair<std::uint32_t, double>>& out) const {
    out.clear();
    if (nodes_.empty() || k == 0) return;
    auto worse = [](const std::pair<std::uint32_t, double>& a, const std::pair<std::uint32_t, double>& b) {
        return a.second < b.second || (a.second == b.second && a.first < b.first);
    };
    // max-heap on (distance, index)
    std::vector<std::pair<std::uint32_t, double>> heap;
    heap.reserve(k + 1);
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        const double bd = box_dist2(n, q);
        if (heap.size() == k && bd > heap.front().second) continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i) {
                const auto idx = order_[i];
                const std::pair<std::uint32_t, double> cand{idx, (points_[idx] - q).squaredNorm()};
                if (heap.size() < k) {
                    heap.push_back(cand);
                    std::push_heap(heap.begin(), heap.end(), worse);
                } else if (worse(cand, heap.front())) {
                    std::pop_heap(heap.begin(), heap.end(), worse);
                    heap.back() = cand;
                    std::push_heap(heap.begin(), heap.end(), worse);
                }
            }
        } else {
            // visit the nearer child first
            const double dl = box_dist2(nodes_[n.left], q);
            const double dr = box_dist2(nodes_[n.right], q);
            if (dl <= dr) {
                stack[top++] = n.right;
                stack[top++] = n.left;
            } else {
                stack[top++] = n.left;
                stack[top++] = n.right;
            }
        }
    }
    std::sort_heap(heap.begin(), heap.end(), worse);
    out = std::move(heap);
}

std::pair<std::uint32_t, double> KdTree::nearest(const Vec3& q) const {
    std::pair<std::uint32_t, double> best{0, std::numeric_limits<double>::infinity()};
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (box_dist2(n, q) > best.second) continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i) {
                const auto idx = order_[i];
                const double d2 = (points_[idx] - q).squaredNorm();
                if (d2 < best.second || (d2 == best.second && idx < best.first)) best = {idx, d2};
            }
        } else {
            const double dl = box_dist2(nodes_[n.left], q);
            const double dr = box_dist2(nodes_[n.right], q);
            if (dl <= dr) {
                stack[top++] = n.right;
                stack[top++] = n.left;
            } else {
                stack[top++] = n.left;
                stack[top++] = n.right;
            }
        }
    }
    return best;
}

}  // namespace udfmi
