#pragma once

#include "udfmi/core.hpp"
#include "udfmi/fields.hpp"

#include <cstdint>
#include <vector>

namespace udfmi {

struct OrientedPointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // unit length, same size as points

    std::size_t size() const { return points.size(); }
};

/// Seeded rejection sampling of n points with field.eval(p) <= r1 inside the
/// field's bbox. Output depends only on (field, r1, n, seed), not on thread count.
/// Throws ErrorCode::Stage when the band is too thin to hit within
/// max_attempts_per_point * n proposals.
std::vector<Vec3> sample_level_band(const ScalarField& field, double r1, std::size_t n, std::uint64_t seed,
                                    std::size_t max_attempts_per_point = 2000);

struct ProjectionResult {
    Vec3 point;
    bool skipped = false;  // zero gradient at the start point
};

/// Moves p toward a local minimum of the field: p <- p - f(p) * g/|g|, damping
/// the step by 0.9 whenever f would increase. Returns the best iterate.
ProjectionResult project_to_minimum(const ScalarField& field, const Vec3& p, int steps = 10);

/// Projects every point in place; returns how many were skipped.
std::size_t project_points(const ScalarField& field, std::vector<Vec3>& points, int steps = 10);

/// One centroid per occupied cubic cell of side `voxel`; cells are anchored at
/// the origin and output is ordered by cell key.
std::vector<Vec3> voxel_downsample(const std::vector<Vec3>& points, double voxel);

struct NormalEstimationStats {
    std::size_t components = 0;        // connected components of the k-NN graph
    std::size_t degenerate = 0;        // neighborhoods with rank < 2 covariance
};

/// PCA normals over k nearest neighbors, oriented by propagation along a
/// minimum spanning tree of the k-NN graph weighted by 1 - |ni . nj|. Each
/// component is rooted at its highest (max z) point, whose normal is turned
/// to point up.
OrientedPointCloud estimate_normals(const std::vector<Vec3>& points, int k = 30, NormalEstimationStats* stats = nullptr);

}  // namespace udfmi
