#pragma once

#include "udfmi/mesh.hpp"

#include <cstdint>
#include <vector>

namespace udfmi {

/// Symmetric Chamfer-L2 scaled by 1e4:
///   (mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2) * 1e4.
double chamfer_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

inline constexpr double kChamferScale = 1e4;

/// n points, faces picked proportionally to area, uniform barycentric placement.
std::vector<Vec3> area_weighted_sample(const LabeledMesh& mesh, std::size_t n, std::uint64_t seed);

struct TopologyReport {
    std::size_t vertices = 0;  // after merging coincident positions
    std::size_t faces = 0;
    std::size_t edges = 0;
    std::size_t boundary_edges = 0;
    std::size_t manifold_edges = 0;
    std::size_t nonmanifold_edges = 0;
    std::size_t components = 0;
    long long euler_characteristic = 0;
    std::size_t label_count = 0;  // distinct labels appearing in face_labels
};

/// Vertices with identical coordinates are merged first; components are
/// connected through shared edges.
TopologyReport topology_report(const LabeledMesh& mesh);

/// Copy with coincident vertices merged (first occurrence wins).
LabeledMesh weld_vertices(const LabeledMesh& mesh);

}  // namespace udfmi
