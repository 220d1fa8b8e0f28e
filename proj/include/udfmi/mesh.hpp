#pragma once

#include "udfmi/core.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace udfmi {

using Face = std::array<std::uint32_t, 3>;
/// Unordered label pair stored as (min, max).
using LabelPair = std::array<std::uint32_t, 2>;

inline LabelPair make_pair_label(std::uint32_t a, std::uint32_t b) { return a < b ? LabelPair{a, b} : LabelPair{b, a}; }

/// Triangle mesh whose faces separate two labeled regions. Edges may be shared
/// by any number of faces.
struct LabeledMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<LabelPair> face_labels;

    bool empty() const { return faces.empty(); }
    /// Throws ErrorCode::InvalidSpec on out-of-range indices or mismatched sizes.
    void validate() const;
    /// Removes vertices no face refers to, keeping the relative order of the rest.
    void drop_unreferenced_vertices();
};

using Edge = std::pair<std::uint32_t, std::uint32_t>;  // first < second

inline Edge make_edge(std::uint32_t a, std::uint32_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Undirected edge -> number of incident faces.
std::map<Edge, std::uint32_t> edge_incidence_map(const LabeledMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace udfmi
