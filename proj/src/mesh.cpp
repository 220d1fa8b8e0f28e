#include "udfmi/mesh.hpp"

namespace udfmi {

void LabeledMesh::validate() const {
    if (faces.size() != face_labels.size()) {
        throw Error(ErrorCode::InvalidSpec, "mesh", "face and label counts differ");
    }
    for (const auto& f : faces) {
        for (auto v : f) {
            if (v >= vertices.size()) throw Error(ErrorCode::InvalidSpec, "mesh", "face index out of range");
        }
    }
}

void LabeledMesh::drop_unreferenced_vertices() {
    std::vector<std::uint32_t> remap(vertices.size(), UINT32_MAX);
    for (const auto& f : faces) {
        for (auto v : f) remap[v] = 0;
    }
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (remap[i] == UINT32_MAX) continue;
        remap[i] = next;
        vertices[next++] = vertices[i];
    }
    vertices.resize(next);
    for (auto& f : faces) {
        for (auto& v : f) v = remap[v];
    }
}

std::map<Edge, std::uint32_t> edge_incidence_map(const LabeledMesh& mesh) {
    std::map<Edge, std::uint32_t> out;
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) ++out[make_edge(f[e], f[(e + 1) % 3])];
    }
    return out;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

}  // namespace udfmi
