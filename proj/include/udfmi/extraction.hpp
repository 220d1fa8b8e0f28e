#pragma once

#include "udfmi/fields.hpp"
#include "udfmi/labeling.hpp"
#include "udfmi/mesh.hpp"
#include "udfmi/signfield.hpp"

namespace udfmi {

/// Multi-label marching cubes on the dual grid (cube corners at voxel centers).
///
/// Cut edges (endpoint labels differ) get one vertex, placed at the zero
/// crossing of w when the endpoint signs differ (clamped to [0.1, 0.9] of the
/// edge) and at the midpoint otherwise. Cube faces with three or more labels
/// get a face-center vertex; 2-label checkerboard faces keep the corners of
/// the smaller label apart. Cubes with two labels triangulate their cut loops
/// directly, cubes with three or more fan every face segment to a cube-center
/// vertex. Faces that touch label 0 are not emitted. Triangles are oriented
/// so their normal points from the smaller to the larger label.
LabeledMesh multi_label_mc(const LabelField& lf, const SignField& sf);

struct TrimReport {
    std::size_t removed_faces = 0;
    std::size_t rounds = 0;
    bool empty = false;
};

/// Removes faces whose vertices all lie farther than r2 from the surface, then
/// boundary flaps (two or more boundary edges, all vertices beyond r2/2),
/// repeating until nothing changes. Unreferenced vertices are dropped.
LabeledMesh trim_outside(const LabeledMesh& mesh, const ScalarField& field, double r2, TrimReport* report = nullptr);

}  // namespace udfmi
