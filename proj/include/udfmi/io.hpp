#pragma once

#include "udfmi/core.hpp"
#include "udfmi/labeling.hpp"
#include "udfmi/mesh.hpp"
#include "udfmi/signfield.hpp"

#include <string>
#include <vector>

namespace udfmi {

// Binary grid files share one little-endian header:
//   char magic[4], u32 version (1), u32 dims[3], f64 bbox[6] (min xyz, max xyz)
// followed by per-voxel payload, x-fastest.
inline constexpr std::size_t kGridHeaderBytes = 4 + 4 + 3 * 4 + 6 * 8;

/// "UDFG": f32 distances.
void write_udfg(const std::string& path, const Grid<double>& grid);
Grid<double> read_udfg(const std::string& path);

/// "SGNF": f32 w values, then one flag byte per voxel (SignFlag bits).
void write_sgnf(const std::string& path, const SignField& sf);
SignField read_sgnf(const std::string& path);

/// "LBLF": u32 labels.
void write_lblf(const std::string& path, const LabelField& lf);
LabelField read_lblf(const std::string& path);

/// ASCII OBJ; faces are grouped per label pair as "g mat_<a>_<b>".
void write_obj(const std::string& path, const LabeledMesh& mesh);
std::string obj_string(const LabeledMesh& mesh);
/// Faces outside any mat_ group get the pair {0, 0}. Polygons are fanned.
LabeledMesh read_obj(const std::string& path);

/// Binary little-endian PLY with per-face uint label_a, label_b.
void write_ply(const std::string& path, const LabeledMesh& mesh);

struct PointFile {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty when the file has none
};

/// .xyz ("x y z"), .xyzn ("x y z nx ny nz") or .ply (ascii or binary_little_endian
/// vertex element with x,y,z and optional nx,ny,nz).
PointFile read_points(const std::string& path);
void write_xyzn(const std::string& path, const std::vector<Vec3>& points, const std::vector<Vec3>& normals);

}  // namespace udfmi
