#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace udfmi {

using Vec3 = Eigen::Vector3d;
using Vec3i = std::array<int, 3>;

struct Box {
    Vec3 min{-0.6, -0.6, -0.6};
    Vec3 max{0.6, 0.6, 0.6};

    Vec3 extent() const { return max - min; }
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }
};

enum class ErrorCode {
    InvalidSpec,
    Config,
    Io,
    Stage,
    EmptyResult,
};

/// Error carrying a machine-readable code and the pipeline stage that raised it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string stage, const std::string& what)
        : std::runtime_error(stage.empty() ? what : stage + ": " + what), code_(code), stage_(std::move(stage)) {}

    ErrorCode code() const { return code_; }
    const std::string& stage() const { return stage_; }

private:
    ErrorCode code_;
    std::string stage_;
};

const char* to_string(ErrorCode code);

/// Regular grid of voxels over a box. Voxel (i,j,k) is centered at
/// min + (idx + 0.5) * spacing, linear index x-fastest.
struct GridSpec {
    Vec3i dims{256, 256, 256};
    Box bbox{};

    GridSpec() = default;
    GridSpec(int resolution, Box box = {}) : dims{resolution, resolution, resolution}, bbox(box) {}
    GridSpec(Vec3i d, Box box) : dims(d), bbox(box) {}

    /// Throws ErrorCode::InvalidSpec when a dimension is non-positive or the box is empty.
    void validate() const;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
    }
    Vec3 spacing() const {
        const Vec3 e = bbox.extent();
        return {e.x() / dims[0], e.y() / dims[1], e.z() / dims[2]};
    }
    // Pipeline grids are cubic; this is the x spacing.
    double voxel_size() const { return bbox.extent().x() / dims[0]; }

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
    }
    Vec3i coords(std::size_t idx) const {
        const auto nx = static_cast<std::size_t>(dims[0]);
        const auto ny = static_cast<std::size_t>(dims[1]);
        return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
    }
    bool in_range(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }
    Vec3 center(int i, int j, int k) const {
        const Vec3 h = spacing();
        return {bbox.min.x() + (i + 0.5) * h.x(), bbox.min.y() + (j + 0.5) * h.y(), bbox.min.z() + (k + 0.5) * h.z()};
    }
    Vec3 center(std::size_t idx) const {
        const auto c = coords(idx);
        return center(c[0], c[1], c[2]);
    }
    /// Voxel containing p (clamped to the grid).
    Vec3i locate(const Vec3& p) const;

    bool operator==(const GridSpec& o) const {
        return dims == o.dims && bbox.min == o.bbox.min && bbox.max == o.bbox.max;
    }
};

template <typename T>
struct Grid {
    GridSpec spec;
    std::vector<T> data;

    Grid() = default;
    explicit Grid(const GridSpec& s, T fill = T{}) : spec(s), data(s.voxel_count(), fill) {}

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }
    T& at(int i, int j, int k) { return data[spec.index(i, j, k)]; }
    const T& at(int i, int j, int k) const { return data[spec.index(i, j, k)]; }
    std::size_t size() const { return data.size(); }
};

using Mask = Grid<std::uint8_t>;

// 6-neighborhood offsets.
inline constexpr std::array<Vec3i, 6> kFaceNeighbors{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

/// Calls fn(neighbor_index) for each in-grid 6-neighbor of voxel idx.
template <typename Fn>
void for_each_face_neighbor(const GridSpec& spec, std::size_t idx, Fn&& fn) {
    const auto c = spec.coords(idx);
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(spec.dims[0]);
    const std::size_t sz = sy * static_cast<std::size_t>(spec.dims[1]);
    if (c[0] + 1 < spec.dims[0]) fn(idx + sx);
    if (c[0] > 0) fn(idx - sx);
    if (c[1] + 1 < spec.dims[1]) fn(idx + sy);
    if (c[1] > 0) fn(idx - sy);
    if (c[2] + 1 < spec.dims[2]) fn(idx + sz);
    if (c[2] > 0) fn(idx - sz);
}

/// Number of in-grid 6-neighbors; voxels on the grid boundary have fewer than 6.
inline int face_neighbor_count(const GridSpec& spec, std::size_t idx) {
    int n = 0;
    for_each_face_neighbor(spec, idx, [&](std::size_t) { ++n; });
    return n;
}

}  // namespace udfmi
