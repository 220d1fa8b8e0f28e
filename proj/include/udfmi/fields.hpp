#pragma once

#include "udfmi/core.hpp"
#include "udfmi/kdtree.hpp"

#include <map>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace udfmi {

enum class FieldKind { Analytic, Grid, PointSet };

/// Unsigned distance field over a bounding box. Implementations are immutable
/// after construction and safe for concurrent evaluation.
class ScalarField {
public:
    virtual ~ScalarField() = default;

    virtual FieldKind kind() const = 0;
    virtual const Box& bbox() const = 0;
    virtual double eval(const Vec3& p) const = 0;

    /// Central finite differences unless the field knows its exact gradient.
    virtual Vec3 gradient(const Vec3& p, double h) const;
    Vec3 gradient(const Vec3& p) const { return gradient(p, default_gradient_step()); }

    virtual double default_gradient_step() const { return 1e-4; }
};

/// Central finite-difference gradient, one axis at a time.
Vec3 fd_gradient(const ScalarField& field, const Vec3& p, double h);

// --- analytic primitives -----------------------------------------------------

struct SphereSurface {
    Vec3 center{0, 0, 0};
    double radius = 0.4;
};

/// Planar rectangle center + s*u + t*v, |s| <= half_u, |t| <= half_v.
struct Rectangle {
    Vec3 center{0, 0, 0};
    Vec3 u{1, 0, 0};
    Vec3 v{0, 1, 0};
    double half_u = 0.4;
    double half_v = 0.4;
};

struct Disk {
    Vec3 center{0, 0, 0};
    Vec3 normal{0, 0, 1};
    double radius = 0.4;
};

/// Infinite plane; not sampleable.
struct Plane {
    Vec3 point{0, 0, 0};
    Vec3 normal{0, 0, 1};
};

using Primitive = std::variant<SphereSurface, Rectangle, Disk, Plane>;

Vec3 closest_point(const Primitive& prim, const Vec3& p);
double surface_area(const Primitive& prim);

/// Exact distance to a union of primitives, with exact gradient.
class AnalyticField final : public ScalarField {
public:
    AnalyticField(std::vector<Primitive> prims, Box box = {});

    FieldKind kind() const override { return FieldKind::Analytic; }
    const Box& bbox() const override { return box_; }
    double eval(const Vec3& p) const override;
    /// Exact gradient (p - closest)/dist. At ties between distinct closest
    /// points the unit directions are averaged, so medial points give ~0.
    Vec3 gradient(const Vec3& p, double h) const override;
    using ScalarField::gradient;

    Vec3 closest(const Vec3& p) const;
    const std::vector<Primitive>& primitives() const { return prims_; }
    double area() const;

    /// Area-weighted uniform samples on the surface. Throws if the surface has
    /// an unbounded primitive.
    std::vector<Vec3> sample_surface(std::size_t n, std::uint64_t seed) const;

private:
    std::vector<Primitive> prims_;
    Box box_;
};

/// Grid-sampled field; values live at voxel centers and are trilinearly
/// interpolated. Queries outside the center lattice clamp.
class GridField final : public ScalarField {
public:
    explicit GridField(Grid<double> values);

    FieldKind kind() const override { return FieldKind::Grid; }
    const Box& bbox() const override { return values_.spec.bbox; }
    double eval(const Vec3& p) const override;
    double default_gradient_step() const override { return 0.5 * values_.spec.voxel_size(); }

    const Grid<double>& values() const { return values_; }
    const GridSpec& spec() const { return values_.spec; }

private:
    Grid<double> values_;
};

/// Distance to the nearest point of a point cloud.
class PointSetField final : public ScalarField {
public:
    PointSetField(std::vector<Vec3> points, Box box = {});

    FieldKind kind() const override { return FieldKind::PointSet; }
    const Box& bbox() const override { return box_; }
    double eval(const Vec3& p) const override;
    const KdTree& tree() const { return tree_; }

private:
    KdTree tree_;
    Box box_;
};

/// Evaluates `field` at every voxel center of `spec`.
GridField sample_grid(const ScalarField& field, const GridSpec& spec);

using FixtureParams = std::map<std::string, double>;

/// Names accepted by make_fixture.
const std::vector<std::string>& fixture_names();

/// Analytic UDF of a named test surface:
///   sphere (radius), plane-disk (radius), t-junction (half_size),
///   triple-junction (half_size), open-box-7 (half_size),
///   two-parallel-planes (half_size, gap), thin-shell (radius, gap).
/// Throws ErrorCode::Config for unknown names.
AnalyticField make_fixture(const std::string& name, const FixtureParams& params = {});

}  // namespace udfmi
