#include "udfmi/fields.hpp"

#include "udfmi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace udfmi {

Vec3 ScalarField::gradient(const Vec3& p, double h) const { return fd_gradient(*this, p, h); }

Vec3 fd_gradient(const ScalarField& field, const Vec3& p, double h) {
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
        Vec3 lo = p;
        Vec3 hi = p;
        lo[a] -= h;
        hi[a] += h;
        g[a] = (field.eval(hi) - field.eval(lo)) / (2.0 * h);
    }
    return g;
}

// --- primitives --------------------------------------------------------------

namespace {

struct ClosestVisitor {
    const Vec3& p;

    Vec3 operator()(const SphereSurface& s) const {
        const Vec3 d = p - s.center;
        const double n = d.norm();
        if (n == 0.0) return s.center + Vec3(s.radius, 0, 0);
        return s.center + d * (s.radius / n);
    }
    Vec3 operator()(const Rectangle& r) const {
        const Vec3 d = p - r.center;
        const double s = std::clamp(d.dot(r.u), -r.half_u, r.half_u);
        const double t = std::clamp(d.dot(r.v), -r.half_v, r.half_v);
        return r.center + s * r.u + t * r.v;
    }
    Vec3 operator()(const Disk& k) const {
        const Vec3 d = p - k.center;
        Vec3 in_plane = d - d.dot(k.normal) * k.normal;
        const double n = in_plane.norm();
        if (n > k.radius) in_plane *= k.radius / n;
        return k.center + in_plane;
    }
    Vec3 operator()(const Plane& pl) const {
        const Vec3 d = p - pl.point;
        return p - d.dot(pl.normal) * pl.normal;
    }
};

struct AreaVisitor {
    double operator()(const SphereSurface& s) const { return 4.0 * std::numbers::pi * s.radius * s.radius; }
    double operator()(const Rectangle& r) const { return 4.0 * r.half_u * r.half_v; }
    double operator()(const Disk& k) const { return std::numbers::pi * k.radius * k.radius; }
    double operator()(const Plane&) const { return std::numeric_limits<double>::infinity(); }
};

// Orthonormal pair spanning the plane orthogonal to n.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& n) {
    const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    const Vec3 t1 = n.cross(helper).normalized();
    return {t1, n.cross(t1)};
}

struct SampleVisitor {
    std::mt19937_64& rng;

    Vec3 operator()(const SphereSurface& s) const {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
        const double z = u(rng);
        const double phi = a(rng);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return s.center + s.radius * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    Vec3 operator()(const Rectangle& r) const {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double s = u(rng) * r.half_u;
        const double t = u(rng) * r.half_v;
        return r.center + s * r.u + t * r.v;
    }
    Vec3 operator()(const Disk& k) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double rho = k.radius * std::sqrt(u(rng));
        const double phi = 2.0 * std::numbers::pi * u(rng);
        const auto [t1, t2] = tangent_frame(k.normal);
        return k.center + rho * (std::cos(phi) * t1 + std::sin(phi) * t2);
    }
    Vec3 operator()(const Plane&) const { throw Error(ErrorCode::Config, "fields", "cannot sample an infinite plane"); }
};

}  // namespace

Vec3 closest_point(const Primitive& prim, const Vec3& p) { return std::visit(ClosestVisitor{p}, prim); }

double surface_area(const Primitive& prim) { return std::visit(AreaVisitor{}, prim); }

// --- AnalyticField -----------------------------------------------------------

AnalyticField::AnalyticField(std::vector<Primitive> prims, Box box) : prims_(std::move(prims)), box_(box) {
    if (prims_.empty()) throw Error(ErrorCode::Config, "fields", "analytic field needs at least one primitive");
}

double AnalyticField::eval(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& prim : prims_) best = std::min(best, (p - closest_point(prim, p)).norm());
    return best;
}

Vec3 AnalyticField::closest(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    Vec3 out = p;
    for (const auto& prim : prims_) {
        const Vec3 c = closest_point(prim, p);
        const double d = (p - c).norm();
        if (d < best) {
            best = d;
            out = c;
        }
    }
    return out;
}

Vec3 AnalyticField::gradient(const Vec3& p, double) const {
    constexpr double kTie = 1e-12;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec3> feet;
    feet.reserve(prims_.size());
    std::vector<double> dist;
    dist.reserve(prims_.size());
    for (const auto& prim : prims_) {
        feet.push_back(closest_point(prim, p));
        dist.push_back((p - feet.back()).norm());
        best = std::min(best, dist.back());
    }
    if (best == 0.0) return Vec3::Zero();
    Vec3 sum = Vec3::Zero();
    int count = 0;
    std::vector<Vec3> used;
    for (std::size_t i = 0; i < prims_.size(); ++i) {
        if (dist[i] > best + kTie) continue;
        // primitives sharing one foot point contribute once
        const bool seen = std::any_of(used.begin(), used.end(), [&](const Vec3& u) { return (u - feet[i]).norm() <= kTie; });
        if (seen) continue;
        used.push_back(feet[i]);
        sum += (p - feet[i]) / dist[i];
        ++count;
    }
    return sum / count;
}

double AnalyticField::area() const {
    double a = 0.0;
    for (const auto& prim : prims_) a += surface_area(prim);
    return a;
}

std::vector<Vec3> AnalyticField::sample_surface(std::size_t n, std::uint64_t seed) const {
    std::vector<double> areas;
    for (const auto& prim : prims_) {
        const double a = surface_area(prim);
        if (!std::isfinite(a)) throw Error(ErrorCode::Config, "fields", "surface has an unbounded primitive");
        areas.push_back(a);
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::visit(SampleVisitor{rng}, prims_[pick(rng)]));
    return out;
}

// --- GridField ---------------------------------------------------------------

GridField::GridField(Grid<double> values) : values_(std::move(values)) {
    values_.spec.validate();
    if (values_.data.size() != values_.spec.voxel_count()) {
        throw Error(ErrorCode::InvalidSpec, "fields", "grid value count does not match dims");
    }
}

double GridField::eval(const Vec3& p) const {
    const GridSpec& s = values_.spec;
    const Vec3 h = s.spacing();
    int i0[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
        // continuous index relative to voxel centers
        double u = (p[a] - s.bbox.min[a]) / h[a] - 0.5;
        u = std::clamp(u, 0.0, static_cast<double>(s.dims[a] - 1));
        int i = static_cast<int>(std::floor(u));
        if (i >= s.dims[a] - 1) i = std::max(0, s.dims[a] - 2);
        i0[a] = i;
        t[a] = s.dims[a] == 1 ? 0.0 : u - i;
    }
    auto val = [&](int dx, int dy, int dz) {
        const int x = std::min(i0[0] + dx, s.dims[0] - 1);
        const int y = std::min(i0[1] + dy, s.dims[1] - 1);
        const int z = std::min(i0[2] + dz, s.dims[2] - 1);
        return values_.at(x, y, z);
    };
    // Nodes with zero weight are skipped so exact node queries return the stored value.
    double out = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
        const double wz = dz ? t[2] : 1.0 - t[2];
        if (wz == 0.0) continue;
        for (int dy = 0; dy < 2; ++dy) {
            const double wy = dy ? t[1] : 1.0 - t[1];
            if (wy == 0.0) continue;
            for (int dx = 0; dx < 2; ++dx) {
                const double wx = dx ? t[0] : 1.0 - t[0];
                if (wx == 0.0) continue;
                out += wx * wy * wz * val(dx, dy, dz);
            }
        }
    }
    return out;
}

GridField sample_grid(const ScalarField& field, const GridSpec& spec) {
    spec.validate();
    Grid<double> g(spec);
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) g[i] = field.eval(spec.center(i));
    });
    return GridField(std::move(g));
}

// --- PointSetField -----------------------------------------------------------

PointSetField::PointSetField(std::vector<Vec3> points, Box box) : tree_(std::move(points)), box_(box) {
    if (tree_.empty()) throw Error(ErrorCode::Config, "fields", "point-set field needs at least one point");
}

double PointSetField::eval(const Vec3& p) const { return std::sqrt(tree_.nearest(box_.clamp(p)).second); }

// --- fixtures ----------------------------------------------------------------

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names{"sphere",     "plane-disk",          "t-junction", "triple-junction",
                                                "open-box-7", "two-parallel-planes", "thin-shell"};
    return names;
}

namespace {

double param(const FixtureParams& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

Rectangle rect(Vec3 center, Vec3 u, double hu, Vec3 v, double hv) { return Rectangle{center, u, v, hu, hv}; }

}  // namespace

AnalyticField make_fixture(const std::string& name, const FixtureParams& params) {
    const Vec3 X(1, 0, 0), Y(0, 1, 0), Z(0, 0, 1), O(0, 0, 0);
    std::vector<Primitive> prims;
    if (name == "sphere") {
        prims.push_back(SphereSurface{O, param(params, "radius", 0.4)});
    } else if (name == "thin-shell") {
        // two concentric spheres enclosing a shell of width gap
        const double r = param(params, "radius", 0.4);
        prims.push_back(SphereSurface{O, r});
        prims.push_back(SphereSurface{O, r + param(params, "gap", 0.03)});
    } else if (name == "plane-disk") {
        prims.push_back(Disk{O, Z, param(params, "radius", 0.4)});
    } else if (name == "t-junction") {
        // vertical plate x=0, horizontal half-plate z=0 on the +x side
        const double s = param(params, "half_size", 0.4);
        prims.push_back(rect(O, Y, s, Z, s));
        prims.push_back(rect(Vec3(s / 2, 0, 0), X, s / 2, Y, s));
    } else if (name == "triple-junction") {
        // three half-planes meeting at 120 degrees along the z axis
        const double s = param(params, "half_size", 0.4);
        for (double deg : {90.0, 210.0, 330.0}) {
            const double a = deg * std::numbers::pi / 180.0;
            const Vec3 d(std::cos(a), std::sin(a), 0);
            prims.push_back(rect(d * (s / 2), d, s / 2, Z, s));
        }
    } else if (name == "open-box-7") {
        // Box without a lid, split by two full-height inner walls and a shelf
        // in the +x half: one outer region and six inner cells.
        const double a = param(params, "half_size", 0.4);
        prims.push_back(rect(Vec3(0, 0, -a), X, a, Y, a));  // bottom
        prims.push_back(rect(Vec3(-a, 0, 0), Y, a, Z, a));  // left
        prims.push_back(rect(Vec3(a, 0, 0), Y, a, Z, a));   // right
        prims.push_back(rect(Vec3(0, -a, 0), X, a, Z, a));  // front
        prims.push_back(rect(Vec3(0, a, 0), X, a, Z, a));   // back
        prims.push_back(rect(O, Y, a, Z, a));               // inner wall x=0
        prims.push_back(rect(O, X, a, Z, a));               // inner wall y=0
        prims.push_back(rect(Vec3(a / 2, 0, 0), X, a / 2, Y, a));  // shelf
    } else if (name == "two-parallel-planes") {
        const double s = param(params, "half_size", 0.4);
        const double g = param(params, "gap", 0.1);
        prims.push_back(rect(Vec3(0, 0, -g / 2), X, s, Y, s));
        prims.push_back(rect(Vec3(0, 0, g / 2), X, s, Y, s));
    } else {
        throw Error(ErrorCode::Config, "fields", "unknown fixture '" + name + "'");
    }
    return AnalyticField(std::move(prims));
}

}  // namespace udfmi
