#include <doctest.h>

#include "udfmi/signfield.hpp"

#include <cmath>
#include <random>

using namespace udfmi;

namespace {

// one voxel centered at q
GridSpec single_voxel(const Vec3& q) {
    Box b;
    b.min = q - Vec3::Constant(0.001);
    b.max = q + Vec3::Constant(0.001);
    return GridSpec(Vec3i{1, 1, 1}, b);
}

Mask full(const GridSpec& spec) { return Mask(spec, 1); }

OrientedPointCloud random_cloud(std::mt19937_64& rng, std::size_t n) {
    const AnalyticField s = make_fixture("sphere");
    OrientedPointCloud c;
    c.points = s.sample_surface(n, rng());
    for (const auto& p : c.points) {
        Vec3 n = p.normalized();
        if (rng() % 7 == 0) n = -n;  // a few flipped normals are fine for these identities
        c.normals.push_back(n);
    }
    return c;
}

}  // namespace

TEST_CASE("single point contribution") {
    const OrientedPointCloud c{{Vec3(0, 0, 0)}, {Vec3(0, 0, 1)}};
    const double eps = 1e-8;
    const GridSpec above = single_voxel(Vec3(0, 0, 0.01));
    const GridSpec below = single_voxel(Vec3(0, 0, -0.01));
    const SignField a = local_two_signed_field(c, above, full(above), 0.05, eps);
    const SignField b = local_two_signed_field(c, below, full(below), 0.05, eps);
    // (x - q) . n = -0.01 above the point
    const double expected = -0.01 / (std::pow(0.01, 3) + eps);
    CHECK(a.w[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(b.w[0] == -a.w[0]);
    CHECK_FALSE(a.empty_neighborhood(0));
}

TEST_CASE("points beyond the radius do not contribute") {
    const OrientedPointCloud c{{Vec3(0, 0, 0), Vec3(0, 0, 0.2)}, {Vec3(0, 0, 1), Vec3(1, 0, 0)}};
    const GridSpec g = single_voxel(Vec3(0, 0, 0.01));
    const SignField near = local_two_signed_field(c, g, full(g), 0.05);
    const OrientedPointCloud only{{Vec3(0, 0, 0)}, {Vec3(0, 0, 1)}};
    CHECK(near.w[0] == local_two_signed_field(only, g, full(g), 0.05).w[0]);

    const GridSpec far = single_voxel(Vec3(0.5, 0.5, 0.5));
    const SignField e = local_two_signed_field(c, far, full(far), 0.05);
    CHECK(e.empty_neighborhood(0));
    CHECK(e.w[0] == 0.0);
    CHECK(e.in_omega1(0));
}

TEST_CASE("voxels outside omega1 are not evaluated") {
    std::mt19937_64 rng(21);
    const auto c = random_cloud(rng, 2000);
    const GridSpec spec(16);
    Mask m(spec, 0);
    const SignField sf = local_two_signed_field(c, spec, m, 0.1);
    for (std::size_t v = 0; v < sf.w.size(); ++v) {
        CHECK(sf.w[v] == 0.0);
        CHECK(sf.flags[v] == 0);
    }
}

TEST_CASE("negating normals negates w exactly") {
    std::mt19937_64 rng(22);
    auto c = random_cloud(rng, 3000);
    const GridSpec spec(20);
    const Mask m = envelope_mask(make_fixture("sphere"), spec, 0.1);
    const SignField a = local_two_signed_field(c, spec, m, 0.08);
    for (auto& n : c.normals) n = -n;
    const SignField b = local_two_signed_field(c, spec, m, 0.08);
    for (std::size_t v = 0; v < a.w.size(); ++v) CHECK(b.w[v] == -a.w[v]);
}

TEST_CASE("translating cloud and grid together leaves w unchanged") {
    std::mt19937_64 rng(23);
    auto c = random_cloud(rng, 3000);
    GridSpec spec(20);
    const Mask m = envelope_mask(make_fixture("sphere"), spec, 0.1);
    const SignField a = local_two_signed_field(c, spec, m, 0.08);
    const Vec3 t(0.25, -0.125, 0.5);
    for (auto& p : c.points) p += t;
    spec.bbox.min += t;
    spec.bbox.max += t;
    Mask moved = m;
    moved.spec = spec;
    const SignField b = local_two_signed_field(c, spec, moved, 0.08);
    for (std::size_t v = 0; v < a.w.size(); ++v) {
        CHECK(b.flags[v] == a.flags[v]);
        if (!m[v]) continue;
        // rounding in a sum is relative to the magnitudes summed, not to the result
        const Vec3 q = spec.center(v);
        double magnitude = 0;
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const Vec3 d = c.points[i] - q;
            if (d.norm() <= 0.08) magnitude += std::abs(d.dot(c.normals[i])) / (std::pow(d.norm(), 3) + 1e-8);
        }
        CHECK(std::abs(b.w[v] - a.w[v]) <= 1e-12 * std::max(1.0, magnitude));
    }
}

TEST_CASE("envelope of the sphere is a shell") {
    const GridSpec spec(32);
    const Mask m = envelope_mask(make_fixture("sphere"), spec, 0.05);
    for (std::size_t v = 0; v < spec.voxel_count(); ++v) {
        const double r = spec.center(v).norm();
        CHECK(static_cast<bool>(m[v]) == (std::abs(r - 0.4) < 0.05));
    }
}

TEST_CASE("envelope of the disk is a slab with a rounded rim") {
    const GridSpec spec(32);
    const Mask m = envelope_mask(make_fixture("plane-disk"), spec, 0.05);
    for (std::size_t v = 0; v < spec.voxel_count(); ++v) {
        const Vec3 p = spec.center(v);
        const double rho = std::hypot(p.x(), p.y());
        const double d = rho <= 0.4 ? std::abs(p.z()) : std::hypot(rho - 0.4, p.z());
        CHECK(static_cast<bool>(m[v]) == (d < 0.05));
    }
}

TEST_CASE("omega2 bits and stats") {
    std::mt19937_64 rng(24);
    const auto c = random_cloud(rng, 4000);
    const GridSpec spec(24);
    const AnalyticField s = make_fixture("sphere");
    const Mask o1 = envelope_mask(s, spec, 0.1);
    const Mask o2 = envelope_mask(s, spec, 0.03);
    SignFieldStats st;
    const SignField sf = local_two_signed_field(c, spec, o1, 0.05, 1e-8, &o2, &st);
    std::size_t n1 = 0;
    for (std::size_t v = 0; v < sf.w.size(); ++v) {
        n1 += o1[v];
        CHECK(sf.in_omega1(v) == static_cast<bool>(o1[v]));
        CHECK(sf.in_omega2(v) == static_cast<bool>(o2[v]));
    }
    CHECK(st.omega1_voxels == n1);
}

TEST_CASE("invalid radii are rejected") {
    const GridSpec spec(4);
    CHECK_THROWS_AS(envelope_mask(make_fixture("sphere"), spec, 0.0), Error);
    CHECK_THROWS_AS(local_two_signed_field({}, spec, Mask(spec, 1), -1.0), Error);
}

TEST_CASE("sampled disk: every voxel over the interior has the sign of its side") {
    const AnalyticField disk = make_fixture("plane-disk");
    OrientedPointCloud c;
    c.points = disk.sample_surface(20000, 25);
    c.normals.assign(c.points.size(), Vec3(0, 0, 1));
    const GridSpec spec(64);
    const Mask m = envelope_mask(disk, spec, 0.05);
    const SignField sf = local_two_signed_field(c, spec, m, 0.05);
    std::size_t checked = 0;
    for (std::size_t v = 0; v < spec.voxel_count(); ++v) {
        const Vec3 q = spec.center(v);
        if (!m[v] || std::hypot(q.x(), q.y()) > 0.4 - 0.05) continue;
        // each summand is (x - q).n = -q.z over |x - q|^3, so the sign is opposite to z
        CHECK(sf.w[v] * q.z() < 0.0);
        ++checked;
    }
    CHECK(checked > 1000);
}
