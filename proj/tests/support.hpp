// Shared oracles and geometry helpers for the test binaries. Everything here
// is written independently of the library code it checks.
#pragma once

#include "udfmi/labeling.hpp"
#include "udfmi/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace udfmi::testing {

// ---- labeling oracles -------------------------------------------------------

/// Energy of a labeling written straight from the definition: unit cost for a
/// free voxel whose label is outside its partition's non-empty allowed set,
/// unit cost per 6-adjacent pair of non-outside voxels with different labels.
inline std::int64_t oracle_energy(const RelabelProblem& p, const std::vector<std::uint32_t>& f) {
    const auto& d = p.spec.dims;
    std::int64_t e = 0;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                const std::size_t v = p.spec.index(i, j, k);
                if (p.role[v] == RelabelProblem::kOutside) continue;
                if (p.role[v] == RelabelProblem::kFree) {
                    const auto& set = p.allowed[p.origin[v]];
                    if (!set.empty() && std::find(set.begin(), set.end(), f[v]) == set.end()) ++e;
                }
                const int nb[3][3] = {{i + 1, j, k}, {i, j + 1, k}, {i, j, k + 1}};
                for (const auto& n : nb) {
                    if (n[0] >= d[0] || n[1] >= d[1] || n[2] >= d[2]) continue;
                    const std::size_t w = p.spec.index(n[0], n[1], n[2]);
                    if (p.role[w] != RelabelProblem::kOutside && f[w] != f[v]) ++e;
                }
            }
    return e;
}

/// Exhaustive minimum over all labelings of the free voxels.
inline std::int64_t brute_force_optimum(const RelabelProblem& p) {
    std::vector<std::size_t> free;
    std::vector<std::uint32_t> f(p.role.size(), 0);
    for (std::size_t v = 0; v < p.role.size(); ++v) {
        if (p.role[v] == RelabelProblem::kFree) free.push_back(v);
        if (p.role[v] == RelabelProblem::kSeed) f[v] = p.seed_label[v];
    }
    const std::uint32_t L = p.label_count;
    std::vector<std::uint32_t> digit(free.size(), 0);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (;;) {
        for (std::size_t q = 0; q < free.size(); ++q) f[free[q]] = digit[q] + 1;
        best = std::min(best, oracle_energy(p, f));
        std::size_t q = 0;
        while (q < digit.size() && ++digit[q] == L) digit[q++] = 0;
        if (q == digit.size()) break;
    }
    return best;
}

/// Random relabel problem on a grid of at most 3x3x3 voxels with at most
/// max_free free voxels and exactly `labels` seed labels.
inline RelabelProblem random_relabel_problem(std::mt19937_64& rng, std::uint32_t labels, std::size_t max_free) {
    std::uniform_int_distribution<int> dim(1, 3);
    for (;;) {
        RelabelProblem p;
        p.spec = GridSpec(Vec3i{dim(rng), dim(rng), dim(rng)}, Box{});
        const std::size_t n = p.spec.voxel_count();
        if (n < labels + 1) continue;
        p.role.assign(n, RelabelProblem::kOutside);
        p.seed_label.assign(n, 0);
        p.origin.assign(n, 0);
        p.label_count = labels;
        // origin partitions 1..3, each with a random allowed subset of the labels
        const std::uint32_t partitions = 3;
        p.allowed.assign(partitions + 1, {});
        for (std::uint32_t q = 1; q <= partitions; ++q) {
            for (std::uint32_t l = 1; l <= labels; ++l) {
                if (rng() % 2) p.allowed[q].push_back(l);
            }
        }
        std::vector<std::size_t> order(n);
        for (std::size_t v = 0; v < n; ++v) order[v] = v;
        std::shuffle(order.begin(), order.end(), rng);
        // every label gets one seed
        for (std::uint32_t l = 1; l <= labels; ++l) {
            p.role[order[l - 1]] = RelabelProblem::kSeed;
            p.seed_label[order[l - 1]] = l;
        }
        std::size_t free = 0;
        for (std::size_t q = labels; q < n; ++q) {
            const std::size_t v = order[q];
            const auto r = rng() % 10;
            if (r < 6 && free < max_free) {
                p.role[v] = RelabelProblem::kFree;
                p.origin[v] = 1 + static_cast<std::uint32_t>(rng() % partitions);
                ++free;
            } else if (r < 8) {
                p.role[v] = RelabelProblem::kSeed;
                p.seed_label[v] = 1 + static_cast<std::uint32_t>(rng() % labels);
            }
        }
        if (free == 0) continue;
        return p;
    }
}

/// Flood fill over the same class rule as the library: voxels inside omega1,
/// grouped by 6-adjacency among equal classes (-1, +1, or 0 for empty).
inline std::vector<int> oracle_components(const SignField& sf) {
    const auto& d = sf.spec.dims;
    std::vector<int> comp(sf.w.size(), 0);
    auto cls = [&](std::size_t v) {
        if (sf.flags[v] & kEmptyNeighborhood) return 0;
        return sf.w[v] >= 0.0 ? 1 : -1;
    };
    int next = 0;
    for (std::size_t s = 0; s < comp.size(); ++s) {
        if (!(sf.flags[s] & kOmega1) || comp[s]) continue;
        comp[s] = ++next;
        std::vector<std::size_t> stack{s};
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            const int i = static_cast<int>(v % d[0]);
            const int j = static_cast<int>((v / d[0]) % d[1]);
            const int k = static_cast<int>(v / (static_cast<std::size_t>(d[0]) * d[1]));
            const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
            for (const auto& o : off) {
                const int a = i + o[0], b = j + o[1], c = k + o[2];
                if (a < 0 || b < 0 || c < 0 || a >= d[0] || b >= d[1] || c >= d[2]) continue;
                const std::size_t w = sf.spec.index(a, b, c);
                if ((sf.flags[w] & kOmega1) && !comp[w] && cls(w) == cls(v)) {
                    comp[w] = next;
                    stack.push_back(w);
                }
            }
        }
    }
    return comp;
}

/// True when two labelings induce the same partition (bijective renaming, 0 fixed).
template <typename A, typename B>
bool same_partition(const std::vector<A>& a, const std::vector<B>& b) {
    if (a.size() != b.size()) return false;
    std::map<long long, long long> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long long x = static_cast<long long>(a[i]);
        const long long y = static_cast<long long>(b[i]);
        if ((x == 0) != (y == 0)) return false;
        auto [it, ins] = ab.emplace(x, y);
        if (!ins && it->second != y) return false;
        auto [it2, ins2] = ba.emplace(y, x);
        if (!ins2 && it2->second != x) return false;
    }
    return true;
}

// ---- geometry ---------------------------------------------------------------

/// Distance from p to segment [a, b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Segment [p, q] against triangle (a, b, c), Moller-Trumbore style. Touching
/// within `tol` of the segment ends or triangle border does not count.
inline bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c, double tol = 1e-9) {
    const Vec3 dir = q - p;
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 h = dir.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) < 1e-18) return false;
    const double inv = 1.0 / det;
    const Vec3 s = p - a;
    const double u = inv * s.dot(h);
    if (u <= tol || u >= 1.0 - tol) return false;
    const Vec3 qv = s.cross(e1);
    const double v = inv * dir.dot(qv);
    if (v <= tol || u + v >= 1.0 - tol) return false;
    const double t = inv * e2.dot(qv);
    return t > tol && t < 1.0 - tol;
}

/// Angle in degrees between two half-planes hinged on edge (a, b) through the
/// opposite vertices c and d.
inline double hinge_angle_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    const Vec3 e = (b - a).normalized();
    Vec3 u = (c - a) - (c - a).dot(e) * e;
    Vec3 v = (d - a) - (d - a).dot(e) * e;
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double cosang = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(cosang) * 180.0 / 3.14159265358979323846;
}

/// Count of face pairs among `faces` that intersect away from shared vertices.
inline std::size_t self_intersections(const LabeledMesh& m, const std::vector<std::uint32_t>& faces) {
    std::size_t hits = 0;
    auto tri = [&](std::uint32_t f, int i) { return m.vertices[m.faces[f][i]]; };
    for (std::size_t x = 0; x < faces.size(); ++x) {
        for (std::size_t y = x + 1; y < faces.size(); ++y) {
            const auto& A = m.faces[faces[x]];
            const auto& B = m.faces[faces[y]];
            int shared = 0;
            for (auto va : A)
                for (auto vb : B) shared += va == vb;
            if (shared >= 2) continue;  // edge neighbors are judged by their hinge angle
            bool hit = false;
            for (int pass = 0; pass < 2 && !hit; ++pass) {
                const auto fa = pass == 0 ? faces[x] : faces[y];
                const auto fb = pass == 0 ? faces[y] : faces[x];
                const auto& FA = m.faces[fa];
                const auto& FB = m.faces[fb];
                for (int e = 0; e < 3 && !hit; ++e) {
                    const auto i0 = FA[e], i1 = FA[(e + 1) % 3];
                    // with one shared vertex only the edge opposite to it can cross
                    if (shared == 1 && (std::find(FB.begin(), FB.end(), i0) != FB.end() ||
                                        std::find(FB.begin(), FB.end(), i1) != FB.end())) {
                        continue;
                    }
                    hit = segment_hits_triangle(m.vertices[i0], m.vertices[i1], tri(fb, 0), tri(fb, 1), tri(fb, 2));
                }
            }
            hits += hit;
        }
    }
    return hits;
}

}  // namespace udfmi::testing
