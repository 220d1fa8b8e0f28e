#include "udfmi/metrics.hpp"

#include "udfmi/kdtree.hpp"
#include "udfmi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

namespace udfmi {

namespace {

double mean_nearest_sq(const std::vector<Vec3>& from, const KdTree& to) {
    std::vector<double> d(from.size());
    parallel_for(from.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) d[i] = to.nearest(from[i]).second;
    });
    double s = 0.0;
    for (double x : d) s += x;
    return s / static_cast<double>(from.size());
}

}  // namespace

double chamfer_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::Stage, "metrics", "chamfer distance of an empty point set");
    const KdTree ta(a);
    const KdTree tb(b);
    const double ab = mean_nearest_sq(a, tb);
    const double ba = mean_nearest_sq(b, ta);
    return (ab + ba) * kChamferScale;
}

std::vector<Vec3> area_weighted_sample(const LabeledMesh& mesh, std::size_t n, std::uint64_t seed) {
    mesh.validate();
    if (mesh.faces.empty()) throw Error(ErrorCode::Stage, "metrics", "cannot sample an empty mesh");
    std::vector<double> cdf(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        cdf[f] = total;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::Stage, "metrics", "mesh has zero total area");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double x = uni(rng) * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        if (it == cdf.end()) --it;
        const auto& t = mesh.faces[static_cast<std::size_t>(it - cdf.begin())];
        const double r1 = std::sqrt(uni(rng));
        const double r2 = uni(rng);
        out.push_back((1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] + r1 * r2 * mesh.vertices[t[2]]);
    }
    return out;
}

LabeledMesh weld_vertices(const LabeledMesh& mesh) {
    mesh.validate();
    auto less = [](const Vec3& a, const Vec3& b) {
        return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
    };
    std::map<Vec3, std::uint32_t, decltype(less)> index(less);
    LabeledMesh out;
    std::vector<std::uint32_t> remap(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        auto [it, inserted] = index.try_emplace(mesh.vertices[v], static_cast<std::uint32_t>(out.vertices.size()));
        if (inserted) out.vertices.push_back(mesh.vertices[v]);
        remap[v] = it->second;
    }
    out.faces.reserve(mesh.faces.size());
    for (const auto& f : mesh.faces) out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    out.face_labels = mesh.face_labels;
    out.drop_unreferenced_vertices();
    return out;
}

TopologyReport topology_report(const LabeledMesh& mesh) {
    const LabeledMesh m = weld_vertices(mesh);
    TopologyReport r;
    r.vertices = m.vertices.size();
    r.faces = m.faces.size();

    std::unordered_map<std::uint64_t, std::uint32_t> first_face;
    std::unordered_map<std::uint64_t, std::uint32_t> incidence;
    std::vector<std::uint32_t> parent(m.faces.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
        const auto& t = m.faces[f];
        for (int e = 0; e < 3; ++e) {
            const auto ed = make_edge(t[e], t[(e + 1) % 3]);
            const std::uint64_t key = (static_cast<std::uint64_t>(ed.first) << 32) | ed.second;
            ++incidence[key];
            auto [it, inserted] = first_face.try_emplace(key, static_cast<std::uint32_t>(f));
            if (!inserted) parent[find(static_cast<std::uint32_t>(f))] = find(it->second);
        }
    }
    r.edges = incidence.size();
    for (const auto& [k, n] : incidence) {
        if (n == 1) ++r.boundary_edges;
        else if (n == 2) ++r.manifold_edges;
        else ++r.nonmanifold_edges;
    }
    for (std::size_t f = 0; f < m.faces.size(); ++f) r.components += find(static_cast<std::uint32_t>(f)) == f;
    r.euler_characteristic = static_cast<long long>(r.vertices) - static_cast<long long>(r.edges) + static_cast<long long>(r.faces);
    std::set<std::uint32_t> labels;
    for (const auto& p : m.face_labels) labels.insert(p.begin(), p.end());
    r.label_count = labels.size();
    return r;
}

}  // namespace udfmi
