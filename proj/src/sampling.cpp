#include "udfmi/sampling.hpp"

#include "udfmi/kdtree.hpp"
#include "udfmi/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace udfmi {

namespace {
constexpr std::size_t kSampleChunk = 16384;
}

std::vector<Vec3> sample_level_band(const ScalarField& field, double r1, std::size_t n, std::uint64_t seed,
                                    std::size_t max_attempts_per_point) {
    if (!(r1 > 0.0)) throw Error(ErrorCode::Config, "sampling", "r1 must be positive");
    if (n == 0) throw Error(ErrorCode::Config, "sampling", "sample count must be at least 1");
    const Box& box = field.bbox();
    const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
    std::vector<Vec3> out(n);
    parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            const std::size_t begin = c * kSampleChunk;
            const std::size_t end = std::min(n, begin + kSampleChunk);
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(c)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> ux(box.min.x(), box.max.x());
            std::uniform_real_distribution<double> uy(box.min.y(), box.max.y());
            std::uniform_real_distribution<double> uz(box.min.z(), box.max.z());
            const std::size_t budget = max_attempts_per_point * (end - begin);
            std::size_t attempts = 0;
            for (std::size_t i = begin; i < end;) {
                if (++attempts > budget) {
                    throw Error(ErrorCode::Stage, "sampling", "rejection sampler exhausted its budget; the r1 band is (nearly) empty");
                }
                const Vec3 p(ux(rng), uy(rng), uz(rng));
                if (field.eval(p) <= r1) out[i++] = p;
            }
        }
    }, 1);
    return out;
}

ProjectionResult project_to_minimum(const ScalarField& field, const Vec3& start, int steps) {
    ProjectionResult res{start, false};
    Vec3 p = start;
    double fp = field.eval(p);
    double best = fp;
    for (int s = 0; s < steps && fp > 0.0; ++s) {
        const Vec3 g = field.gradient(p);
        const double gn = g.norm();
        if (!(gn > 1e-12) || !std::isfinite(gn)) {
            if (s == 0) res.skipped = true;
            break;
        }
        const Vec3 dir = g / gn;
        double alpha = 1.0;
        Vec3 q = p;
        double fq = fp;
        bool moved = false;
        for (int tries = 0; tries < 40; ++tries) {
            q = p - alpha * fp * dir;
            fq = field.eval(q);
            if (fq <= fp) {
                moved = true;
                break;
            }
            alpha *= 0.9;
        }
        if (!moved) break;
        p = q;
        fp = fq;
        if (fp < best) {
            best = fp;
            res.point = p;
        }
    }
    return res;
}

std::size_t project_points(const ScalarField& field, std::vector<Vec3>& points, int steps) {
    std::vector<std::uint8_t> skipped(points.size(), 0);
    parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto r = project_to_minimum(field, points[i], steps);
            points[i] = r.point;
            skipped[i] = r.skipped;
        }
    });
    return static_cast<std::size_t>(std::count(skipped.begin(), skipped.end(), 1));
}

std::vector<Vec3> voxel_downsample(const std::vector<Vec3>& points, double voxel) {
    if (!(voxel > 0.0)) throw Error(ErrorCode::Config, "sampling", "downsample voxel must be positive");
    if (points.empty()) return {};
    using Key = std::array<std::int64_t, 3>;
    std::vector<Key> keys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int a = 0; a < 3; ++a) keys[i][a] = static_cast<std::int64_t>(std::floor(points[i][a] / voxel));
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Key& ka = keys[a];
        const Key& kb = keys[b];
        return std::tie(ka[2], ka[1], ka[0]) < std::tie(kb[2], kb[1], kb[0]);
    });
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        Vec3 sum = Vec3::Zero();
        while (j < order.size() && keys[order[j]] == keys[order[i]]) sum += points[order[j++]];
        out.push_back(sum / static_cast<double>(j - i));
        i = j;
    }
    return out;
}

namespace {

struct DisjointSets {
    std::vector<std::uint32_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent[b] = a;
        return true;
    }
};

}  // namespace

OrientedPointCloud estimate_normals(const std::vector<Vec3>& points, int k, NormalEstimationStats* stats) {
    if (k < 3) throw Error(ErrorCode::Config, "normals", "k must be at least 3");
    if (points.size() <= static_cast<std::size_t>(k)) throw Error(ErrorCode::Stage, "normals", "need more points than k");
    const std::size_t n = points.size();
    const KdTree tree(points);

    std::vector<std::vector<std::uint32_t>> neighbors(n);
    std::vector<Vec3> normals(n, Vec3::UnitZ());
    std::vector<std::uint8_t> degenerate(n, 0);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        std::vector<std::pair<std::uint32_t, double>> knn;
        for (std::size_t i = b; i < e; ++i) {
            tree.knn(points[i], static_cast<std::size_t>(k) + 1, knn);
            Vec3 mean = Vec3::Zero();
            for (const auto& [j, d2] : knn) mean += points[j];
            mean /= static_cast<double>(knn.size());
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (const auto& [j, d2] : knn) {
                const Vec3 d = points[j] - mean;
                cov += d * d.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
            const Vec3 ev = eig.eigenvalues();
            normals[i] = eig.eigenvectors().col(0).normalized();
            degenerate[i] = !(ev[1] > 1e-12 * std::max(ev[2], 1e-300));
            auto& nb = neighbors[i];
            nb.reserve(knn.size());
            for (const auto& [j, d2] : knn) {
                if (j != i) nb.push_back(j);
            }
        }
    }, 256);

    std::size_t degenerate_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!degenerate[i]) continue;
        ++degenerate_count;
        // breadth-first over the k-NN graph for the nearest well-conditioned neighbor
        std::queue<std::uint32_t> q;
        std::vector<std::uint32_t> visited{static_cast<std::uint32_t>(i)};
        q.push(static_cast<std::uint32_t>(i));
        bool found = false;
        while (!q.empty() && !found && visited.size() < 4096) {
            const auto cur = q.front();
            q.pop();
            for (auto j : neighbors[cur]) {
                if (std::find(visited.begin(), visited.end(), j) != visited.end()) continue;
                if (!degenerate[j]) {
                    normals[i] = normals[j];
                    found = true;
                    break;
                }
                visited.push_back(j);
                q.push(j);
            }
        }
    }

    // minimum spanning forest of the symmetric k-NN graph
    struct Edge {
        double w;
        std::uint32_t a, b;
    };
    std::vector<Edge> edges;
    edges.reserve(n * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : neighbors[i]) {
            const auto a = static_cast<std::uint32_t>(std::min<std::size_t>(i, j));
            const auto b = static_cast<std::uint32_t>(std::max<std::size_t>(i, j));
            edges.push_back({1.0 - std::abs(normals[i].dot(normals[j])), a, b});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b);
    });
    DisjointSets ds(n);
    std::vector<std::vector<std::uint32_t>> tree_adj(n);
    for (const auto& e : edges) {
        if (ds.unite(e.a, e.b)) {
            tree_adj[e.a].push_back(e.b);
            tree_adj[e.b].push_back(e.a);
        }
    }

    // root each component at its max-z point
    std::vector<std::uint32_t> root_of(n);
    for (std::size_t i = 0; i < n; ++i) root_of[i] = ds.find(static_cast<std::uint32_t>(i));
    std::vector<std::int64_t> top(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        auto& t = top[root_of[i]];
        if (t < 0 || points[i].z() > points[static_cast<std::size_t>(t)].z()) t = static_cast<std::int64_t>(i);
    }
    std::vector<std::uint8_t> visited(n, 0);
    std::size_t components = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (top[r] < 0) continue;
        ++components;
        const auto root = static_cast<std::uint32_t>(top[r]);
        Vec3& rn = normals[root];
        if (rn.z() < 0 || (rn.z() == 0 && (rn.x() < 0 || (rn.x() == 0 && rn.y() < 0)))) rn = -rn;
        std::queue<std::uint32_t> q;
        q.push(root);
        visited[root] = 1;
        while (!q.empty()) {
            const auto cur = q.front();
            q.pop();
            for (auto nb : tree_adj[cur]) {
                if (visited[nb]) continue;
                visited[nb] = 1;
                if (normals[nb].dot(normals[cur]) < 0) normals[nb] = -normals[nb];
                q.push(nb);
            }
        }
    }
    if (stats) {
        stats->components = components;
        stats->degenerate = degenerate_count;
    }
    return OrientedPointCloud{points, std::move(normals)};
}

}  // namespace udfmi
