#include "udfmi/refine.hpp"

#include "udfmi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace udfmi {

void RefineConfig::validate() const {
    if (!(lambda1 >= 0.0)) throw Error(ErrorCode::Config, "refine", "lambda1 must be non-negative");
    if (iterations < 0) throw Error(ErrorCode::Config, "refine", "iterations must be non-negative");
    if (!(step > 0.0)) throw Error(ErrorCode::Config, "refine", "step must be positive");
    if (max_halvings < 0) throw Error(ErrorCode::Config, "refine", "max_halvings must be non-negative");
}

std::map<std::uint32_t, std::vector<std::uint32_t>> group_submeshes(const LabeledMesh& mesh) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        for (auto l : mesh.face_labels[f]) groups[l].push_back(static_cast<std::uint32_t>(f));
    }
    return groups;
}

std::size_t group_nonmanifold_edges(const LabeledMesh& mesh) {
    std::size_t bad = 0;
    for (const auto& [label, faces] : group_submeshes(mesh)) {
        std::unordered_map<std::uint64_t, std::uint32_t> inc;
        for (auto f : faces) {
            const auto& t = mesh.faces[f];
            for (int e = 0; e < 3; ++e) {
                const auto ed = make_edge(t[e], t[(e + 1) % 3]);
                ++inc[(static_cast<std::uint64_t>(ed.first) << 32) | ed.second];
            }
        }
        for (const auto& [k, n] : inc) bad += n > 2;
    }
    return bad;
}

namespace {

// Sorted unique 1-ring of every vertex over the given faces.
std::vector<std::vector<std::uint32_t>> rings(const LabeledMesh& mesh, const std::vector<std::uint32_t>& faces) {
    std::vector<std::vector<std::uint32_t>> ring(mesh.vertices.size());
    for (auto f : faces) {
        const auto& t = mesh.faces[f];
        for (int e = 0; e < 3; ++e) {
            ring[t[e]].push_back(t[(e + 1) % 3]);
            ring[t[e]].push_back(t[(e + 2) % 3]);
        }
    }
    for (auto& r : ring) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    return ring;
}

}  // namespace

RefineObjective::RefineObjective(const LabeledMesh& mesh, const ScalarField& field, double lambda1, double gradient_h,
                                 bool naive_laplacian)
    : field_(field), lambda_(lambda1), h_(gradient_h > 0.0 ? gradient_h : field.default_gradient_step()) {
    mesh.validate();
    mult_.assign(mesh.vertices.size(), 0);
    std::vector<std::vector<std::uint32_t>> full;
    if (naive_laplacian) {
        std::vector<std::uint32_t> all(mesh.faces.size());
        for (std::size_t f = 0; f < all.size(); ++f) all[f] = static_cast<std::uint32_t>(f);
        full = rings(mesh, all);
    }
    term_begin_.push_back(0);
    for (const auto& [label, faces] : group_submeshes(mesh)) {
        const auto ring = rings(mesh, faces);
        for (std::size_t v = 0; v < ring.size(); ++v) {
            if (ring[v].empty()) continue;
            ++mult_[v];
            term_vertex_.push_back(static_cast<std::uint32_t>(v));
            const auto& nb = naive_laplacian ? full[v] : ring[v];
            neighbors_.insert(neighbors_.end(), nb.begin(), nb.end());
            term_begin_.push_back(static_cast<std::uint32_t>(neighbors_.size()));
        }
    }
}

double RefineObjective::loss(const std::vector<Vec3>& p) const {
    std::vector<double> f(p.size(), 0.0);
    parallel_for(p.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            if (mult_[i]) f[i] = field_.eval(p[i]);
        }
    }, 256);
    double total = 0.0;
    // frozen vertices (non-finite field) contribute nothing
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::isfinite(f[i])) total += mult_[i] * f[i];
    }
    double lap = 0.0;
    for (std::size_t t = 0; t < term_vertex_.size(); ++t) {
        Vec3 mean(0, 0, 0);
        for (auto k = term_begin_[t]; k < term_begin_[t + 1]; ++k) mean += p[neighbors_[k]];
        mean /= static_cast<double>(term_begin_[t + 1] - term_begin_[t]);
        lap += (p[term_vertex_[t]] - mean).squaredNorm();
    }
    return total + lambda_ * lap;
}

std::vector<Vec3> RefineObjective::gradient(const std::vector<Vec3>& p) const {
    std::vector<Vec3> g(p.size(), Vec3::Zero());
    parallel_for(p.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            if (!mult_[i]) continue;
            const double f = field_.eval(p[i]);
            const Vec3 gf = field_.gradient(p[i], h_);
            if (!std::isfinite(f) || !gf.allFinite()) g[i].setConstant(std::nan(""));
            else g[i] = mult_[i] * gf;
        }
    }, 256);
    for (std::size_t t = 0; t < term_vertex_.size(); ++t) {
        const double inv = 1.0 / static_cast<double>(term_begin_[t + 1] - term_begin_[t]);
        Vec3 mean(0, 0, 0);
        for (auto k = term_begin_[t]; k < term_begin_[t + 1]; ++k) mean += p[neighbors_[k]];
        const Vec3 r = p[term_vertex_[t]] - mean * inv;
        const Vec3 d = 2.0 * lambda_ * r;
        g[term_vertex_[t]] += d;
        for (auto k = term_begin_[t]; k < term_begin_[t + 1]; ++k) g[neighbors_[k]] -= d * inv;
    }
    return g;
}

LabeledMesh refine(const LabeledMesh& mesh, const ScalarField& field, const RefineConfig& cfg, RefineReport* report) {
    cfg.validate();
    RefineReport rep;
    LabeledMesh out = mesh;
    auto mean_udf = [&](const std::vector<Vec3>& p) {
        if (p.empty()) return 0.0;
        double s = 0.0;
        for (const auto& x : p) s += field.eval(x);
        return s / static_cast<double>(p.size());
    };
    rep.group_nonmanifold_edges = group_nonmanifold_edges(mesh);
    rep.mean_udf_before = mean_udf(out.vertices);

    if (!out.vertices.empty()) {
        const RefineObjective obj(mesh, field, cfg.lambda1, cfg.gradient_h, cfg.naive_laplacian);
        std::vector<Vec3>& p = out.vertices;
        double current = obj.loss(p);
        rep.loss_trace.push_back(current);
        std::vector<Vec3> trial(p.size());
        for (int it = 0; it < cfg.iterations; ++it) {
            auto g = obj.gradient(p);
            for (auto& gi : g) {
                if (!gi.allFinite()) {
                    gi.setZero();
                    ++rep.frozen_vertices;
                }
            }
            double step = cfg.step;
            bool accepted = false;
            for (int h = 0; h <= cfg.max_halvings; ++h, step *= 0.5) {
                for (std::size_t i = 0; i < p.size(); ++i) trial[i] = p[i] - step * g[i];
                const double l = obj.loss(trial);
                if (l <= current) {
                    p.swap(trial);
                    current = l;
                    accepted = true;
                    break;
                }
            }
            rep.loss_trace.push_back(current);
            if (!accepted) {
                ++rep.rejected;
                break;
            }
            ++rep.accepted;
        }
    }
    rep.mean_udf_after = mean_udf(out.vertices);
    if (report) *report = std::move(rep);
    return out;
}

}  // namespace udfmi
