#include "udfmi/extraction.hpp"

#include <algorithm>
#include <unordered_map>

namespace udfmi {

namespace {

enum KeyType : std::uint64_t { kEdgeKey = 0, kFaceKey = 1, kCubeKey = 2, kLoopKey = 3 };

std::uint64_t make_key(KeyType t, std::uint64_t id) { return (static_cast<std::uint64_t>(t) << 60) | id; }

struct Point {
    std::uint64_t key;
    Vec3 pos;
};

struct Segment {
    Point a, b;
    LabelPair pair;
    Vec3 ref;  // direction from the smaller label toward the larger one
};

struct CubeEdge {
    bool cut = false;
    Point p;
    LabelPair pair{0, 0};
    Vec3 ref{0, 0, 0};
};

class MeshBuilder {
public:
    LabeledMesh mesh;

    std::uint32_t vertex(const Point& p) {
        auto [it, inserted] = ids_.try_emplace(p.key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(p.pos);
        return it->second;
    }

    void triangle(const Point& a, const Point& b, const Point& c, LabelPair pair, const Vec3& ref) {
        if (pair[0] == 0) return;
        const Vec3 n = (b.pos - a.pos).cross(c.pos - a.pos);
        const bool flip = n.dot(ref) < 0.0;
        Face f{vertex(a), flip ? vertex(c) : vertex(b), flip ? vertex(b) : vertex(c)};
        mesh.faces.push_back(f);
        mesh.face_labels.push_back(pair);
    }

private:
    std::unordered_map<std::uint64_t, std::uint32_t> ids_;
};

Vec3 average(const std::vector<Point>& pts) {
    Vec3 s(0, 0, 0);
    for (const auto& p : pts) s += p.pos;
    return s / static_cast<double>(pts.size());
}

}  // namespace

LabeledMesh multi_label_mc(const LabelField& lf, const SignField& sf) {
    if (!(lf.spec == sf.spec)) throw Error(ErrorCode::InvalidSpec, "extraction", "label and sign fields use different grids");
    const GridSpec& spec = lf.spec;
    const int nx = spec.dims[0], ny = spec.dims[1], nz = spec.dims[2];
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = sy * static_cast<std::size_t>(ny);
    const std::size_t stride[3] = {1, sy, sz};

    auto edge_point = [&](std::size_t v0, int axis, CubeEdge& e) {
        const std::size_t v1 = v0 + stride[axis];
        const Vec3 p0 = spec.center(v0);
        const Vec3 p1 = spec.center(v1);
        const auto l0 = lf.label[v0];
        const auto l1 = lf.label[v1];
        double t = 0.5;
        const bool signed0 = sf.in_omega1(v0) && !sf.empty_neighborhood(v0);
        const bool signed1 = sf.in_omega1(v1) && !sf.empty_neighborhood(v1);
        if (signed0 && signed1) {
            const double w0 = sf.w[v0];
            const double w1 = sf.w[v1];
            if ((w0 < 0.0 && w1 > 0.0) || (w0 > 0.0 && w1 < 0.0)) t = std::clamp(w0 / (w0 - w1), 0.1, 0.9);
        }
        e.cut = true;
        e.p = {make_key(kEdgeKey, v0 * 3 + static_cast<std::size_t>(axis)), p0 + t * (p1 - p0)};
        e.pair = make_pair_label(l0, l1);
        e.ref = l1 > l0 ? Vec3(p1 - p0) : Vec3(p0 - p1);
    };

    MeshBuilder out;
    std::uint32_t corner_label[8];
    std::size_t corner_voxel[8];
    CubeEdge edges[8][3];  // [lower corner][axis]
    std::vector<Segment> segments;
    std::vector<Point> face_cut;
    std::vector<Point> cube_cut;
    std::vector<char> used;
    std::vector<Point> loop;

    for (int k = 0; k + 1 < nz; ++k) {
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i + 1 < nx; ++i) {
                const std::size_t base = spec.index(i, j, k);
                bool uniform = true;
                for (int c = 0; c < 8; ++c) {
                    corner_voxel[c] = base + (c & 1) * stride[0] + ((c >> 1) & 1) * stride[1] + ((c >> 2) & 1) * stride[2];
                    corner_label[c] = lf.label[corner_voxel[c]];
                    uniform = uniform && corner_label[c] == corner_label[0];
                }
                if (uniform) continue;

                std::uint32_t distinct[8];
                int n_distinct = 0;
                bool has_background = false;
                for (int c = 0; c < 8; ++c) {
                    if (std::find(distinct, distinct + n_distinct, corner_label[c]) == distinct + n_distinct) {
                        distinct[n_distinct++] = corner_label[c];
                    }
                    has_background = has_background || corner_label[c] == 0;
                }
                if (n_distinct == 2 && has_background) continue;

                cube_cut.clear();
                for (int c = 0; c < 8; ++c) {
                    for (int a = 0; a < 3; ++a) {
                        edges[c][a].cut = false;
                        if (c & (1 << a)) continue;
                        if (corner_label[c] == corner_label[c | (1 << a)]) continue;
                        edge_point(corner_voxel[c], a, edges[c][a]);
                        cube_cut.push_back(edges[c][a].p);
                    }
                }

                segments.clear();
                for (int a = 0; a < 3; ++a) {
                    const int u = (a + 1) % 3;
                    const int v = (a + 2) % 3;
                    for (int s = 0; s < 2; ++s) {
                        const int fc[4] = {s << a, (s << a) | (1 << u), (s << a) | (1 << u) | (1 << v), (s << a) | (1 << v)};
                        const CubeEdge* fe[4];
                        std::uint32_t fl[4];
                        for (int q = 0; q < 4; ++q) {
                            const int c0 = fc[q];
                            const int c1 = fc[(q + 1) % 4];
                            const int diff = c0 ^ c1;
                            const int axis = diff == 1 ? 0 : (diff == 2 ? 1 : 2);
                            fe[q] = &edges[std::min(c0, c1)][axis];
                            fl[q] = corner_label[c0];
                        }
                        std::uint32_t fd[4];
                        int n_fd = 0;
                        for (int q = 0; q < 4; ++q) {
                            if (std::find(fd, fd + n_fd, fl[q]) == fd + n_fd) fd[n_fd++] = fl[q];
                        }
                        if (n_fd == 1) continue;
                        if (n_fd == 2) {
                            int cut[4];
                            int n_cut = 0;
                            for (int q = 0; q < 4; ++q) {
                                if (fe[q]->cut) cut[n_cut++] = q;
                            }
                            if (n_cut == 2) {
                                const CubeEdge& e0 = *fe[cut[0]];
                                const CubeEdge& e1 = *fe[cut[1]];
                                segments.push_back({e0.p, e1.p, e0.pair, e0.ref + e1.ref});
                            } else {
                                // Checkerboard face: cut off each corner of the smaller label.
                                const std::uint32_t m = std::min(fd[0], fd[1]);
                                const int first = fl[0] == m ? 0 : 1;
                                for (int q = first; q < 4; q += 2) {
                                    const CubeEdge& e0 = *fe[(q + 3) % 4];
                                    const CubeEdge& e1 = *fe[q];
                                    segments.push_back({e0.p, e1.p, e0.pair, e0.ref + e1.ref});
                                }
                            }
                            continue;
                        }
                        face_cut.clear();
                        for (int q = 0; q < 4; ++q) {
                            if (fe[q]->cut) face_cut.push_back(fe[q]->p);
                        }
                        const std::size_t face_voxel = corner_voxel[fc[0]];
                        const Point center{make_key(kFaceKey, face_voxel * 3 + static_cast<std::size_t>(a)), average(face_cut)};
                        for (int q = 0; q < 4; ++q) {
                            if (fe[q]->cut) segments.push_back({fe[q]->p, center, fe[q]->pair, fe[q]->ref});
                        }
                    }
                }

                if (n_distinct >= 3) {
                    const Point center{make_key(kCubeKey, base), average(cube_cut)};
                    for (const auto& sg : segments) out.triangle(sg.a, sg.b, center, sg.pair, sg.ref);
                    continue;
                }

                // Two labels: every cut-edge vertex has exactly two segments, so
                // the segments form closed loops.
                used.assign(segments.size(), 0);
                int loop_index = 0;
                for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
                    if (used[s0]) continue;
                    used[s0] = 1;
                    loop.assign({segments[s0].a, segments[s0].b});
                    Vec3 ref = segments[s0].ref;
                    const LabelPair pair = segments[s0].pair;
                    for (;;) {
                        const std::uint64_t tail = loop.back().key;
                        std::size_t s = 0;
                        while (s < segments.size() && (used[s] || (segments[s].a.key != tail && segments[s].b.key != tail))) ++s;
                        if (s == segments.size()) break;
                        used[s] = 1;
                        ref += segments[s].ref;
                        const Point& nxt = segments[s].a.key == tail ? segments[s].b : segments[s].a;
                        if (nxt.key == loop.front().key) break;
                        loop.push_back(nxt);
                    }
                    if (loop.size() == 3) {
                        out.triangle(loop[0], loop[1], loop[2], pair, ref);
                    } else if (loop.size() == 4) {
                        const double d02 = (loop[0].pos - loop[2].pos).squaredNorm();
                        const double d13 = (loop[1].pos - loop[3].pos).squaredNorm();
                        if (d02 <= d13) {
                            out.triangle(loop[0], loop[1], loop[2], pair, ref);
                            out.triangle(loop[0], loop[2], loop[3], pair, ref);
                        } else {
                            out.triangle(loop[1], loop[2], loop[3], pair, ref);
                            out.triangle(loop[1], loop[3], loop[0], pair, ref);
                        }
                    } else if (loop.size() >= 5) {
                        const Point c{make_key(kLoopKey, base * 8 + static_cast<std::size_t>(loop_index)), average(loop)};
                        for (std::size_t q = 0; q < loop.size(); ++q) {
                            out.triangle(loop[q], loop[(q + 1) % loop.size()], c, pair, ref);
                        }
                    }
                    ++loop_index;
                }
            }
        }
    }
    return std::move(out.mesh);
}

LabeledMesh trim_outside(const LabeledMesh& mesh, const ScalarField& field, double r2, TrimReport* report) {
    if (!(r2 > 0.0)) throw Error(ErrorCode::Config, "extraction", "trim radius must be positive");
    mesh.validate();
    std::vector<double> dist(mesh.vertices.size());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = field.eval(mesh.vertices[i]);

    std::vector<char> alive(mesh.faces.size(), 1);
    std::size_t removed = 0;
    std::size_t rounds = 0;
    for (;;) {
        ++rounds;
        std::size_t changed = 0;
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            if (!alive[f]) continue;
            const auto& t = mesh.faces[f];
            if (dist[t[0]] > r2 && dist[t[1]] > r2 && dist[t[2]] > r2) {
                alive[f] = 0;
                ++changed;
            }
        }
        std::unordered_map<std::uint64_t, std::uint32_t> incidence;
        auto edge_key = [](std::uint32_t a, std::uint32_t b) {
            const auto e = make_edge(a, b);
            return (static_cast<std::uint64_t>(e.first) << 32) | e.second;
        };
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            if (!alive[f]) continue;
            const auto& t = mesh.faces[f];
            for (int e = 0; e < 3; ++e) ++incidence[edge_key(t[e], t[(e + 1) % 3])];
        }
        const double half = 0.5 * r2;
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            if (!alive[f]) continue;
            const auto& t = mesh.faces[f];
            if (!(dist[t[0]] > half && dist[t[1]] > half && dist[t[2]] > half)) continue;
            int boundary = 0;
            for (int e = 0; e < 3; ++e) boundary += incidence[edge_key(t[e], t[(e + 1) % 3])] == 1;
            if (boundary >= 2) {
                alive[f] = 0;
                ++changed;
            }
        }
        removed += changed;
        if (changed == 0) break;
    }

    LabeledMesh out;
    out.vertices = mesh.vertices;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (!alive[f]) continue;
        out.faces.push_back(mesh.faces[f]);
        out.face_labels.push_back(mesh.face_labels[f]);
    }
    out.drop_unreferenced_vertices();
    if (report) {
        report->removed_faces = removed;
        report->rounds = rounds;
        report->empty = out.empty();
    }
    return out;
}

}  // namespace udfmi
