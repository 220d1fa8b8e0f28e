#include "udfmi/labeling.hpp"

#include "udfmi/maxflow.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>

namespace udfmi {

int sign_class(const SignField& sf, std::size_t v) {
    if (sf.empty_neighborhood(v)) return 0;
    return sf.w[v] >= 0.0 ? 1 : -1;
}

Mask omega2_mask(const SignField& sf) {
    Mask m(sf.spec, 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = sf.in_omega2(i) ? 1 : 0;
    return m;
}

LabelField connected_components(const SignField& sf) {
    LabelField lf(sf.spec);
    std::vector<std::size_t> queue;
    for (std::size_t seed = 0; seed < lf.label.size(); ++seed) {
        if (!sf.in_omega1(seed) || lf.label[seed] != 0) continue;
        const std::uint32_t id = ++lf.count;
        const int cls = sign_class(sf, seed);
        lf.label[seed] = id;
        queue.assign(1, seed);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for_each_face_neighbor(sf.spec, queue[head], [&](std::size_t n) {
                if (lf.label[n] == 0 && sf.in_omega1(n) && sign_class(sf, n) == cls) {
                    lf.label[n] = id;
                    queue.push_back(n);
                }
            });
        }
    }
    return lf;
}

Erosion erode(const LabelField& lf, int iterations, const Mask* force_free) {
    if (iterations < 1) throw Error(ErrorCode::Config, "labeling", "erosion needs at least one iteration");
    const GridSpec& spec = lf.spec;
    Mask peeled(spec, 0);
    std::vector<std::size_t> marked;
    for (int it = 0; it < iterations; ++it) {
        marked.clear();
        for (std::size_t v = 0; v < lf.label.size(); ++v) {
            const auto l = lf.label[v];
            if (l == 0 || peeled[v]) continue;
            bool touch = face_neighbor_count(spec, v) < 6;
            if (!touch) {
                for_each_face_neighbor(spec, v, [&](std::size_t n) {
                    if (lf.label[n] != l || peeled[n]) touch = true;
                });
            }
            if (touch) marked.push_back(v);
        }
        for (auto v : marked) peeled[v] = 1;
    }
    Erosion out{Mask(spec, 0), Mask(spec, 0)};
    for (std::size_t v = 0; v < lf.label.size(); ++v) {
        if (lf.label[v] == 0) continue;
        const bool free = peeled[v] || (force_free && (*force_free)[v]);
        (free ? out.eroded : out.remnant)[v] = 1;
    }
    return out;
}

SeedLabels split_remnants(const LabelField& partitions, const Mask& remnant) {
    SeedLabels out{LabelField(partitions.spec), std::vector<std::vector<std::uint32_t>>(partitions.count + 1)};
    std::vector<std::size_t> queue;
    for (std::size_t s = 0; s < remnant.size(); ++s) {
        if (!remnant[s] || out.seeds.label[s] != 0) continue;
        const std::uint32_t id = ++out.seeds.count;
        const auto origin = partitions.label[s];
        out.by_partition[origin].push_back(id);
        out.seeds.label[s] = id;
        queue.assign(1, s);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for_each_face_neighbor(partitions.spec, queue[head], [&](std::size_t n) {
                if (remnant[n] && out.seeds.label[n] == 0 && partitions.label[n] == origin) {
                    out.seeds.label[n] = id;
                    queue.push_back(n);
                }
            });
        }
    }
    return out;
}

bool RelabelProblem::is_allowed(std::size_t v, std::uint32_t l) const {
    const auto& set = allowed[origin[v]];
    return set.empty() || std::find(set.begin(), set.end(), l) != set.end();
}

void RelabelProblem::validate() const {
    const std::size_t n = spec.voxel_count();
    if (role.size() != n || seed_label.size() != n || origin.size() != n) {
        throw Error(ErrorCode::InvalidSpec, "labeling", "relabel problem arrays do not match the grid");
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (role[v] == kSeed && (seed_label[v] == 0 || seed_label[v] > label_count)) {
            throw Error(ErrorCode::InvalidSpec, "labeling", "seed label out of range");
        }
        if (role[v] == kFree && origin[v] >= allowed.size()) {
            throw Error(ErrorCode::InvalidSpec, "labeling", "free voxel origin out of range");
        }
    }
}

RelabelProblem make_relabel_problem(const LabelField& partitions, const Erosion& erosion, const SeedLabels& seeds) {
    RelabelProblem p;
    p.spec = partitions.spec;
    const std::size_t n = p.spec.voxel_count();
    p.role.assign(n, RelabelProblem::kOutside);
    p.seed_label.assign(n, 0);
    p.origin.assign(n, 0);
    p.allowed = seeds.by_partition;
    p.label_count = seeds.seeds.count;
    for (std::size_t v = 0; v < n; ++v) {
        if (partitions.label[v] == 0) continue;
        if (erosion.remnant[v]) {
            p.role[v] = RelabelProblem::kSeed;
            p.seed_label[v] = seeds.seeds.label[v];
        } else {
            p.role[v] = RelabelProblem::kFree;
            p.origin[v] = partitions.label[v];
        }
    }
    return p;
}

namespace {

// Visits each unordered 6-adjacent pair (v, n) with n in the +x/+y/+z direction.
template <typename Fn>
void for_each_forward_pair(const GridSpec& spec, std::size_t v, Fn&& fn) {
    const auto c = spec.coords(v);
    const std::size_t sy = static_cast<std::size_t>(spec.dims[0]);
    const std::size_t sz = sy * static_cast<std::size_t>(spec.dims[1]);
    if (c[0] + 1 < spec.dims[0]) fn(v + 1);
    if (c[1] + 1 < spec.dims[1]) fn(v + sy);
    if (c[2] + 1 < spec.dims[2]) fn(v + sz);
}

std::int64_t energy_over(const RelabelProblem& p, const std::vector<std::size_t>& active, const std::vector<std::uint32_t>& labels) {
    std::int64_t e = 0;
    for (auto v : active) {
        if (p.role[v] == RelabelProblem::kFree && !p.is_allowed(v, labels[v])) ++e;
        for_each_forward_pair(p.spec, v, [&](std::size_t n) {
            if (p.role[n] != RelabelProblem::kOutside && labels[n] != labels[v]) ++e;
        });
    }
    return e;
}

}  // namespace

std::int64_t relabel_energy(const RelabelProblem& problem, const std::vector<std::uint32_t>& labels) {
    std::vector<std::size_t> active;
    for (std::size_t v = 0; v < problem.role.size(); ++v) {
        if (problem.role[v] != RelabelProblem::kOutside) active.push_back(v);
    }
    return energy_over(problem, active, labels);
}

AlphaExpansionResult alpha_expansion(const RelabelProblem& problem, int max_sweeps) {
    problem.validate();
    const GridSpec& spec = problem.spec;
    const std::size_t n = spec.voxel_count();

    std::vector<std::size_t> active;
    std::vector<std::size_t> free;
    std::vector<int> node_of(n, -1);
    std::vector<std::size_t> seeds;
    for (std::size_t v = 0; v < n; ++v) {
        if (problem.role[v] == RelabelProblem::kOutside) continue;
        active.push_back(v);
        if (problem.role[v] == RelabelProblem::kFree) {
            node_of[v] = static_cast<int>(free.size());
            free.push_back(v);
        } else {
            seeds.push_back(v);
        }
    }
    if (seeds.empty()) {
        if (free.empty()) {
            AlphaExpansionResult r;
            r.labels = LabelField(spec);
            return r;
        }
        throw Error(ErrorCode::EmptyResult, "labeling", "no partition survived erosion (no seed voxels)");
    }

    // Initial labeling: nearest seed through omega1, then through the whole grid
    // for free regions that no seed can reach.
    AlphaExpansionResult result;
    std::vector<std::uint32_t> labels(n, 0);
    {
        std::vector<std::size_t> queue;
        for (auto v : seeds) {
            labels[v] = problem.seed_label[v];
            queue.push_back(v);
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const auto v = queue[head];
            for_each_face_neighbor(spec, v, [&](std::size_t nb) {
                if (problem.role[nb] == RelabelProblem::kFree && labels[nb] == 0) {
                    labels[nb] = labels[v];
                    queue.push_back(nb);
                }
            });
        }
        std::size_t unreached = 0;
        for (auto v : free) unreached += labels[v] == 0;
        if (unreached > 0) {
            result.unreachable = unreached;
            std::vector<std::uint32_t> any(n, 0);
            queue.clear();
            for (auto v : seeds) {
                any[v] = labels[v];
                queue.push_back(v);
            }
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const auto v = queue[head];
                for_each_face_neighbor(spec, v, [&](std::size_t nb) {
                    if (any[nb] == 0) {
                        any[nb] = any[v];
                        queue.push_back(nb);
                    }
                });
            }
            for (auto v : free) {
                if (labels[v] == 0) labels[v] = any[v];
            }
        }
    }

    std::int64_t energy = energy_over(problem, active, labels);
    result.energy_trace.push_back(energy);

    auto d_cost = [&](std::size_t v, std::uint32_t l) -> MaxFlowGraph::Cap { return problem.is_allowed(v, l) ? 0 : 1; };

    std::vector<std::uint32_t> candidate;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool improved = false;
        for (std::uint32_t alpha = 1; alpha <= problem.label_count; ++alpha) {
            // x = 0 (source side): keep the current label; x = 1 (sink side): switch to alpha.
            MaxFlowGraph g(static_cast<int>(free.size()), static_cast<int>(3 * free.size()));
            g.add_nodes(static_cast<int>(free.size()));
            auto add_unary = [&](int i, MaxFlowGraph::Cap e0, MaxFlowGraph::Cap e1) { g.add_tweights(i, e1, e0); };
            for (std::size_t k = 0; k < free.size(); ++k) {
                const auto v = free[k];
                const int i = static_cast<int>(k);
                const auto lv = labels[v];
                MaxFlowGraph::Cap e0 = d_cost(v, lv);
                MaxFlowGraph::Cap e1 = d_cost(v, alpha);
                for_each_face_neighbor(spec, v, [&](std::size_t nb) {
                    if (problem.role[nb] != RelabelProblem::kSeed) return;
                    e0 += lv != labels[nb];
                    e1 += alpha != labels[nb];
                });
                add_unary(i, e0, e1);
                for_each_forward_pair(spec, v, [&](std::size_t nb) {
                    if (problem.role[nb] != RelabelProblem::kFree) return;
                    const int j = node_of[nb];
                    const auto ln = labels[nb];
                    const MaxFlowGraph::Cap A = lv != ln;
                    const MaxFlowGraph::Cap B = lv != alpha;
                    const MaxFlowGraph::Cap C = alpha != ln;
                    const MaxFlowGraph::Cap D = 0;
                    add_unary(i, 0, C - A);
                    add_unary(j, 0, D - C);
                    const MaxFlowGraph::Cap pair = B + C - A - D;
                    if (pair > 0) g.add_edge(i, j, pair, 0);
                });
            }
            g.maxflow();
            candidate = labels;
            bool changed = false;
            for (std::size_t k = 0; k < free.size(); ++k) {
                if (g.what_segment(static_cast<int>(k)) == MaxFlowGraph::Segment::Sink && candidate[free[k]] != alpha) {
                    candidate[free[k]] = alpha;
                    changed = true;
                }
            }
            if (changed) {
                const std::int64_t e = energy_over(problem, active, candidate);
                if (e < energy) {
                    labels.swap(candidate);
                    energy = e;
                    improved = true;
                }
            }
            result.energy_trace.push_back(energy);
        }
        result.sweep_energy.push_back(energy);
        ++result.sweeps;
        if (!improved) break;
    }

    result.labels = LabelField(spec);
    result.labels.label = std::move(labels);
    result.labels.count = problem.label_count;
    return result;
}

std::vector<PairBoundary> boundary_counts(const LabelField& lf, const Mask& omega2) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, PairBoundary> pairs;
    for (std::size_t v = 0; v < lf.label.size(); ++v) {
        const auto a = lf.label[v];
        if (a == 0) continue;
        for_each_forward_pair(lf.spec, v, [&](std::size_t n) {
            const auto b = lf.label[n];
            if (b == 0 || b == a) return;
            const auto key = std::minmax(a, b);
            auto& pb = pairs[{key.first, key.second}];
            pb.a = key.first;
            pb.b = key.second;
            if (omega2[v] && omega2[n]) ++pb.inside;
            else ++pb.outside;
        });
    }
    std::vector<PairBoundary> out;
    out.reserve(pairs.size());
    for (const auto& [k, pb] : pairs) out.push_back(pb);
    return out;
}

MergeResult merge_partitions(const LabelField& lf, const Mask& omega2, double ratio) {
    if (!(ratio > 0.0)) throw Error(ErrorCode::Config, "labeling", "merge ratio must be positive");
    const auto base = boundary_counts(lf, omega2);
    std::uint32_t max_label = 0;
    for (auto l : lf.label) max_label = std::max(max_label, l);
    std::vector<std::uint32_t> parent(max_label + 1);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    MergeResult out;
    for (;;) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, PairBoundary> classes;
        for (const auto& pb : base) {
            const auto ra = find(pb.a);
            const auto rb = find(pb.b);
            if (ra == rb) continue;
            const auto key = std::minmax(ra, rb);
            auto& c = classes[{key.first, key.second}];
            c.a = key.first;
            c.b = key.second;
            c.inside += pb.inside;
            c.outside += pb.outside;
        }
        const PairBoundary* best = nullptr;
        double best_score = -1.0;
        for (const auto& [k, c] : classes) {
            if (!(static_cast<double>(c.outside) > ratio * static_cast<double>(c.inside))) continue;
            const double score = static_cast<double>(c.outside) / static_cast<double>(std::max<std::size_t>(c.inside, 1));
            if (score > best_score) {
                best_score = score;
                best = &c;
            }
        }
        if (!best) break;
        parent[std::max(best->a, best->b)] = std::min(best->a, best->b);
        ++out.merges;
    }

    out.labels = LabelField(lf.spec);
    std::vector<std::uint32_t> compact(max_label + 1, 0);
    for (std::size_t v = 0; v < lf.label.size(); ++v) {
        const auto l = lf.label[v];
        if (l == 0) continue;
        auto& c = compact[find(l)];
        if (c == 0) c = ++out.labels.count;
        out.labels.label[v] = c;
    }
    return out;
}

LabelingResult build_label_field(const SignField& sf, const LabelingConfig& cfg) {
    LabelingResult res;
    auto& rep = res.report;
    res.components = connected_components(sf);
    rep.components = res.components.count;

    Mask force_free(sf.spec, 0);
    std::vector<int> cls(res.components.count + 1, 0);
    std::vector<std::size_t> sizes(res.components.count + 1, 0);
    for (std::size_t v = 0; v < force_free.size(); ++v) {
        const auto l = res.components.label[v];
        if (l == 0) continue;
        cls[l] = sign_class(sf, v);
        ++sizes[l];
        force_free[v] = sf.empty_neighborhood(v) ? 1 : 0;
    }
    for (std::uint32_t l = 1; l <= res.components.count; ++l) rep.signed_components += cls[l] != 0;

    const Erosion er = erode(res.components, cfg.erosion_iters, &force_free);
    const SeedLabels seeds = split_remnants(res.components, er.remnant);
    rep.seeds = seeds.seeds.count;
    for (std::uint32_t l = 1; l <= res.components.count; ++l) {
        if (cls[l] != 0 && seeds.by_partition[l].empty() && sizes[l] >= cfg.lost_min_voxels) {
            ++rep.lost_partitions;
            rep.lost_voxels += sizes[l];
        }
    }

    const RelabelProblem problem = make_relabel_problem(res.components, er, seeds);
    auto ae = alpha_expansion(problem, cfg.max_sweeps);
    rep.unreachable_voxels = ae.unreachable;
    rep.energy_trace = ae.energy_trace;
    rep.sweep_energy = ae.sweep_energy;
    res.expanded = std::move(ae.labels);

    auto merged = merge_partitions(res.expanded, omega2_mask(sf), cfg.merge_ratio);
    rep.merges = merged.merges;
    rep.partitions = merged.labels.count;
    res.labels = std::move(merged.labels);
    return res;
}

}  // namespace udfmi
