#include <doctest.h>

#include "support.hpp"

#include "udfmi/maxflow.hpp"

#include <deque>
#include <random>

using namespace udfmi;
using namespace udfmi::testing;

namespace {

SignField shell_field(int res) {
    // sign of |p| - 0.4 inside the 0.05 shell, as a perfect orientation would give
    SignField sf{GridSpec(res)};
    for (std::size_t v = 0; v < sf.w.size(); ++v) {
        const double r = sf.spec.center(v).norm();
        if (std::abs(r - 0.4) < 0.05) {
            sf.flags[v] = kOmega1 | (std::abs(r - 0.4) < 0.02 ? kOmega2 : 0);
            sf.w[v] = r - 0.4;
        }
    }
    return sf;
}

LabelField block(const Vec3i& dims, const Vec3i& lo, const Vec3i& hi, std::uint32_t label = 1) {
    LabelField lf(GridSpec(dims, Box{}));
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) lf.label[lf.spec.index(i, j, k)] = label;
    lf.count = label;
    return lf;
}

std::size_t count(const Mask& m) {
    std::size_t n = 0;
    for (auto b : m.data) n += b != 0;
    return n;
}

// Edmonds-Karp on a dense capacity matrix; node 0 source, node 1 sink.
std::int64_t edmonds_karp(std::vector<std::vector<std::int64_t>> cap) {
    const std::size_t n = cap.size();
    std::int64_t flow = 0;
    for (;;) {
        std::vector<int> parent(n, -1);
        parent[0] = 0;
        std::deque<int> q{0};
        while (!q.empty() && parent[1] < 0) {
            const int u = q.front();
            q.pop_front();
            for (std::size_t v = 0; v < n; ++v) {
                if (parent[v] < 0 && cap[u][v] > 0) {
                    parent[v] = u;
                    q.push_back(static_cast<int>(v));
                }
            }
        }
        if (parent[1] < 0) return flow;
        std::int64_t add = std::numeric_limits<std::int64_t>::max();
        for (int v = 1; v != 0; v = parent[v]) add = std::min(add, cap[parent[v]][v]);
        for (int v = 1; v != 0; v = parent[v]) {
            cap[parent[v]][v] -= add;
            cap[v][parent[v]] += add;
        }
        flow += add;
    }
}

}  // namespace

TEST_CASE("max-flow agrees with Edmonds-Karp") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 300; ++t) {
        const int n = 2 + static_cast<int>(rng() % 12);
        MaxFlowGraph g;
        g.add_nodes(n);
        std::vector<std::vector<std::int64_t>> cap(n + 2, std::vector<std::int64_t>(n + 2, 0));
        for (int i = 0; i < n; ++i) {
            const std::int64_t s = rng() % 3 ? static_cast<std::int64_t>(rng() % 10) : 0;
            const std::int64_t k = rng() % 3 ? static_cast<std::int64_t>(rng() % 10) : 0;
            g.add_tweights(i, s, k);
            cap[0][i + 2] += s;
            cap[i + 2][1] += k;
        }
        const int edges = static_cast<int>(rng() % (2 * n + 1));
        for (int e = 0; e < edges; ++e) {
            const int i = static_cast<int>(rng() % n), j = static_cast<int>(rng() % n);
            if (i == j) continue;
            const std::int64_t a = rng() % 8, b = rng() % 8;
            g.add_edge(i, j, a, b);
            cap[i + 2][j + 2] += a;
            cap[j + 2][i + 2] += b;
        }
        const std::int64_t f = g.maxflow();
        CHECK(f == edmonds_karp(cap));
        // the reported cut has exactly the flow value
        std::int64_t cut = 0;
        auto side = [&](int v) { return v == 0 ? 0 : v == 1 ? 1 : (g.what_segment(v - 2) == MaxFlowGraph::Segment::Source ? 0 : 1); };
        for (int u = 0; u < n + 2; ++u)
            for (int v = 0; v < n + 2; ++v)
                if (side(u) == 0 && side(v) == 1) cut += cap[u][v];
        CHECK(cut == f);
    }
}

TEST_CASE("connected components") {
    SUBCASE("sphere shell splits into inside and outside") {
        const SignField sf = shell_field(32);
        const LabelField lf = connected_components(sf);
        CHECK(lf.count == 2);
        CHECK(same_partition(lf.label, oracle_components(sf)));
    }
    SUBCASE("disk slab splits into above and below") {
        SignField sf(GridSpec(32));
        const Mask m = envelope_mask(make_fixture("plane-disk"), sf.spec, 0.05);
        for (std::size_t v = 0; v < sf.w.size(); ++v) {
            if (!m[v]) continue;
            sf.flags[v] = kOmega1;
            sf.w[v] = sf.spec.center(v).z();
        }
        const LabelField lf = connected_components(sf);
        CHECK(lf.count == 2);
        CHECK(same_partition(lf.label, oracle_components(sf)));
    }
    SUBCASE("all background") {
        const SignField sf(GridSpec(8));
        const LabelField lf = connected_components(sf);
        CHECK(lf.count == 0);
        for (auto l : lf.label) CHECK(l == 0);
    }
    SUBCASE("labels follow scan order") {
        const SignField sf = shell_field(24);
        const LabelField lf = connected_components(sf);
        std::uint32_t next = 1;
        for (auto l : lf.label) {
            if (l == 0) continue;
            CHECK(l <= next);
            if (l == next) ++next;
        }
    }
    SUBCASE("random grids against flood fill") {
        std::mt19937_64 rng(32);
        std::uniform_real_distribution<double> u(0, 1);
        for (int t = 0; t < 100; ++t) {
            const int n = 4 + static_cast<int>(rng() % 13);
            SignField sf(GridSpec(Vec3i{n, 16 - static_cast<int>(rng() % 8), n}, Box{}));
            for (std::size_t v = 0; v < sf.w.size(); ++v) {
                if (u(rng) < 0.7) sf.flags[v] = kOmega1;
                if (u(rng) < 0.1) sf.flags[v] |= kEmptyNeighborhood;
                else sf.w[v] = u(rng) - 0.5;
            }
            CHECK(same_partition(connected_components(sf).label, oracle_components(sf)));
        }
    }
}

TEST_CASE("erosion") {
    SUBCASE("5x5x5 block keeps its center after two rounds") {
        const LabelField lf = block({9, 9, 9}, {2, 2, 2}, {6, 6, 6});
        const Erosion e = erode(lf, 2);
        REQUIRE(count(e.remnant) == 1);
        CHECK(e.remnant.at(4, 4, 4) == 1);
        const LabelField tight = block({5, 5, 5}, {0, 0, 0}, {4, 4, 4});
        const Erosion t = erode(tight, 2);
        REQUIRE(count(t.remnant) == 1);
        CHECK(t.remnant.at(2, 2, 2) == 1);
        CHECK(count(t.eroded) == 124);
    }
    SUBCASE("a one-voxel tube between two blobs disappears") {
        LabelField lf(GridSpec(Vec3i{21, 9, 9}, Box{}));
        auto set = [&](int i0, int i1, int j0, int j1, int k0, int k1) {
            for (int k = k0; k <= k1; ++k)
                for (int j = j0; j <= j1; ++j)
                    for (int i = i0; i <= i1; ++i) lf.label[lf.spec.index(i, j, k)] = 1;
        };
        set(1, 7, 1, 7, 1, 7);
        set(13, 19, 1, 7, 1, 7);
        set(8, 12, 4, 4, 4, 4);
        lf.count = 1;
        const Erosion e = erode(lf, 2);
        for (int i = 8; i <= 12; ++i) CHECK(e.remnant.at(i, 4, 4) == 0);
        const SeedLabels s = split_remnants(lf, e.remnant);
        CHECK(s.by_partition[1].size() == 2);
    }
    SUBCASE("a thin partition has no remnant") {
        const LabelField lf = block({12, 12, 12}, {2, 2, 5}, {9, 9, 7});
        const Erosion e = erode(lf, 2);
        CHECK(count(e.remnant) == 0);
        const SeedLabels s = split_remnants(lf, e.remnant);
        CHECK(s.by_partition[1].empty());
    }
    SUBCASE("forced voxels are always eroded") {
        const LabelField lf = block({9, 9, 9}, {1, 1, 1}, {7, 7, 7});
        Mask force(lf.spec, 0);
        force.at(4, 4, 4) = 1;
        const Erosion e = erode(lf, 2, &force);
        CHECK(count(e.remnant) == 26);
        CHECK(e.eroded.at(4, 4, 4) == 1);
    }
}

TEST_CASE("relabel energy matches the definition") {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 200; ++t) {
        const RelabelProblem p = random_relabel_problem(rng, 2 + static_cast<std::uint32_t>(rng() % 3), 10);
        std::vector<std::uint32_t> f(p.role.size(), 0);
        for (std::size_t v = 0; v < f.size(); ++v) {
            if (p.role[v] == RelabelProblem::kSeed) f[v] = p.seed_label[v];
            else if (p.role[v] == RelabelProblem::kFree) f[v] = 1 + static_cast<std::uint32_t>(rng() % p.label_count);
        }
        CHECK(relabel_energy(p, f) == oracle_energy(p, f));
    }
}

TEST_CASE("alpha-expansion") {
    SUBCASE("free strip between equal seeds") {
        RelabelProblem p;
        p.spec = GridSpec(Vec3i{1, 5, 1}, Box{});
        p.role = {RelabelProblem::kSeed, RelabelProblem::kFree, RelabelProblem::kFree, RelabelProblem::kFree, RelabelProblem::kSeed};
        p.seed_label = {2, 0, 0, 0, 2};
        p.origin = {0, 1, 1, 1, 0};
        p.allowed = {{}, {}};
        p.label_count = 2;
        const auto r = alpha_expansion(p);
        for (auto l : r.labels.label) CHECK(l == 2);
        CHECK(r.energy_trace.back() == 0);
    }
    SUBCASE("two labels are solved exactly") {
        std::mt19937_64 rng(34);
        for (int t = 0; t < 60; ++t) {
            const RelabelProblem p = random_relabel_problem(rng, 2, 12);
            CHECK(oracle_energy(p, alpha_expansion(p).labels.label) == brute_force_optimum(p));
        }
    }
    SUBCASE("three labels stay within twice the optimum") {
        std::mt19937_64 rng(35);
        for (int t = 0; t < 60; ++t) {
            const RelabelProblem p = random_relabel_problem(rng, 3, 8);
            const auto r = alpha_expansion(p);
            const auto e = oracle_energy(p, r.labels.label);
            const auto opt = brute_force_optimum(p);
            CHECK(opt <= e);
            CHECK(e <= 2 * opt);
        }
    }
    SUBCASE("seeds are kept and energy never rises") {
        std::mt19937_64 rng(36);
        for (int t = 0; t < 60; ++t) {
            const RelabelProblem p = random_relabel_problem(rng, 4, 20);
            const auto r = alpha_expansion(p);
            for (std::size_t v = 0; v < p.role.size(); ++v) {
                if (p.role[v] == RelabelProblem::kSeed) CHECK(r.labels.label[v] == p.seed_label[v]);
                if (p.role[v] == RelabelProblem::kFree) CHECK(r.labels.label[v] >= 1);
                if (p.role[v] == RelabelProblem::kOutside) CHECK(r.labels.label[v] == 0);
            }
            for (std::size_t i = 1; i < r.energy_trace.size(); ++i) CHECK(r.energy_trace[i] <= r.energy_trace[i - 1]);
            CHECK(r.energy_trace.back() == oracle_energy(p, r.labels.label));
        }
    }
    SUBCASE("free voxels without any seed") {
        RelabelProblem p;
        p.spec = GridSpec(Vec3i{3, 1, 1}, Box{});
        p.role = {RelabelProblem::kFree, RelabelProblem::kFree, RelabelProblem::kFree};
        p.seed_label.assign(3, 0);
        p.origin.assign(3, 1);
        p.allowed = {{}, {}};
        p.label_count = 0;
        try {
            alpha_expansion(p);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyResult);
        }
    }
    SUBCASE("unreachable free voxels are counted") {
        RelabelProblem p;
        p.spec = GridSpec(Vec3i{5, 1, 1}, Box{});
        p.role = {RelabelProblem::kSeed, RelabelProblem::kFree, RelabelProblem::kOutside, RelabelProblem::kFree, RelabelProblem::kFree};
        p.seed_label = {1, 0, 0, 0, 0};
        p.origin = {0, 1, 0, 1, 1};
        p.allowed = {{}, {1}};
        p.label_count = 1;
        const auto r = alpha_expansion(p);
        CHECK(r.unreachable == 2);
        for (std::size_t v : {0u, 1u, 3u, 4u}) CHECK(r.labels.label[v] == 1);
    }
}

TEST_CASE("partition merging") {
    // three slabs along x: the 1|2 interface sits outside omega2, the 2|3
    // interface inside it
    const GridSpec spec(Vec3i{12, 6, 6}, Box{});
    LabelField lf(spec);
    Mask o2(spec, 0);
    for (int k = 0; k < 6; ++k)
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 12; ++i) {
                lf.label[spec.index(i, j, k)] = i < 4 ? 1 : i < 8 ? 2 : 3;
                if (i == 7 || i == 8) o2.at(i, j, k) = 1;
            }
    lf.count = 3;

    const auto counts = boundary_counts(lf, o2);
    REQUIRE(counts.size() == 2);
    CHECK(counts[0].a == 1);
    CHECK(counts[0].b == 2);
    CHECK(counts[0].inside == 0);
    CHECK(counts[0].outside == 36);
    CHECK(counts[1].inside == 36);
    CHECK(counts[1].outside == 0);

    const MergeResult m = merge_partitions(lf, o2, 3.0);
    CHECK(m.merges == 1);
    CHECK(m.labels.count == 2);
    CHECK(m.labels.label[spec.index(0, 0, 0)] == m.labels.label[spec.index(5, 0, 0)]);
    CHECK(m.labels.label[spec.index(5, 0, 0)] != m.labels.label[spec.index(9, 0, 0)]);

    SUBCASE("single label is unchanged") {
        const LabelField one = block({6, 6, 6}, {0, 0, 0}, {5, 5, 5});
        const MergeResult r = merge_partitions(one, Mask(one.spec, 0));
        CHECK(r.merges == 0);
        CHECK(r.labels.label == one.label);
    }
    SUBCASE("merge rule reaches a fixed point") {
        std::mt19937_64 rng(37);
        for (int t = 0; t < 30; ++t) {
            LabelField r(GridSpec(Vec3i{8, 8, 8}, Box{}));
            Mask om(r.spec, 0);
            for (std::size_t v = 0; v < r.label.size(); ++v) {
                // blocky random labels so adjacent pairs have long interfaces
                const auto c = r.spec.coords(v);
                r.label[v] = 1 + static_cast<std::uint32_t>((c[0] / 3 * 7 + c[1] / 4 * 3 + c[2] / 3 + t) % 5);
                om[v] = rng() % 3 == 0;
            }
            r.count = 5;
            const MergeResult mr = merge_partitions(r, om, 3.0);
            for (const auto& pb : boundary_counts(mr.labels, om)) CHECK(pb.outside <= 3.0 * pb.inside);
        }
    }
}

TEST_CASE("labeling stages on the sphere shell") {
    const SignField sf = shell_field(128);
    const LabelingResult r = build_label_field(sf);
    CHECK(r.report.components == 2);
    CHECK(r.report.partitions == 2);
    CHECK(r.report.lost_partitions == 0);
    for (std::size_t v = 0; v < sf.w.size(); ++v) CHECK((r.labels.label[v] != 0) == sf.in_omega1(v));
}
