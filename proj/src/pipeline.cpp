#include "udfmi/pipeline.hpp"

#include "udfmi/io.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <type_traits>

namespace udfmi {

std::vector<std::string> PipelineConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, "config", msg); };
    if (resolution < 2) fail("resolution must be at least 2");
    if (!((bbox.max - bbox.min).array() > 0.0).all()) fail("bounding box is empty");
    if (!(r1 > 0.0)) fail("r1 must be positive");
    if (!(r2 > 0.0)) fail("r2 must be positive");
    if (!(r2 < r1)) fail("r2 must be smaller than r1");
    if (sample_count == 0) fail("sample_count must be positive");
    if (!(downsample_voxel > 0.0)) fail("downsample_voxel must be positive");
    if (erosion_iters < 1) fail("erosion_iters must be at least 1");
    if (!(merge_ratio > 0.0)) fail("merge_ratio must be positive");
    if (normal_k < 3) fail("normal_k must be at least 3");
    if (projection_steps < 1) fail("projection_steps must be at least 1");
    if (max_sweeps < 1) fail("max_sweeps must be at least 1");
    if (!(wl_eps > 0.0)) fail("wl_eps must be positive");
    refine.validate();

    std::vector<std::string> warnings;
    const double voxel = grid().voxel_size();
    if (downsample_voxel < voxel) {
        std::ostringstream ss;
        ss << "downsample_voxel " << downsample_voxel << " is finer than the grid voxel " << voxel;
        warnings.push_back(ss.str());
    }
    if (sign_radius() < 2.0 * voxel) {
        std::ostringstream ss;
        ss << "sign-field radius " << sign_radius() << " covers fewer than two voxels (" << voxel << ")";
        warnings.push_back(ss.str());
    }
    return warnings;
}

double PipelineResult::total_ms() const {
    double t = 0.0;
    for (const auto& s : timings) t += s.ms;
    return t;
}

bool PipelineResult::has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

Source parse_source(const std::string& spec) {
    Source s;
    const std::string prefix = "fixture:";
    if (spec.rfind(prefix, 0) == 0) {
        s.kind = Source::Kind::Fixture;
        s.name = spec.substr(prefix.size());
        const auto& names = fixture_names();
        if (std::find(names.begin(), names.end(), s.name) == names.end()) {
            throw Error(ErrorCode::Config, "input", "unknown fixture '" + s.name + "'");
        }
        return s;
    }
    s.name = spec;
    const auto dot = spec.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : spec.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == "udfg") s.kind = Source::Kind::Grid;
    else if (ext == "xyz" || ext == "xyzn" || ext == "ply") s.kind = Source::Kind::Cloud;
    else throw Error(ErrorCode::Config, "input", "unrecognized input '" + spec + "'");
    return s;
}

LoadedSource load_source(const Source& src, const PipelineConfig& cfg) {
    LoadedSource out;
    switch (src.kind) {
    case Source::Kind::Fixture: {
        auto f = make_fixture(src.name, src.params);
        out.field = std::make_unique<AnalyticField>(f.primitives(), cfg.bbox);
        break;
    }
    case Source::Kind::Grid:
        out.field = std::make_unique<GridField>(read_udfg(src.name));
        break;
    case Source::Kind::Cloud: {
        PointFile pf = read_points(src.name);
        if (pf.points.empty()) throw Error(ErrorCode::Stage, "input", src.name + " has no points");
        out.field = std::make_unique<PointSetField>(pf.points, cfg.bbox);
        if (!pf.normals.empty()) {
            for (auto& n : pf.normals) {
                const double len = n.norm();
                if (!(len > 0.0)) throw Error(ErrorCode::Io, "input", src.name + " contains a zero normal");
                n /= len;
            }
            out.cloud = OrientedPointCloud{std::move(pf.points), std::move(pf.normals)};
        } else {
            out.points = std::move(pf.points);
        }
        break;
    }
    }
    return out;
}

namespace {

class StageClock {
public:
    explicit StageClock(PipelineResult& r) : r_(r) {}

    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            const auto t1 = std::chrono::steady_clock::now();
            r_.timings.push_back({stage, std::chrono::duration<double, std::milli>(t1 - t0).count()});
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                finish();
            } else {
                auto v = fn();
                finish();
                return v;
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::Stage, stage, e.what());
        }
    }

private:
    PipelineResult& r_;
};

PipelineResult run_impl(const ScalarField& field, const std::optional<OrientedPointCloud>& given_cloud,
                        const std::optional<std::vector<Vec3>>& given_points, const PipelineConfig& cfg) {
    PipelineResult res;
    res.warnings = cfg.validate();
    const GridSpec spec = cfg.grid();
    StageClock clock(res);

    OrientedPointCloud cloud;
    if (given_cloud) {
        cloud = *given_cloud;
    } else {
        std::vector<Vec3> pts;
        if (given_points) {
            pts = *given_points;
        } else {
            pts = clock.run("sampling", [&] { return sample_level_band(field, cfg.r1, cfg.sample_count, cfg.seed); });
            res.band_samples = pts.size();
            res.projection_skipped = clock.run("projection", [&] { return project_points(field, pts, cfg.projection_steps); });
        }
        pts = clock.run("downsample", [&] { return voxel_downsample(pts, cfg.downsample_voxel); });
        if (pts.size() <= static_cast<std::size_t>(cfg.normal_k)) {
            throw Error(ErrorCode::Stage, "normals", "too few points after downsampling for k-NN normals");
        }
        cloud = clock.run("normals", [&] { return estimate_normals(pts, cfg.normal_k, &res.normals); });
    }
    res.cloud_points = cloud.size();
    if (res.projection_skipped > 0) res.flags.push_back("projection_skipped");

    res.sign_field = clock.run("signfield", [&] {
        const Mask omega1 = envelope_mask(field, spec, cfg.r1);
        const Mask omega2 = envelope_mask(field, spec, cfg.r2);
        return local_two_signed_field(cloud, spec, omega1, cfg.sign_radius(), cfg.wl_eps, &omega2, &res.sign_stats);
    });
    if (res.sign_stats.empty_voxels > 0) res.flags.push_back("empty_neighborhoods");

    LabelingConfig lcfg;
    lcfg.erosion_iters = cfg.erosion_iters;
    lcfg.merge_ratio = cfg.merge_ratio;
    lcfg.max_sweeps = cfg.max_sweeps;
    auto labeling = clock.run("labeling", [&] { return build_label_field(res.sign_field, lcfg); });
    res.labeling = labeling.report;
    res.labels = std::move(labeling.labels);
    if (res.labeling.lost_partitions > 0) res.flags.push_back("partition_lost_to_erosion");
    if (res.labeling.unreachable_voxels > 0) res.flags.push_back("unreachable_voxels");

    LabeledMesh mesh = clock.run("extraction", [&] {
        const LabeledMesh raw = multi_label_mc(res.labels, res.sign_field);
        return trim_outside(raw, field, cfg.r2, &res.trim);
    });
    if (mesh.empty()) {
        res.flags.push_back("empty_result");
        throw Error(ErrorCode::EmptyResult, "extraction", "no faces left after trimming");
    }
    res.unrefined = mesh;

    if (cfg.do_refine) {
        mesh = clock.run("refine", [&] { return refine(mesh, field, cfg.refine, &res.refine); });
        if (res.refine.frozen_vertices > 0) res.flags.push_back("frozen_vertices");
        if (res.refine.group_nonmanifold_edges > 0) res.flags.push_back("group_nonmanifold_edges");
    }
    res.mesh = std::move(mesh);
    res.topology = clock.run("metrics", [&] { return topology_report(res.mesh); });
    return res;
}

}  // namespace

PipelineResult run_pipeline(const ScalarField& field, const PipelineConfig& cfg) { return run_impl(field, std::nullopt, std::nullopt, cfg); }

PipelineResult run_pipeline(const LoadedSource& src, const PipelineConfig& cfg) {
    if (!src.field) throw Error(ErrorCode::Config, "input", "source has no field");
    return run_impl(*src.field, src.cloud, src.points, cfg);
}

void gen_fixture(const std::string& name, int resolution, const std::string& path, const Box& bbox, const FixtureParams& params) {
    const AnalyticField f = make_fixture(name, params);
    const GridSpec spec(resolution, bbox);
    spec.validate();
    write_udfg(path, sample_grid(f, spec).values());
}

}  // namespace udfmi
