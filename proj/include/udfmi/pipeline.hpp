#pragma once

#include "udfmi/extraction.hpp"
#include "udfmi/fields.hpp"
#include "udfmi/labeling.hpp"
#include "udfmi/metrics.hpp"
#include "udfmi/refine.hpp"
#include "udfmi/sampling.hpp"
#include "udfmi/signfield.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace udfmi {

struct PipelineConfig {
    int resolution = 256;
    Box bbox{};
    double r1 = 0.05;
    double r2 = 0.01;
    std::size_t sample_count = 1000000;
    double downsample_voxel = 0.005;
    int erosion_iters = 2;
    double merge_ratio = 3.0;
    RefineConfig refine{};
    std::uint64_t seed = 0;

    bool do_refine = true;
    // Ball radius for the sign-field sum; <= 0 means r1.
    double wl_radius = 0.0;
    double wl_eps = 1e-8;
    int normal_k = 30;
    int projection_steps = 10;
    int max_sweeps = 10;

    double sign_radius() const { return wl_radius > 0.0 ? wl_radius : r1; }
    GridSpec grid() const { return GridSpec(resolution, bbox); }
    /// Throws ErrorCode::Config on invalid values; returns advisory warnings.
    std::vector<std::string> validate() const;
};

struct StageTiming {
    std::string stage;
    double ms = 0.0;
};

struct PipelineResult {
    LabeledMesh mesh;       // final output
    LabeledMesh unrefined;  // after trimming, before refinement
    SignField sign_field;
    LabelField labels;
    TopologyReport topology;

    std::size_t band_samples = 0;
    std::size_t projection_skipped = 0;
    std::size_t cloud_points = 0;
    NormalEstimationStats normals;
    SignFieldStats sign_stats;
    LabelingReport labeling;
    TrimReport trim;
    RefineReport refine;

    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;
    std::vector<std::string> flags;  // machine-readable conditions worth surfacing

    double total_ms() const;
    bool has_flag(const std::string& f) const;
};

/// Where the input comes from: "fixture:NAME", a .udfg grid, or an
/// .xyz/.xyzn/.ply point cloud.
struct Source {
    enum class Kind { Fixture, Grid, Cloud } kind = Kind::Fixture;
    std::string name;  // fixture name or file path
    FixtureParams params;
};

Source parse_source(const std::string& spec);

struct LoadedSource {
    std::unique_ptr<ScalarField> field;
    std::optional<OrientedPointCloud> cloud;  // oriented input cloud, if the source had normals
    std::optional<std::vector<Vec3>> points;  // unoriented input cloud
};

LoadedSource load_source(const Source& src, const PipelineConfig& cfg);

/// field -> band samples -> projection -> downsampling -> normals -> sign field
/// -> labeling -> extraction -> trimming -> refinement -> topology.
/// Errors carry the stage name; an empty mesh after trimming is ErrorCode::EmptyResult.
PipelineResult run_pipeline(const ScalarField& field, const PipelineConfig& cfg);
PipelineResult run_pipeline(const LoadedSource& src, const PipelineConfig& cfg);

/// Samples a named fixture on the grid and writes it as UDFG.
void gen_fixture(const std::string& name, int resolution, const std::string& path, const Box& bbox = {},
                 const FixtureParams& params = {});

}  // namespace udfmi
