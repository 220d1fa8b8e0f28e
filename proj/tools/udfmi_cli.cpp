// udfmi command line: extract, eval, gen-fixture.

#include "udfmi/io.hpp"
#include "udfmi/parallel.hpp"
#include "udfmi/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

using namespace udfmi;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;
constexpr int kExitEmpty = 4;

int exit_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::Config:
        return kExitConfig;
    case ErrorCode::EmptyResult:
        return kExitEmpty;
    case ErrorCode::Io:
    case ErrorCode::Stage:
        return kExitStage;
    }
    return kExitStage;
}

json topology_json(const TopologyReport& t) {
    return {{"vertices", t.vertices},
            {"faces", t.faces},
            {"edges", t.edges},
            {"boundary_edges", t.boundary_edges},
            {"manifold_edges", t.manifold_edges},
            {"nonmanifold_edges", t.nonmanifold_edges},
            {"components", t.components},
            {"euler_characteristic", t.euler_characteristic},
            {"label_count", t.label_count}};
}

json run_json(const PipelineResult& r) {
    json timings = json::object();
    for (const auto& t : r.timings) timings[t.stage] = t.ms;
    const auto& l = r.labeling;
    return {{"topology_report", topology_json(r.topology)},
            {"timings_ms", timings},
            {"runtime_ms", r.total_ms()},
            {"band_samples", r.band_samples},
            {"cloud_points", r.cloud_points},
            {"projection_skipped", r.projection_skipped},
            {"normal_components", r.normals.components},
            {"omega1_voxels", r.sign_stats.omega1_voxels},
            {"empty_neighborhood_voxels", r.sign_stats.empty_voxels},
            {"labeling",
             {{"components", l.components},
              {"seeds", l.seeds},
              {"lost_partitions", l.lost_partitions},
              {"lost_voxels", l.lost_voxels},
              {"unreachable_voxels", l.unreachable_voxels},
              {"sweep_energy", l.sweep_energy},
              {"merges", l.merges},
              {"partitions", l.partitions}}},
            {"trim_removed_faces", r.trim.removed_faces},
            {"refine",
             {{"accepted", r.refine.accepted},
              {"rejected", r.refine.rejected},
              {"loss_first", r.refine.loss_trace.empty() ? 0.0 : r.refine.loss_trace.front()},
              {"loss_last", r.refine.loss_trace.empty() ? 0.0 : r.refine.loss_trace.back()},
              {"mean_udf_before", r.refine.mean_udf_before},
              {"mean_udf_after", r.refine.mean_udf_after}}},
            {"warnings", r.warnings},
            {"flags", r.flags}};
}

void write_mesh(const std::string& path, const LabeledMesh& mesh) {
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos && path.substr(dot) == ".ply") write_ply(path, mesh);
    else write_obj(path, mesh);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "io", "cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UDF to labeled non-manifold mesh"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

    PipelineConfig cfg;
    std::string input, output, dump_labels, dump_signfield, report_path;
    bool no_refine = false;
    auto* extract = app.add_subcommand("extract", "Run the full pipeline and write a mesh");
    extract->add_option("--input", input, "udfg file, fixture:NAME, or .xyz/.xyzn/.ply cloud")->required();
    extract->add_option("--output", output, "Output mesh (.obj or .ply)")->required();
    extract->add_option("--dump-labels", dump_labels, "Write the final label grid (LBLF)");
    extract->add_option("--dump-signfield", dump_signfield, "Write the sign field (SGNF)");
    extract->add_option("--report", report_path, "Write run statistics as JSON");
    extract->add_flag("--no-refine", no_refine, "Skip refinement");
    extract->add_option("--resolution", cfg.resolution, "Voxels per axis")->capture_default_str();
    extract->add_option("--r1", cfg.r1, "Outer envelope radius")->capture_default_str();
    extract->add_option("--r2", cfg.r2, "Inner envelope radius")->capture_default_str();
    extract->add_option("--samples", cfg.sample_count, "Band samples")->capture_default_str();
    extract->add_option("--downsample-voxel", cfg.downsample_voxel, "Point cloud downsampling cell")->capture_default_str();
    extract->add_option("--erosion-iters", cfg.erosion_iters, "Erosion rounds")->capture_default_str();
    extract->add_option("--merge-ratio", cfg.merge_ratio, "Partition merge ratio")->capture_default_str();
    extract->add_option("--wl-radius", cfg.wl_radius, "Sign-field ball radius (0 = r1)")->capture_default_str();
    extract->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    extract->add_option("--lambda1", cfg.refine.lambda1, "Laplacian weight")->capture_default_str();
    extract->add_option("--refine-iters", cfg.refine.iterations, "Refinement iterations")->capture_default_str();
    extract->add_option("--refine-step", cfg.refine.step, "Refinement step")->capture_default_str();

    std::string mesh_path, ref, csv_path;
    std::size_t eval_samples = 100000;
    std::uint64_t eval_seed = 0;
    auto* eval = app.add_subcommand("eval", "Chamfer distance and topology of a mesh");
    eval->add_option("--mesh", mesh_path, "Mesh to evaluate (.obj)")->required();
    eval->add_option("--ref", ref, "Reference mesh (.obj) or fixture:NAME")->required();
    eval->add_option("--report", report_path, "JSON report path")->required();
    eval->add_option("--csv", csv_path, "Append a CSV row to this file");
    eval->add_option("--samples", eval_samples, "Surface samples per side")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Sampling seed")->capture_default_str();

    std::string fixture_name, fixture_out;
    int fixture_res = 128;
    auto* gen = app.add_subcommand("gen-fixture", "Write a sampled analytic fixture as UDFG");
    gen->add_option("name", fixture_name, "Fixture name")->required();
    gen->add_option("--resolution", fixture_res, "Voxels per axis")->capture_default_str();
    gen->add_option("--out", fixture_out, "Output .udfg")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    set_thread_limit(threads);

    try {
        if (*extract) {
            cfg.do_refine = !no_refine;
            cfg.validate();
            const LoadedSource src = load_source(parse_source(input), cfg);
            const PipelineResult r = run_pipeline(src, cfg);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            write_mesh(output, r.mesh);
            if (!dump_labels.empty()) write_lblf(dump_labels, r.labels);
            if (!dump_signfield.empty()) write_sgnf(dump_signfield, r.sign_field);
            const json j = run_json(r);
            if (!report_path.empty()) write_text(report_path, j.dump(2) + "\n");
            std::cout << "partitions " << r.labeling.partitions << ", faces " << r.mesh.faces.size() << ", boundary "
                      << r.topology.boundary_edges << ", non-manifold " << r.topology.nonmanifold_edges << ", chi "
                      << r.topology.euler_characteristic << ", " << static_cast<long long>(r.total_ms()) << " ms\n";
            for (const auto& f : r.flags) std::cout << "flag: " << f << "\n";
        } else if (*eval) {
            const auto t0 = std::chrono::steady_clock::now();
            const LabeledMesh mesh = read_obj(mesh_path);
            const auto a = area_weighted_sample(mesh, eval_samples, eval_seed);
            std::vector<Vec3> b;
            if (ref.rfind("fixture:", 0) == 0) {
                const AnalyticField f = make_fixture(ref.substr(8));
                b = f.sample_surface(eval_samples, eval_seed + 1);
            } else {
                b = area_weighted_sample(read_obj(ref), eval_samples, eval_seed + 1);
            }
            const double cd = chamfer_l2(a, b);
            const TopologyReport topo = topology_report(mesh);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            const json j = {{"chamfer", cd}, {"topology_report", topology_json(topo)}, {"runtime_ms", ms}};
            write_text(report_path, j.dump(2) + "\n");
            if (!csv_path.empty()) {
                std::ofstream csv(csv_path, std::ios::app);
                if (!csv) throw Error(ErrorCode::Io, "io", "cannot write " + csv_path);
                if (csv.tellp() == 0) csv << "mesh,ref,chamfer,boundary_edges,nonmanifold_edges,components,euler,labels,runtime_ms\n";
                csv << mesh_path << "," << ref << "," << cd << "," << topo.boundary_edges << "," << topo.nonmanifold_edges << ","
                    << topo.components << "," << topo.euler_characteristic << "," << topo.label_count << "," << ms << "\n";
            }
            std::cout << "chamfer " << cd << "\n";
        } else if (*gen) {
            gen_fixture(fixture_name, fixture_res, fixture_out);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "] " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error " << e.what() << "\n";
        return kExitStage;
    }
    return kExitOk;
}
