#include <doctest.h>

#include "udfmi/io.hpp"
#include "udfmi/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace udfmi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("udfmi_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LabeledMesh small_mesh() {
    LabeledMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0, 0.1, 0), Vec3(0, 0, 0.1)};
    m.faces = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}};
    m.face_labels = {{1, 2}, {1, 3}, {2, 3}};
    return m;
}

PipelineConfig quick_config(int resolution) {
    PipelineConfig c;
    c.resolution = resolution;
    return c;
}

}  // namespace

TEST_CASE("udfg layout") {
    TempDir tmp;
    CHECK(kGridHeaderBytes == 68);
    gen_fixture("sphere", 64, tmp.file("a.udfg"));
    CHECK(fs::file_size(tmp.file("a.udfg")) == 64u * 64u * 64u * 4u + 68u);
    CHECK(slurp(tmp.file("a.udfg")).substr(0, 4) == "UDFG");
    gen_fixture("sphere", 64, tmp.file("b.udfg"));
    CHECK(slurp(tmp.file("a.udfg")) == slurp(tmp.file("b.udfg")));

    const Grid<double> g = read_udfg(tmp.file("a.udfg"));
    const AnalyticField s = make_fixture("sphere");
    CHECK(g.spec.dims == Vec3i{64, 64, 64});
    for (std::size_t v = 0; v < g.data.size(); v += 97) CHECK(g.data[v] == doctest::Approx(s.eval(g.spec.center(v))).epsilon(1e-6));

    CHECK_THROWS_AS(gen_fixture("nope", 16, tmp.file("c.udfg")), Error);
    CHECK_THROWS_AS(read_udfg(tmp.file("missing.udfg")), Error);
}

TEST_CASE("grid file round trips") {
    TempDir tmp;
    const GridSpec spec(Vec3i{5, 3, 4}, Box{});
    SignField sf(spec);
    LabelField lf(spec);
    for (std::size_t v = 0; v < spec.voxel_count(); ++v) {
        sf.w[v] = static_cast<double>(static_cast<float>(0.25 * v - 3.0));
        sf.flags[v] = static_cast<std::uint8_t>(v % 4);
        lf.label[v] = static_cast<std::uint32_t>(v % 5);
    }
    lf.count = 4;
    write_sgnf(tmp.file("s.sgnf"), sf);
    write_lblf(tmp.file("l.lblf"), lf);
    const SignField sf2 = read_sgnf(tmp.file("s.sgnf"));
    const LabelField lf2 = read_lblf(tmp.file("l.lblf"));
    CHECK(sf2.w == sf.w);
    CHECK(sf2.flags == sf.flags);
    CHECK(lf2.label == lf.label);
    CHECK(lf2.count == 4);
    CHECK(lf2.spec.dims == spec.dims);
    CHECK_THROWS_AS(read_lblf(tmp.file("s.sgnf")), Error);
}

TEST_CASE("mesh files") {
    TempDir tmp;
    const LabeledMesh m = small_mesh();
    write_obj(tmp.file("m.obj"), m);
    const LabeledMesh back = read_obj(tmp.file("m.obj"));
    REQUIRE(back.faces.size() == 3);
    CHECK(obj_string(back) == obj_string(m));
    CHECK(obj_string(m).find("g mat_1_3") != std::string::npos);

    write_ply(tmp.file("m.ply"), m);
    const std::string ply = slurp(tmp.file("m.ply"));
    CHECK(ply.rfind("ply\nformat binary_little_endian 1.0\n", 0) == 0);
    CHECK(ply.find("element face 3") != std::string::npos);
}

TEST_CASE("point files") {
    TempDir tmp;
    const std::vector<Vec3> pts = {Vec3(0.125, -0.25, 0.5), Vec3(0.0, 0.0, 1.0)};
    const std::vector<Vec3> nrm = {Vec3(0, 0, 1), Vec3(1, 0, 0)};
    write_xyzn(tmp.file("p.xyzn"), pts, nrm);
    const PointFile pf = read_points(tmp.file("p.xyzn"));
    CHECK(pf.points == pts);
    CHECK(pf.normals == nrm);

    {
        std::ofstream out(tmp.file("p.ply"));
        out << "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
               "0.125 -0.25 0.5\n0 0 1\n";
    }
    const PointFile pl = read_points(tmp.file("p.ply"));
    CHECK(pl.points == pts);
    CHECK(pl.normals.empty());
    {
        std::ofstream out(tmp.file("p.xyz"));
        out << "0.125 -0.25 0.5\n0 0 1\n";
    }
    CHECK(read_points(tmp.file("p.xyz")).points == pts);
}

TEST_CASE("configuration") {
    const PipelineConfig c;
    CHECK(c.resolution == 256);
    CHECK(c.r1 == 0.05);
    CHECK(c.r2 == 0.01);
    CHECK(c.sample_count == 1000000);
    CHECK(c.downsample_voxel == 0.005);
    CHECK(c.erosion_iters == 2);
    CHECK(c.merge_ratio == 3.0);
    CHECK(c.refine.lambda1 == 1000.0);
    CHECK(c.refine.iterations == 200);
    CHECK(c.refine.step == 5e-4);
    CHECK(c.sign_radius() == c.r1);
    CHECK(c.validate().empty());

    PipelineConfig bad = c;
    bad.r2 = 0.05;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = c;
    bad.resolution = 0;
    CHECK_THROWS_AS(bad.validate(), Error);

    PipelineConfig coarse = c;
    coarse.resolution = 128;
    CHECK(coarse.validate().size() == 1);  // downsampling finer than the grid is allowed, with a warning
}

TEST_CASE("input sources") {
    CHECK(parse_source("fixture:sphere").kind == Source::Kind::Fixture);
    CHECK(parse_source("fixture:sphere").name == "sphere");
    CHECK(parse_source("a/b.udfg").kind == Source::Kind::Grid);
    CHECK(parse_source("cloud.XYZN").kind == Source::Kind::Cloud);
    CHECK(parse_source("cloud.ply").kind == Source::Kind::Cloud);
    for (const char* bad : {"fixture:nothing", "mesh.stl", "noext"}) {
        try {
            parse_source(bad);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Config);
        }
    }
}

TEST_CASE("fixtures partition as expected at a coarse resolution" * doctest::timeout(600)) {
    const std::pair<const char*, std::uint32_t> cases[] = {
        {"sphere", 2}, {"plane-disk", 2}, {"t-junction", 3}, {"triple-junction", 3}, {"open-box-7", 7}, {"two-parallel-planes", 3}};
    for (const auto& [name, expected] : cases) {
        CAPTURE(name);
        PipelineConfig cfg = quick_config(128);
        cfg.do_refine = false;
        const PipelineResult r = run_pipeline(make_fixture(name), cfg);
        CHECK(r.labeling.partitions == expected);
        CHECK_FALSE(r.mesh.empty());
        for (const auto& l : r.mesh.face_labels) {
            CHECK(l[0] >= 1);
            CHECK(l[1] <= r.labeling.partitions);
        }
    }
}

TEST_CASE("pipeline is deterministic and consistent across input kinds" * doctest::timeout(600)) {
    TempDir tmp;
    const PipelineConfig cfg = quick_config(128);
    const PipelineResult a = run_pipeline(load_source(parse_source("fixture:sphere"), cfg), cfg);
    const PipelineResult b = run_pipeline(load_source(parse_source("fixture:sphere"), cfg), cfg);
    CHECK(obj_string(a.mesh) == obj_string(b.mesh));
    CHECK(a.topology.euler_characteristic == 2);
    CHECK(a.topology.boundary_edges == 0);

    std::vector<std::string> stages;
    for (const auto& t : a.timings) stages.push_back(t.stage);
    CHECK(stages.size() >= 8);

    gen_fixture("sphere", 128, tmp.file("s.udfg"));
    const PipelineResult g = run_pipeline(load_source(parse_source(tmp.file("s.udfg")), cfg), cfg);
    CHECK(g.labeling.partitions == 2);
    CHECK(g.topology.euler_characteristic == 2);
}

TEST_CASE("an unreachable band reports a stage error") {
    PipelineConfig cfg = quick_config(32);
    cfg.r1 = 1e-9;
    cfg.r2 = 5e-10;
    cfg.sample_count = 10;
    try {
        run_pipeline(make_fixture("sphere"), cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Stage);
    }
}
