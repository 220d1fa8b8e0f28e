#include "udfmi/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace udfmi {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& s, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(s, v);
}

void put_f64(std::string& s, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(s, v);
}

class Reader {
public:
    Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() {
        const std::uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
    double f64() {
        const std::uint64_t v = u64();
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw Error(ErrorCode::Io, "io", "truncated file: " + path_);
    }
    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "io", "cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::Io, "io", "write failed: " + path);
}

std::string header(const char* magic, const GridSpec& spec) {
    std::string s(magic, 4);
    put_u32(s, 1);
    for (int a = 0; a < 3; ++a) put_u32(s, static_cast<std::uint32_t>(spec.dims[a]));
    for (int a = 0; a < 3; ++a) put_f64(s, spec.bbox.min[a]);
    for (int a = 0; a < 3; ++a) put_f64(s, spec.bbox.max[a]);
    return s;
}

GridSpec read_header(Reader& r, const char* magic, const std::string& path) {
    if (r.bytes(4) != std::string(magic, 4)) throw Error(ErrorCode::Io, "io", path + ": expected " + std::string(magic, 4) + " file");
    if (r.u32() != 1) throw Error(ErrorCode::Io, "io", path + ": unsupported version");
    GridSpec spec;
    for (int a = 0; a < 3; ++a) spec.dims[a] = static_cast<int>(r.u32());
    for (int a = 0; a < 3; ++a) spec.bbox.min[a] = r.f64();
    for (int a = 0; a < 3; ++a) spec.bbox.max[a] = r.f64();
    spec.validate();
    return spec;
}

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

void append_fmt(std::string& s, const char* fmt, double a, double b, double c) {
    char buf[128];
    const int n = std::snprintf(buf, sizeof buf, fmt, a, b, c);
    s.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

void write_udfg(const std::string& path, const Grid<double>& grid) {
    std::string s = header("UDFG", grid.spec);
    s.reserve(s.size() + 4 * grid.size());
    for (double v : grid.data) put_f32(s, static_cast<float>(v));
    write_file(path, s);
}

Grid<double> read_udfg(const std::string& path) {
    Reader r(read_file(path), path);
    Grid<double> g(read_header(r, "UDFG", path));
    for (auto& v : g.data) v = r.f32();
    return g;
}

void write_sgnf(const std::string& path, const SignField& sf) {
    std::string s = header("SGNF", sf.spec);
    s.reserve(s.size() + 5 * sf.w.size());
    for (double v : sf.w) put_f32(s, static_cast<float>(v));
    for (auto f : sf.flags) s.push_back(static_cast<char>(f));
    write_file(path, s);
}

SignField read_sgnf(const std::string& path) {
    Reader r(read_file(path), path);
    SignField sf(read_header(r, "SGNF", path));
    for (auto& v : sf.w) v = r.f32();
    for (auto& f : sf.flags) f = r.u8();
    return sf;
}

void write_lblf(const std::string& path, const LabelField& lf) {
    std::string s = header("LBLF", lf.spec);
    s.reserve(s.size() + 4 * lf.label.size());
    for (auto l : lf.label) put_u32(s, l);
    write_file(path, s);
}

LabelField read_lblf(const std::string& path) {
    Reader r(read_file(path), path);
    LabelField lf(read_header(r, "LBLF", path));
    for (auto& l : lf.label) {
        l = r.u32();
        lf.count = std::max(lf.count, l);
    }
    return lf;
}

std::string obj_string(const LabeledMesh& mesh) {
    mesh.validate();
    std::string s;
    s.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 24);
    for (const auto& v : mesh.vertices) append_fmt(s, "v %.10g %.10g %.10g\n", v.x(), v.y(), v.z());
    std::map<LabelPair, std::vector<std::size_t>> groups;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) groups[mesh.face_labels[f]].push_back(f);
    char buf[96];
    for (const auto& [pair, faces] : groups) {
        const int n = std::snprintf(buf, sizeof buf, "g mat_%u_%u\n", pair[0], pair[1]);
        s.append(buf, static_cast<std::size_t>(n));
        for (auto f : faces) {
            const auto& t = mesh.faces[f];
            const int m = std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
            s.append(buf, static_cast<std::size_t>(m));
        }
    }
    return s;
}

void write_obj(const std::string& path, const LabeledMesh& mesh) { write_file(path, obj_string(mesh)); }

LabeledMesh read_obj(const std::string& path) {
    std::istringstream in(read_file(path));
    LabeledMesh mesh;
    LabelPair current{0, 0};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) throw Error(ErrorCode::Io, "io", path + ": bad vertex on line " + std::to_string(line_no));
            mesh.vertices.push_back(p);
        } else if (tag == "g" || tag == "o") {
            std::string name;
            ls >> name;
            unsigned a = 0, b = 0;
            if (std::sscanf(name.c_str(), "mat_%u_%u", &a, &b) == 2) current = make_pair_label(a, b);
            else current = {0, 0};
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) {
                const long v = std::stol(tok.substr(0, tok.find('/')));
                const long n = static_cast<long>(mesh.vertices.size());
                const long i = v < 0 ? n + v : v - 1;
                if (i < 0 || i >= n) throw Error(ErrorCode::Io, "io", path + ": face index out of range on line " + std::to_string(line_no));
                idx.push_back(static_cast<std::uint32_t>(i));
            }
            if (idx.size() < 3) throw Error(ErrorCode::Io, "io", path + ": face with fewer than 3 vertices on line " + std::to_string(line_no));
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
                mesh.face_labels.push_back(current);
            }
        }
    }
    return mesh;
}

void write_ply(const std::string& path, const LabeledMesh& mesh) {
    mesh.validate();
    std::ostringstream h;
    h << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\nproperty double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.faces.size() << "\nproperty list uchar uint vertex_indices\n"
      << "property uint label_a\nproperty uint label_b\nend_header\n";
    std::string s = h.str();
    for (const auto& v : mesh.vertices) {
        for (int a = 0; a < 3; ++a) put_f64(s, v[a]);
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        s.push_back(3);
        for (auto i : mesh.faces[f]) put_u32(s, i);
        put_u32(s, mesh.face_labels[f][0]);
        put_u32(s, mesh.face_labels[f][1]);
    }
    write_file(path, s);
}

namespace {

PointFile read_ply_points(const std::string& path) {
    const std::string data = read_file(path);
    const auto end = data.find("end_header\n");
    if (data.compare(0, 3, "ply") != 0 || end == std::string::npos) throw Error(ErrorCode::Io, "io", path + ": not a PLY file");
    std::istringstream hs(data.substr(0, end));
    std::string line, format;
    std::size_t count = 0;
    bool in_vertex = false, seen_vertex = false;
    std::vector<std::pair<std::string, std::string>> props;  // (type, name)
    while (std::getline(hs, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            ls >> format;
        } else if (tag == "element") {
            std::string name;
            ls >> name;
            if (name == "vertex") {
                if (seen_vertex) throw Error(ErrorCode::Io, "io", path + ": duplicate vertex element");
                ls >> count;
                in_vertex = seen_vertex = true;
            } else {
                if (!seen_vertex) throw Error(ErrorCode::Io, "io", path + ": vertex element must come first");
                in_vertex = false;
            }
        } else if (tag == "property" && in_vertex) {
            std::string type, name;
            ls >> type >> name;
            if (type == "list") throw Error(ErrorCode::Io, "io", path + ": list property on vertices");
            props.emplace_back(type, name);
        }
    }
    std::map<std::string, int> column;
    for (std::size_t i = 0; i < props.size(); ++i) column[props[i].second] = static_cast<int>(i);
    for (const char* c : {"x", "y", "z"}) {
        if (!column.count(c)) throw Error(ErrorCode::Io, "io", path + ": missing vertex coordinate");
    }
    const bool has_normals = column.count("nx") && column.count("ny") && column.count("nz");

    PointFile out;
    out.points.resize(count);
    if (has_normals) out.normals.resize(count);
    std::vector<double> row(props.size());
    auto store = [&](std::size_t i) {
        out.points[i] = {row[column["x"]], row[column["y"]], row[column["z"]]};
        if (has_normals) out.normals[i] = {row[column["nx"]], row[column["ny"]], row[column["nz"]]};
    };
    if (format == "ascii") {
        std::istringstream body(data.substr(end + 11));
        for (std::size_t i = 0; i < count; ++i) {
            for (auto& v : row) {
                if (!(body >> v)) throw Error(ErrorCode::Io, "io", path + ": truncated vertex data");
            }
            store(i);
        }
    } else if (format == "binary_little_endian") {
        Reader r(data.substr(end + 11), path);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t c = 0; c < props.size(); ++c) {
                const std::string& t = props[c].first;
                if (t == "float" || t == "float32") row[c] = r.f32();
                else if (t == "double" || t == "float64") row[c] = r.f64();
                else if (t == "uchar" || t == "uint8" || t == "char" || t == "int8") row[c] = r.u8();
                else if (t == "int" || t == "int32") row[c] = static_cast<std::int32_t>(r.u32());
                else if (t == "uint" || t == "uint32") row[c] = r.u32();
                else if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") {
                    const std::uint32_t lo = r.u8();
                    const std::uint32_t hi = r.u8();
                    const auto u = static_cast<std::uint16_t>(lo | (hi << 8));
                    row[c] = (t == "short" || t == "int16") ? static_cast<double>(static_cast<std::int16_t>(u)) : u;
                } else {
                    throw Error(ErrorCode::Io, "io", path + ": unsupported property type " + t);
                }
            }
            store(i);
        }
    } else {
        throw Error(ErrorCode::Io, "io", path + ": unsupported PLY format " + format);
    }
    return out;
}

}  // namespace

PointFile read_points(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "ply") return read_ply_points(path);
    if (ext != "xyz" && ext != "xyzn") throw Error(ErrorCode::Io, "io", path + ": unknown point cloud extension");
    std::istringstream in(read_file(path));
    PointFile out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double v[6];
        int n = 0;
        while (n < 6 && ls >> v[n]) ++n;
        if (n == 0) continue;
        const int want = ext == "xyzn" ? 6 : 3;
        if (n < want) throw Error(ErrorCode::Io, "io", path + ": expected " + std::to_string(want) + " values on line " + std::to_string(line_no));
        out.points.emplace_back(v[0], v[1], v[2]);
        if (ext == "xyzn") out.normals.emplace_back(v[3], v[4], v[5]);
    }
    return out;
}

void write_xyzn(const std::string& path, const std::vector<Vec3>& points, const std::vector<Vec3>& normals) {
    std::string s;
    for (std::size_t i = 0; i < points.size(); ++i) {
        append_fmt(s, "%.10g %.10g %.10g", points[i].x(), points[i].y(), points[i].z());
        if (i < normals.size()) append_fmt(s, " %.10g %.10g %.10g", normals[i].x(), normals[i].y(), normals[i].z());
        s.push_back('\n');
    }
    write_file(path, s);
}

}  // namespace udfmi
