#include "mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace ov {

Vec3 Mesh::face_normal(size_t tri) const {
    const auto& t = triangles[tri];
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    return normalized(cross(b - a, c - b));
}

double Mesh::face_area(size_t tri) const {
    const auto& t = triangles[tri];
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    return 0.5 * norm(cross(b - a, c - a));
}

void Mesh::bounds(Vec3& lo, Vec3& hi) const {
    lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
    hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};
    for (const Vec3& v : vertices) {
        lo = min(lo, v);
        hi = max(hi, v);
    }
}

namespace {

const char* skip_ws(const char* p, const char* end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    return p;
}

bool parse_double(const char*& p, const char* end, double& out) {
    p = skip_ws(p, end);
    auto [ptr, ec] = std::from_chars(p, end, out);
    if (ec != std::errc()) return false;
    p = ptr;
    return true;
}

// Face corner: leading integer of an `i`, `i/j`, `i/j/k` or `i//k` token.
bool parse_face_index(const char*& p, const char* end, long long& out) {
    p = skip_ws(p, end);
    auto [ptr, ec] = std::from_chars(p, end, out);
    if (ec != std::errc()) return false;
    p = ptr;
    while (p < end && *p != ' ' && *p != '\t' && *p != '\r') ++p;  // skip /vt/vn
    return true;
}

bool zero_area(const Mesh& m, const std::array<uint32_t, 3>& t) {
    Vec3 c = cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
    return c.x == 0.0 && c.y == 0.0 && c.z == 0.0;
}

void format_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, ptr);
}

}  // namespace

Mesh load_obj(const std::string& path, ObjLoadStats* stats) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open '" + path + "' for reading");

    Mesh mesh;
    ObjLoadStats local;
    std::string line;
    size_t line_no = 0;
    std::vector<long long> face;

    while (std::getline(in, line)) {
        ++line_no;
        const char* p = line.data();
        const char* end = p + line.size();
        p = skip_ws(p, end);
        if (p >= end || *p == '#') continue;

        if (*p == 'v' && (p + 1 == end || p[1] == ' ' || p[1] == '\t')) {
            ++p;
            Vec3 v;
            if (!parse_double(p, end, v.x) || !parse_double(p, end, v.y) ||
                !parse_double(p, end, v.z)) {
                raise(Errc::parse,
                      path + ":" + std::to_string(line_no) + ": malformed vertex record");
            }
            mesh.vertices.push_back(v);
        } else if (*p == 'f' && (p + 1 == end || p[1] == ' ' || p[1] == '\t')) {
            ++p;
            face.clear();
            long long idx = 0;
            while (true) {
                const char* before = p;
                if (!parse_face_index(p, end, idx)) {
                    p = skip_ws(before, end);
                    if (p < end && *p != '#') {
                        raise(Errc::parse,
                              path + ":" + std::to_string(line_no) + ": malformed face record");
                    }
                    break;
                }
                if (idx <= 0) {
                    raise(Errc::parse, path + ":" + std::to_string(line_no) +
                                           ": negative or zero face index not supported");
                }
                if (static_cast<size_t>(idx) > mesh.vertices.size()) {
                    raise(Errc::parse, path + ":" + std::to_string(line_no) +
                                           ": face index " + std::to_string(idx) +
                                           " out of range");
                }
                face.push_back(idx - 1);
            }
            if (face.size() < 3) {
                raise(Errc::parse,
                      path + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
            }
            // fan triangulation (v0, vi, vi+1)
            for (size_t i = 1; i + 1 < face.size(); ++i) {
                std::array<uint32_t, 3> t = {static_cast<uint32_t>(face[0]),
                                             static_cast<uint32_t>(face[i]),
                                             static_cast<uint32_t>(face[i + 1])};
                if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || zero_area(mesh, t)) {
                    ++local.degenerate_dropped;
                    continue;
                }
                mesh.triangles.push_back(t);
            }
        }
        // other record types (vn, vt, o, g, s, usemtl, mtllib, ...) are skipped
    }
    if (stats != nullptr) *stats = local;
    return mesh;
}

void save_obj(const Mesh& mesh, const std::string& path) {
    std::string out;
    out.reserve(mesh.vertices.size() * 32 + mesh.triangles.size() * 24);
    for (const Vec3& v : mesh.vertices) {
        out += "v ";
        format_double(out, v.x);
        out += ' ';
        format_double(out, v.y);
        out += ' ';
        format_double(out, v.z);
        out += '\n';
    }
    for (const auto& t : mesh.triangles) {
        out += "f ";
        out += std::to_string(t[0] + 1);
        out += ' ';
        out += std::to_string(t[1] + 1);
        out += ' ';
        out += std::to_string(t[2] + 1);
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) raise(Errc::io, "cannot open '" + path + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) raise(Errc::io, "write failed for '" + path + "'");
}

SimilarityTransform unit_cube_transform(const Mesh& mesh, double margin) {
    if (mesh.vertices.empty()) raise(Errc::empty_mesh, "cannot normalize an empty mesh");
    if (margin < 0.0 || margin >= 0.5) {
        raise(Errc::invalid_argument, "margin must lie in [0, 0.5)");
    }
    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    Vec3 extent = hi - lo;
    double max_extent = std::max(extent.x, std::max(extent.y, extent.z));
    SimilarityTransform t;
    t.scale = max_extent > 0.0 ? (1.0 - 2.0 * margin) / max_extent : 1.0;
    Vec3 center = (lo + hi) * 0.5;
    t.offset = Vec3{0.5, 0.5, 0.5} - center * t.scale;
    return t;
}

Mesh normalize_to_unit_cube(const Mesh& mesh, double margin) {
    SimilarityTransform t = unit_cube_transform(mesh, margin);
    Mesh out;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) out.vertices.push_back(t.apply(v));
    out.triangles = mesh.triangles;
    return out;
}

std::vector<SurfaceSample> sample_surface(const Mesh& mesh, size_t count, uint64_t seed) {
    if (count == 0) return {};
    if (mesh.empty()) raise(Errc::empty_mesh, "cannot sample an empty mesh");

    std::vector<double> cumulative(mesh.triangles.size());
    double total = 0.0;
    for (size_t i = 0; i < mesh.triangles.size(); ++i) {
        total += mesh.face_area(i);
        cumulative[i] = total;
    }
    if (total <= 0.0) raise(Errc::empty_mesh, "mesh has zero total surface area");

    std::vector<SurfaceSample> samples(count);
    Xoshiro256ss rng(seed);
    for (size_t s = 0; s < count; ++s) {
        double pick = rng.next_double() * total;
        size_t tri = static_cast<size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        if (tri >= cumulative.size()) tri = cumulative.size() - 1;

        // winding-invariant corner order for the position
        std::array<uint32_t, 3> c = mesh.triangles[tri];
        std::sort(c.begin(), c.end());
        const Vec3& a = mesh.vertices[c[0]];
        const Vec3& b = mesh.vertices[c[1]];
        const Vec3& d = mesh.vertices[c[2]];

        double r1 = std::sqrt(rng.next_double());
        double r2 = rng.next_double();
        Vec3 p = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + d * (r1 * r2);

        samples[s].position = p;
        samples[s].normal = mesh.face_normal(tri);
        samples[s].triangle_id = static_cast<uint32_t>(tri);
    }
    return samples;
}

}  // namespace ov
