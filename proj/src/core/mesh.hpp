#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vec3.hpp"

namespace ov {

// Indexed triangle soup. Winding defines face orientation and is the quantity
// this library studies, so normals stored in files are ignored and face
// normals are always recomputed from the index order.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<uint32_t, 3>> triangles;

    bool empty() const { return triangles.empty(); }

    // normalize((b-a) x (c-b)); zero vector for degenerate triangles.
    Vec3 face_normal(size_t tri) const;
    double face_area(size_t tri) const;

    void bounds(Vec3& lo, Vec3& hi) const;
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
    double t_max = 0.0;
};

struct SurfaceSample {
    Vec3 position;
    Vec3 normal;  // face normal of the source triangle
    uint32_t triangle_id = 0;
};

struct ObjLoadStats {
    size_t degenerate_dropped = 0;  // repeated-index or exactly zero-area faces
};

// ASCII Wavefront subset: `v x y z` and `f i j k [l...]` (1-based, fans for
// polygons). Vertex attributes after `/` and unknown record types are skipped.
// Negative indices are rejected. Parse errors carry the line number.
Mesh load_obj(const std::string& path, ObjLoadStats* stats = nullptr);
void save_obj(const Mesh& mesh, const std::string& path);

struct SimilarityTransform {
    double scale = 1.0;
    Vec3 offset;  // applied after scaling: p' = p * scale + offset

    Vec3 apply(const Vec3& p) const { return p * scale + offset; }
    Vec3 invert(const Vec3& p) const { return (p - offset) / scale; }
};

// Uniform scale + translation that centers the bounding box inside
// [margin, 1-margin]^3. Throws on an empty mesh.
SimilarityTransform unit_cube_transform(const Mesh& mesh, double margin);
Mesh normalize_to_unit_cube(const Mesh& mesh, double margin);

// Area-proportional surface sampling, deterministic per seed. Positions are
// generated from the triangle's index-sorted corners so that two meshes with
// equal vertex/triangle sets but different per-face winding produce
// bit-identical positions; normals still follow the actual winding.
std::vector<SurfaceSample> sample_surface(const Mesh& mesh, size_t count, uint64_t seed);

}  // namespace ov
