#pragma once

#include <cstdint>
#include <vector>

#include "mesh.hpp"
#include "vec3.hpp"

namespace ov {

// Bounding volume hierarchy over the triangles of a mesh. Immutable after
// construction; all queries are reentrant and results match a brute-force
// scan over all triangles exactly (hit sets) / to machine precision
// (distances). The mesh must outlive the Bvh.
class Bvh {
public:
    explicit Bvh(const Mesh& mesh);

    struct Hit {
        double t = 0.0;
        uint32_t triangle = 0;
        Vec3 normal;  // face normal from winding, never flipped toward the ray
    };

    struct ClosestPoint {
        double distance = 0.0;
        uint32_t triangle = 0;
        Vec3 point;
    };

    // All intersections with 0 <= t <= t_max, ascending by t. Hits that
    // coincide on a shared edge or vertex are reported once (lowest triangle
    // id wins). The barycentric acceptance bound is 1e-9.
    std::vector<Hit> ray_all_hits(const Ray& ray) const;

    // Exact point-to-triangle minimum over the whole mesh; ties broken by
    // lowest triangle id.
    ClosestPoint closest_point(const Vec3& p) const;

    const Mesh& mesh() const { return *mesh_; }

private:
    struct Node {
        Vec3 lo, hi;
        uint32_t left = 0;   // child index, or first triangle for leaves
        uint32_t count = 0;  // 0 for inner nodes, triangle count for leaves
        uint32_t right = 0;
    };

    const Mesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> order_;       // triangle ids, leaf-contiguous
    std::vector<Vec3> face_normals_;    // cached unit normals per triangle

    uint32_t build(std::vector<uint32_t>& tris, size_t begin, size_t end);
};

// Stand-alone primitives shared with the brute-force test oracles.
bool ray_triangle_intersect(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                            const Vec3& c, double& t_out);
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace ov
