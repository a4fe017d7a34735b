#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bvh.hpp"
#include "grid.hpp"
#include "mesh.hpp"
#include "vec3.hpp"

namespace ov {

// How crossing-direction bits are derived. ExactRay reads the face normal at
// the edge's true intersection point; VoxelNormal uses the averaged normal of
// all surfaces crossing the owning voxel, which degrades on thin folds where
// opposing sheets cancel.
enum class DirectionMode { ExactRay, VoxelNormal };

struct QefParams {
    double lambda_bound = 1.0;  // open-boundary alignment weight
    double lambda_reg = 0.05;   // centroid regularizer; > 0 keeps the system SPD
};

// One (intersection point, face normal) pair collected where a grid edge
// crosses the mesh. Points are in world (grid) coordinates.
struct HermiteSample {
    Vec3 point;
    Vec3 normal;
};

struct EdgeHit {
    double t = 0.0;
    uint32_t triangle = 0;
    Vec3 normal;
};

// One intersected grid edge: owning corner (= owning voxel index), axis, and
// its crossings sorted ascending by t. The minimal-t hit is the edge's
// representative crossing for both Hermite data and the direction bit.
struct IntersectedEdge {
    Vec3i owner;
    int axis = 0;
    std::vector<EdgeHit> hits;
};

// Scans the grid edges of the [0,1]^3 lattice at resolution N against the
// mesh held by the BVH, treating each edge as a short ray. Entries are
// ordered by (linear owner index, axis). A hit landing exactly on a shared
// grid corner is attributed to the lexicographically smallest edge incident
// to that corner. Throws Errc::normalization when a crossing occurs on an
// edge whose quad would need out-of-grid voxels (mesh not inside
// [1/N, 1-1/N]^3).
std::vector<IntersectedEdge> enumerate_intersected_edges(const Bvh& bvh, uint32_t resolution);

// Hermite samples of one voxel: the first crossing of each of its 12 edges
// that is intersected. `edges` may contain edges of other voxels; they are
// filtered by the (owner, axis) pairs from voxel_edges().
std::vector<HermiteSample> collect_hermite(const Vec3i& voxel, uint32_t resolution,
                                           std::span<const IntersectedEdge> edges);

// Minimizes
//   sum_i (n_i . (v - q_i))^2  +  lambda_bound * sum_j dist(v, line_j)^2
//   +  lambda_reg * |v - centroid|^2
// over the voxel box: 3x3 normal equations, falling back to an exact
// active-subset search when the unconstrained minimizer leaves the box. All
// inputs are voxel-local. Empty sample sets fall back to the voxel center
// (corner-only active voxels). `clamped` reports the constrained case.
Vec3 solve_qef(std::span<const Vec3> points, std::span<const Vec3> normals,
               std::span<const std::pair<Vec3, Vec3>> boundary_segments, const Vec3& centroid,
               const QefParams& params, bool* clamped = nullptr);

// Direction bit from the minimal-t crossing: true iff the face normal there
// has positive dot with the +axis direction; an exactly tangential hit
// resolves to true.
bool derive_direction_exact(std::span<const EdgeHit> hits_sorted, int axis);

// Direction bit from the owning voxel's averaged normal; a zero average
// falls back to true.
bool derive_direction_voxel_normal(const Vec3& voxel_average_normal, int axis);

struct EncodeStats {
    uint64_t intersected_edges = 0;
    uint64_t active_voxels = 0;
    uint64_t hermite_samples = 0;
    uint64_t clamped_dual_vertices = 0;
};

// Full mesh -> grid conversion. The mesh must already be normalized into
// [margin, 1-margin]^3 with margin >= 1/resolution. Intersect flags and dual
// vertices depend only on geometry; the direction mode affects nothing but
// the direction bits.
FdgdGrid encode_mesh(const Mesh& mesh, uint32_t resolution, DirectionMode mode,
                     const QefParams& params, EncodeStats* stats = nullptr);

}  // namespace ov
