#pragma once

#include <array>
#include <cstdint>

#include "grid.hpp"
#include "mesh.hpp"

namespace ov {

// AxisHardcoded reproduces the plain dual-grid reconstruction: every quad
// keeps the default order tied to its edge's coordinate axis, so face
// orientation cannot follow the surface. Directed consults the stored
// crossing-direction bit and flips the quad when the default normal
// contradicts it.
enum class WindingMode { Directed, AxisHardcoded };

// World-space dual vertices of the quad for the axis edge owned by `owner`,
// in the default order (normal along +axis for planar quads). Throws
// Errc::invalid_grid when a sharing voxel has no record.
std::array<Vec3, 4> quad_for_edge(const FdgdGrid& grid, const Vec3i& owner, int axis);

// Directed mode with direction=false reorders [v0,v1,v2,v3] to [v0,v3,v2,v1],
// reversing the quad normal; all other cases are the identity.
template <typename T>
std::array<T, 4> apply_winding(const std::array<T, 4>& quad, bool direction, WindingMode mode) {
    if (mode == WindingMode::AxisHardcoded || direction) return quad;
    return {quad[0], quad[3], quad[2], quad[1]};
}

// Splits along (v0,v2) when split[0]+split[2] >= split[1]+split[3] (scalars
// in post-winding order), else along (v1,v3). Both triangles keep the quad's
// winding orientation.
std::array<std::array<int, 3>, 2> split_quad(const std::array<double, 4>& split);

struct DecodeStats {
    uint64_t quads = 0;
    uint64_t degenerate_dropped = 0;  // exactly zero-area triangles after the split
};

// Grid -> mesh: one vertex per active voxel (ascending linear order), two
// triangles per intersected edge. Vertex positions and triangle adjacency do
// not depend on the winding mode; only the index order inside each triangle
// does.
Mesh decode_grid(const FdgdGrid& grid, WindingMode mode, DecodeStats* stats = nullptr);

}  // namespace ov
