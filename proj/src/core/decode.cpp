#include "decode.hpp"

#include <algorithm>
#include <unordered_map>

#include "error.hpp"

namespace ov {

std::array<Vec3, 4> quad_for_edge(const FdgdGrid& grid, const Vec3i& owner, int axis) {
    std::array<Vec3, 4> out;
    auto voxels = edge_quad_voxels(owner, axis);
    for (int q = 0; q < 4; ++q) {
        const Vec3i& v = voxels[q];
        int64_t n = grid.resolution();
        if (v.x < 0 || v.y < 0 || v.z < 0 || v.x >= n || v.y >= n || v.z >= n) {
            raise(Errc::invalid_grid, "quad voxel out of grid range");
        }
        const VoxelRecord* rec = grid.find(grid.linear_index(v.x, v.y, v.z));
        if (rec == nullptr) {
            raise(Errc::invalid_grid,
                  "missing record for voxel (" + std::to_string(v.x) + "," + std::to_string(v.y) +
                      "," + std::to_string(v.z) + ")");
        }
        out[q] = grid.world_dual_vertex(*rec);
    }
    return out;
}

std::array<std::array<int, 3>, 2> split_quad(const std::array<double, 4>& split) {
    if (split[0] + split[2] >= split[1] + split[3]) {
        return {{{0, 1, 2}, {0, 2, 3}}};
    }
    return {{{0, 1, 3}, {1, 2, 3}}};
}

Mesh decode_grid(const FdgdGrid& grid, WindingMode mode, DecodeStats* stats) {
    Mesh mesh;
    DecodeStats local;

    const auto& records = grid.records();
    mesh.vertices.reserve(records.size());
    std::unordered_map<uint64_t, uint32_t> vertex_of;
    vertex_of.reserve(records.size() * 2);
    for (const VoxelRecord& r : records) {
        vertex_of.emplace(r.linear, static_cast<uint32_t>(mesh.vertices.size()));
        mesh.vertices.push_back(grid.world_dual_vertex(r));
    }

    auto zero_area = [&mesh](const std::array<uint32_t, 3>& t) {
        Vec3 c = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                       mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        return c.x == 0.0 && c.y == 0.0 && c.z == 0.0;
    };

    for (const VoxelRecord& r : records) {
        Vec3i owner = grid.unpack_index(r.linear);
        for (int axis = 0; axis < 3; ++axis) {
            if (!flag_intersected(r.flags, axis)) continue;
            ++local.quads;

            auto voxels = edge_quad_voxels(owner, axis);
            std::array<uint32_t, 4> ids;
            std::array<double, 4> splits;
            for (int q = 0; q < 4; ++q) {
                const Vec3i& v = voxels[q];
                int64_t n = grid.resolution();
                if (v.x < 0 || v.y < 0 || v.z < 0 || v.x >= n || v.y >= n || v.z >= n) {
                    raise(Errc::invalid_grid, "intersected edge touches out-of-grid voxel");
                }
                uint64_t lin = grid.linear_index(v.x, v.y, v.z);
                auto it = vertex_of.find(lin);
                if (it == vertex_of.end()) {
                    raise(Errc::invalid_grid, "missing record for voxel sharing an active edge");
                }
                ids[q] = it->second;
                splits[q] = grid.find(lin)->split;
            }

            bool dir = flag_direction(r.flags, axis);
            std::array<uint32_t, 4> wound = apply_winding(ids, dir, mode);
            std::array<double, 4> wound_split = apply_winding(splits, dir, mode);
            auto tris = split_quad(wound_split);

            auto tri_cross = [&](const std::array<int, 3>& tri) {
                const Vec3& p0 = mesh.vertices[wound[tri[0]]];
                const Vec3& p1 = mesh.vertices[wound[tri[1]]];
                const Vec3& p2 = mesh.vertices[wound[tri[2]]];
                return cross(p1 - p0, p2 - p1);
            };
            // A non-convex (dart) quad inverts one triangle when split along
            // the diagonal that misses its reflex vertex; prefer the other
            // diagonal when it restores a consistent orientation. The choice
            // depends only on unordered geometry, so it is identical in every
            // winding mode.
            if (dot(tri_cross(tris[0]), tri_cross(tris[1])) < 0.0) {
                std::array<std::array<int, 3>, 2> alt;
                if (tris[0][2] == 2) {
                    alt = {{{0, 1, 3}, {1, 2, 3}}};
                } else {
                    alt = {{{0, 1, 2}, {0, 2, 3}}};
                }
                if (dot(tri_cross(alt[0]), tri_cross(alt[1])) >= 0.0) tris = alt;
            }

            std::array<std::array<uint32_t, 3>, 2> emitted;
            for (int i = 0; i < 2; ++i) {
                emitted[i] = {wound[tris[i][0]], wound[tris[i][1]], wound[tris[i][2]]};
            }
            // emission order keyed by the unordered triangle so the list
            // position of each triangle is the same in every winding mode
            auto key = [](std::array<uint32_t, 3> t) {
                std::sort(t.begin(), t.end());
                return t;
            };
            if (key(emitted[1]) < key(emitted[0])) std::swap(emitted[0], emitted[1]);
            for (const auto& t : emitted) {
                if (zero_area(t)) {
                    ++local.degenerate_dropped;
                    continue;
                }
                mesh.triangles.push_back(t);
            }
        }
    }

    if (stats != nullptr) *stats = local;
    return mesh;
}

}  // namespace ov
