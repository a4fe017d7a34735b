#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vec3.hpp"

namespace ov {

// Per-voxel payload of the sparse dual grid. The flag byte packs the three
// edge-intersection bits and the three crossing-direction bits:
//   bit 0..2 = dx, dy, dz   (owned +X/+Y/+Z edge is intersected)
//   bit 3..5 = cx, cy, cz   (crossing direction, meaningful where d is set)
//   bit 6..7 = reserved, zero
// Direction bits are stored as zero wherever the matching intersect bit is
// clear, so equal grids serialize to equal bytes.
struct VoxelRecord {
    uint64_t linear = 0;         // (k*N + j)*N + i
    float dual_vertex[3] = {};   // voxel-local, each component in [0, 1]
    uint8_t flags = 0;
    float split = 0.5f;
};

uint8_t pack_flags(const std::array<bool, 3>& intersected, const std::array<bool, 3>& direction);
// Throws on nonzero reserved bits (corrupt data).
void unpack_flags(uint8_t byte, std::array<bool, 3>& intersected, std::array<bool, 3>& direction);

inline bool flag_intersected(uint8_t flags, int axis) { return (flags >> axis) & 1; }
inline bool flag_direction(uint8_t flags, int axis) { return (flags >> (3 + axis)) & 1; }

// Sparse dual grid over [0,1]^3 at resolution N. Records are kept sorted by
// ascending linear index. Voxel (i,j,k) owns the three grid edges leaving
// corner (i,j,k) toward +X, +Y, +Z.
class FdgdGrid {
public:
    FdgdGrid() = default;
    explicit FdgdGrid(uint32_t resolution) : resolution_(resolution) {}
    FdgdGrid(uint32_t resolution, std::vector<VoxelRecord> sorted_records)
        : resolution_(resolution), records_(std::move(sorted_records)) {}

    uint32_t resolution() const { return resolution_; }
    const std::vector<VoxelRecord>& records() const { return records_; }
    std::vector<VoxelRecord>& records() { return records_; }

    uint64_t linear_index(int64_t i, int64_t j, int64_t k) const {
        return (static_cast<uint64_t>(k) * resolution_ + static_cast<uint64_t>(j)) * resolution_ +
               static_cast<uint64_t>(i);
    }
    Vec3i unpack_index(uint64_t linear) const {
        uint64_t n = resolution_;
        return {static_cast<int64_t>(linear % n), static_cast<int64_t>((linear / n) % n),
                static_cast<int64_t>(linear / (n * n))};
    }

    const VoxelRecord* find(uint64_t linear) const;

    // world position of a record's dual vertex: (index + local) / N
    Vec3 world_dual_vertex(const VoxelRecord& r) const;

    size_t intersected_edge_count() const;

private:
    uint32_t resolution_ = 0;
    std::vector<VoxelRecord> records_;
};

// The four voxels sharing the axis-aligned edge owned by `owner`, in the
// default quad order: counter-clockwise when viewed from the +axis side, so a
// planar quad built in this order has a normal with positive dot(+axis).
// For an X-edge at (i,j,k): (i,j-1,k-1), (i,j,k-1), (i,j,k), (i,j-1,k);
// Y and Z follow by cyclic rotation of the coordinate roles.
std::array<Vec3i, 4> edge_quad_voxels(const Vec3i& owner, int axis);

// The 12 edges bounding voxel v, as (owning corner, axis) pairs.
std::array<std::pair<Vec3i, int>, 12> voxel_edges(const Vec3i& v);

struct GridViolation {
    uint64_t linear = 0;
    std::string rule;
    std::string detail;
};

// Empty result iff every record invariant holds: indices in range, dual
// vertices and splits inside [0,1], reserved and masked direction bits zero,
// and every intersected edge backed by all four sharing-voxel records.
std::vector<GridViolation> validate(const FdgdGrid& grid);

// Binary `.fdgd` container, little-endian:
//   magic "FDGD", version u16 = 1, reserved u16 = 0, resolution u32,
//   record count u64; per record: linear u64, dual vertex 3 x f32,
//   flag byte u8, padding u8 = 0, split f32. Records ascend by linear index.
void write_fdgd(const FdgdGrid& grid, const std::string& path);
FdgdGrid read_fdgd(const std::string& path);

}  // namespace ov
