#include "grid.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace ov {

uint8_t pack_flags(const std::array<bool, 3>& intersected, const std::array<bool, 3>& direction) {
    uint8_t b = 0;
    for (int a = 0; a < 3; ++a) {
        if (intersected[a]) {
            b |= static_cast<uint8_t>(1u << a);
            if (direction[a]) b |= static_cast<uint8_t>(1u << (3 + a));
        }
    }
    return b;
}

void unpack_flags(uint8_t byte, std::array<bool, 3>& intersected, std::array<bool, 3>& direction) {
    if (byte & 0xC0) raise(Errc::reserved_bits, "flag byte has nonzero reserved bits");
    for (int a = 0; a < 3; ++a) {
        intersected[a] = (byte >> a) & 1;
        direction[a] = (byte >> (3 + a)) & 1;
    }
}

const VoxelRecord* FdgdGrid::find(uint64_t linear) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), linear,
                               [](const VoxelRecord& r, uint64_t v) { return r.linear < v; });
    if (it == records_.end() || it->linear != linear) return nullptr;
    return &*it;
}

Vec3 FdgdGrid::world_dual_vertex(const VoxelRecord& r) const {
    Vec3i idx = unpack_index(r.linear);
    double inv = 1.0 / resolution_;
    return {(static_cast<double>(idx.x) + r.dual_vertex[0]) * inv,
            (static_cast<double>(idx.y) + r.dual_vertex[1]) * inv,
            (static_cast<double>(idx.z) + r.dual_vertex[2]) * inv};
}

size_t FdgdGrid::intersected_edge_count() const {
    size_t count = 0;
    for (const VoxelRecord& r : records_) {
        for (int a = 0; a < 3; ++a) count += flag_intersected(r.flags, a) ? 1 : 0;
    }
    return count;
}

std::array<Vec3i, 4> edge_quad_voxels(const Vec3i& owner, int axis) {
    int b = (axis + 1) % 3;
    int c = (axis + 2) % 3;
    // offsets in the (b, c) plane; CCW viewed from +axis
    static constexpr int kOffsets[4][2] = {{-1, -1}, {0, -1}, {0, 0}, {-1, 0}};
    std::array<Vec3i, 4> out;
    for (int q = 0; q < 4; ++q) {
        Vec3i v = owner;
        v[b] += kOffsets[q][0];
        v[c] += kOffsets[q][1];
        out[q] = v;
    }
    return out;
}

std::array<std::pair<Vec3i, int>, 12> voxel_edges(const Vec3i& v) {
    std::array<std::pair<Vec3i, int>, 12> out;
    size_t n = 0;
    for (int axis = 0; axis < 3; ++axis) {
        int b = (axis + 1) % 3;
        int c = (axis + 2) % 3;
        for (int db = 0; db < 2; ++db) {
            for (int dc = 0; dc < 2; ++dc) {
                Vec3i corner = v;
                corner[b] += db;
                corner[c] += dc;
                out[n++] = {corner, axis};
            }
        }
    }
    return out;
}

std::vector<GridViolation> validate(const FdgdGrid& grid) {
    std::vector<GridViolation> out;
    uint64_t n = grid.resolution();
    uint64_t cells = n * n * n;
    uint64_t prev = 0;
    bool first = true;

    for (const VoxelRecord& r : grid.records()) {
        if (!first && r.linear <= prev) {
            out.push_back({r.linear, "record-order", "records not strictly ascending"});
        }
        first = false;
        prev = r.linear;

        if (r.linear >= cells) {
            out.push_back({r.linear, "index-range", "linear index exceeds N^3"});
            continue;
        }
        for (int a = 0; a < 3; ++a) {
            float v = r.dual_vertex[a];
            if (!(v >= 0.0f && v <= 1.0f)) {
                out.push_back({r.linear, "dual-vertex-range",
                               "component " + std::to_string(a) + " = " + std::to_string(v)});
            }
        }
        if (!(r.split >= 0.0f && r.split <= 1.0f)) {
            out.push_back({r.linear, "split-range", "split = " + std::to_string(r.split)});
        }
        if (r.flags & 0xC0) {
            out.push_back({r.linear, "reserved-bits", "flag bits 6-7 set"});
        }
        for (int a = 0; a < 3; ++a) {
            if (!flag_intersected(r.flags, a) && flag_direction(r.flags, a)) {
                out.push_back({r.linear, "direction-masking",
                               "direction bit set on non-intersected axis " + std::to_string(a)});
            }
        }

        Vec3i idx = grid.unpack_index(r.linear);
        for (int a = 0; a < 3; ++a) {
            if (!flag_intersected(r.flags, a)) continue;
            auto quad = edge_quad_voxels(idx, a);
            for (const Vec3i& q : quad) {
                bool in_range = q.x >= 0 && q.y >= 0 && q.z >= 0 &&
                                q.x < static_cast<int64_t>(n) && q.y < static_cast<int64_t>(n) &&
                                q.z < static_cast<int64_t>(n);
                if (!in_range) {
                    out.push_back({r.linear, "boundary-edge",
                                   "intersected axis-" + std::to_string(a) +
                                       " edge requires out-of-grid voxel"});
                    continue;
                }
                if (grid.find(grid.linear_index(q.x, q.y, q.z)) == nullptr) {
                    out.push_back({r.linear, "quad-completeness",
                                   "axis-" + std::to_string(a) + " edge lacks sharing voxel (" +
                                       std::to_string(q.x) + "," + std::to_string(q.y) + "," +
                                       std::to_string(q.z) + ")"});
                }
            }
        }
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'F', 'D', 'G', 'D'};
constexpr uint16_t kVersion = 1;
constexpr size_t kHeaderSize = 4 + 2 + 2 + 4 + 8;
constexpr size_t kRecordSize = 8 + 12 + 1 + 1 + 4;

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));  // little-endian host assumed
}

template <typename T>
T get(const char* data) {
    T v;
    std::memcpy(&v, data, sizeof(T));
    return v;
}

}  // namespace

void write_fdgd(const FdgdGrid& grid, const std::string& path) {
    std::string out;
    out.reserve(kHeaderSize + grid.records().size() * kRecordSize);
    out.append(kMagic, 4);
    put<uint16_t>(out, kVersion);
    put<uint16_t>(out, 0);
    put<uint32_t>(out, grid.resolution());
    put<uint64_t>(out, grid.records().size());
    for (const VoxelRecord& r : grid.records()) {
        put<uint64_t>(out, r.linear);
        put<float>(out, r.dual_vertex[0]);
        put<float>(out, r.dual_vertex[1]);
        put<float>(out, r.dual_vertex[2]);
        put<uint8_t>(out, r.flags);
        put<uint8_t>(out, 0);
        put<float>(out, r.split);
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) raise(Errc::io, "cannot open '" + path + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) raise(Errc::io, "write failed for '" + path + "'");
}

FdgdGrid read_fdgd(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) raise(Errc::io, "cannot open '" + path + "' for reading");
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (data.size() < 4) raise(Errc::truncated, "file shorter than the magic");
    if (std::memcmp(data.data(), kMagic, 4) != 0) raise(Errc::bad_magic, "bad magic");
    if (data.size() < kHeaderSize) raise(Errc::truncated, "file shorter than header");
    uint16_t version = get<uint16_t>(data.data() + 4);
    if (version != kVersion) {
        raise(Errc::bad_version, "unsupported version " + std::to_string(version));
    }
    uint16_t reserved = get<uint16_t>(data.data() + 6);
    if (reserved != 0) raise(Errc::reserved_bits, "nonzero reserved header field");
    uint32_t resolution = get<uint32_t>(data.data() + 8);
    uint64_t count = get<uint64_t>(data.data() + 12);

    if (data.size() < kHeaderSize + count * kRecordSize) {
        raise(Errc::truncated, "file shorter than declared record count");
    }
    if (data.size() > kHeaderSize + count * kRecordSize) {
        raise(Errc::corrupt, "trailing bytes after last record");
    }

    FdgdGrid grid(resolution);
    grid.records().resize(count);
    const char* p = data.data() + kHeaderSize;
    uint64_t prev = 0;
    for (uint64_t i = 0; i < count; ++i, p += kRecordSize) {
        VoxelRecord& r = grid.records()[i];
        r.linear = get<uint64_t>(p);
        r.dual_vertex[0] = get<float>(p + 8);
        r.dual_vertex[1] = get<float>(p + 12);
        r.dual_vertex[2] = get<float>(p + 16);
        r.flags = get<uint8_t>(p + 20);
        uint8_t padding = get<uint8_t>(p + 21);
        r.split = get<float>(p + 22);

        if (r.flags & 0xC0) raise(Errc::reserved_bits, "record flag byte has reserved bits set");
        if (padding != 0) raise(Errc::reserved_bits, "nonzero record padding byte");
        if (i > 0 && r.linear <= prev) {
            raise(Errc::corrupt, "records not in ascending linear-index order");
        }
        prev = r.linear;
    }
    return grid;
}

}  // namespace ov
