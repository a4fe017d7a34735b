#include <map>
#include <set>

#include "core/decode.hpp"
#include "core/encode.hpp"
#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace ov;

namespace {

// grid with dual vertices at voxel centers around one interior edge
FdgdGrid centered_grid(uint32_t n, const Vec3i& owner, int axis, bool direction) {
    FdgdGrid grid(n);
    std::vector<VoxelRecord> records;
    for (const Vec3i& v : edge_quad_voxels(owner, axis)) {
        VoxelRecord r;
        r.linear = grid.linear_index(v.x, v.y, v.z);
        r.dual_vertex[0] = r.dual_vertex[1] = r.dual_vertex[2] = 0.5f;
        records.push_back(r);
    }
    std::sort(records.begin(), records.end(),
              [](const VoxelRecord& a, const VoxelRecord& b) { return a.linear < b.linear; });
    uint64_t owner_lin = grid.linear_index(owner.x, owner.y, owner.z);
    for (VoxelRecord& r : records) {
        if (r.linear == owner_lin) {
            std::array<bool, 3> d{}, c{};
            d[axis] = true;
            c[axis] = direction;
            r.flags = pack_flags(d, c);
        }
    }
    grid.records() = std::move(records);
    return grid;
}

std::set<std::set<uint32_t>> unordered_triangles(const Mesh& m) {
    std::set<std::set<uint32_t>> out;
    for (const auto& t : m.triangles) out.insert({t[0], t[1], t[2]});
    return out;
}

}  // namespace

TEST_CASE("quad_for_edge: centered dual vertices form the unit quad around the edge") {
    uint32_t n = 8;
    const double h = 1.0 / n;
    FdgdGrid grid = centered_grid(n, {4, 4, 4}, 0, true);
    auto quad = quad_for_edge(grid, {4, 4, 4}, 0);

    // square of side h around the X edge, normal along +x by the default order
    Vec3 expected0{4.5 * h, 3.5 * h, 3.5 * h};
    CHECK(norm(quad[0] - expected0) < 1e-12);
    Vec3 normal = normalized(cross(quad[1] - quad[0], quad[2] - quad[1]));
    CHECK(normal.x == doctest::Approx(1.0).epsilon(1e-12));

    for (int axis : {1, 2}) {
        FdgdGrid g2 = centered_grid(n, {4, 4, 4}, axis, true);
        auto q2 = quad_for_edge(g2, {4, 4, 4}, axis);
        Vec3 n2 = normalized(cross(q2[1] - q2[0], q2[2] - q2[1]));
        CHECK(n2[axis] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("quad_for_edge: missing record raises") {
    FdgdGrid grid = centered_grid(8, {4, 4, 4}, 0, true);
    grid.records().erase(grid.records().begin());
    CHECK_THROWS_AS(quad_for_edge(grid, {4, 4, 4}, 0), Error);
}

TEST_CASE("apply_winding") {
    std::array<char, 4> quad{'a', 'b', 'c', 'd'};
    CHECK(apply_winding(quad, true, WindingMode::Directed) ==
          std::array<char, 4>{'a', 'b', 'c', 'd'});
    CHECK(apply_winding(quad, false, WindingMode::Directed) ==
          std::array<char, 4>{'a', 'd', 'c', 'b'});
    CHECK(apply_winding(quad, false, WindingMode::AxisHardcoded) ==
          std::array<char, 4>{'a', 'b', 'c', 'd'});
    CHECK(apply_winding(quad, true, WindingMode::AxisHardcoded) ==
          std::array<char, 4>{'a', 'b', 'c', 'd'});

    // flip is an involution
    auto flipped = apply_winding(quad, false, WindingMode::Directed);
    CHECK(apply_winding(flipped, false, WindingMode::Directed) == quad);
}

TEST_CASE("split_quad") {
    CHECK(split_quad({0.5, 0.5, 0.5, 0.5}) ==
          std::array<std::array<int, 3>, 2>{{{0, 1, 2}, {0, 2, 3}}});
    CHECK(split_quad({0.0, 1.0, 0.0, 1.0}) ==
          std::array<std::array<int, 3>, 2>{{{0, 1, 3}, {1, 2, 3}}});
    CHECK(split_quad({0.9, 0.1, 0.9, 0.1}) ==
          std::array<std::array<int, 3>, 2>{{{0, 1, 2}, {0, 2, 3}}});
}

TEST_CASE("split_quad: planar quad gives identical geometry for either diagonal") {
    std::array<Vec3, 4> quad = {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{1, 1, 0}, Vec3{0, 1, 0}};
    auto t1 = split_quad({1, 0, 1, 0});
    auto t2 = split_quad({0, 1, 0, 1});
    for (const auto& tris : {t1, t2}) {
        for (const auto& tri : tris) {
            Vec3 n = normalized(cross(quad[tri[1]] - quad[tri[0]], quad[tri[2]] - quad[tri[1]]));
            CHECK(n.z == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("decode_grid: single-edge grid") {
    FdgdGrid grid = centered_grid(8, {4, 4, 4}, 2, true);
    DecodeStats stats;
    Mesh mesh = decode_grid(grid, WindingMode::Directed, &stats);
    CHECK(mesh.vertices.size() == 4);
    CHECK(mesh.triangles.size() == 2);
    CHECK(stats.quads == 1);
    CHECK(stats.degenerate_dropped == 0);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        CHECK(mesh.face_normal(t).z == doctest::Approx(1.0).epsilon(1e-12));
    }

    // direction bit false reverses the face normals
    FdgdGrid down = centered_grid(8, {4, 4, 4}, 2, false);
    Mesh down_mesh = decode_grid(down, WindingMode::Directed);
    for (size_t t = 0; t < down_mesh.triangles.size(); ++t) {
        CHECK(down_mesh.face_normal(t).z == doctest::Approx(-1.0).epsilon(1e-12));
    }
    // but axis mode ignores it
    Mesh axis_mesh = decode_grid(down, WindingMode::AxisHardcoded);
    for (size_t t = 0; t < axis_mesh.triangles.size(); ++t) {
        CHECK(axis_mesh.face_normal(t).z == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("decode_grid: empty grid decodes to an empty mesh") {
    Mesh mesh = decode_grid(FdgdGrid(16), WindingMode::Directed);
    CHECK(mesh.vertices.empty());
    CHECK(mesh.triangles.empty());
}

TEST_CASE("decode_grid: missing record raises") {
    FdgdGrid grid = centered_grid(8, {4, 4, 4}, 1, true);
    grid.records().erase(grid.records().begin());
    CHECK_THROWS_AS(decode_grid(grid, WindingMode::Directed), Error);
}

TEST_CASE("decode_grid: plane round trip keeps orientation under directed winding") {
    Mesh plane = test::make_plane_grid(0.25, 0.75, 0.5 + 1e-4, 4);
    QefParams params;
    FdgdGrid grid = encode_mesh(plane, 8, DirectionMode::ExactRay, params);

    Mesh directed = decode_grid(grid, WindingMode::Directed);
    REQUIRE(!directed.triangles.empty());
    for (size_t t = 0; t < directed.triangles.size(); ++t) {
        CHECK(directed.face_normal(t).z > 0.9);
    }

    Mesh axis = decode_grid(grid, WindingMode::AxisHardcoded);
    REQUIRE(axis.vertices.size() == directed.vertices.size());
    for (size_t v = 0; v < axis.vertices.size(); ++v) {
        CHECK(axis.vertices[v] == directed.vertices[v]);  // bit-identical
    }
    CHECK(unordered_triangles(axis) == unordered_triangles(directed));
}

TEST_CASE("decode_grid: winding modes share geometry on a closed fixture") {
    FixtureSpec spec = FixtureSpec::defaults(FixtureShape::Sphere);
    spec.segments_u = 32;
    spec.segments_v = 16;
    Fixture f = generate(spec);
    uint32_t n = 32;
    Mesh mesh = normalize_to_unit_cube(f.mesh, 1.0 / n);
    QefParams params;
    FdgdGrid grid = encode_mesh(mesh, n, DirectionMode::ExactRay, params);

    DecodeStats s1, s2;
    Mesh directed = decode_grid(grid, WindingMode::Directed, &s1);
    Mesh axis = decode_grid(grid, WindingMode::AxisHardcoded, &s2);

    REQUIRE(directed.vertices.size() == axis.vertices.size());
    for (size_t v = 0; v < directed.vertices.size(); ++v) {
        CHECK(directed.vertices[v] == axis.vertices[v]);
    }
    CHECK(unordered_triangles(directed) == unordered_triangles(axis));
    CHECK(s1.quads == s2.quads);

    // triangle count = 2 x intersected edges (no degenerate drops here)
    CHECK(directed.triangles.size() + s1.degenerate_dropped == 2 * grid.intersected_edge_count());
}

TEST_CASE("decode_grid: per-quad orientation follows the stored direction") {
    for (int axis = 0; axis < 3; ++axis) {
        for (bool dir : {true, false}) {
            FdgdGrid grid = centered_grid(16, {8, 8, 8}, axis, dir);
            Mesh mesh = decode_grid(grid, WindingMode::Directed);
            for (size_t t = 0; t < mesh.triangles.size(); ++t) {
                double sign = mesh.face_normal(t)[axis];
                CHECK((dir ? sign > 0.0 : sign < 0.0));
            }
        }
    }
}
