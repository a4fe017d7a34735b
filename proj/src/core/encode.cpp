#include "encode.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "error.hpp"
#include "parallel.hpp"

namespace ov {

namespace {

// Window for snapping a crossing onto a grid corner; far below any real edge
// length (h >= 1/2^20) and far above double roundoff on [0,1] coordinates.
constexpr double kCornerEps = 1e-12;

struct EdgeKey {
    Vec3i corner;
    int axis;
};

// Edge ordering used everywhere: ascending (linear owner index, axis). The
// component tuple (k, j, i, axis) gives the same order and stays collision
// free for corners sitting on the far lattice planes.
bool edge_less(const Vec3i& ca, int aa, const Vec3i& cb, int ab) {
    if (ca.z != cb.z) return ca.z < cb.z;
    if (ca.y != cb.y) return ca.y < cb.y;
    if (ca.x != cb.x) return ca.x < cb.x;
    return aa < ab;
}

// Smallest existing edge incident to grid corner g: candidates are the three
// edges leaving g and the three arriving at it.
EdgeKey smallest_incident_edge(const Vec3i& g, int64_t n) {
    bool found = false;
    EdgeKey best{};
    auto consider = [&](Vec3i corner, int axis) {
        if (corner[axis] < 0 || corner[axis] > n - 1) return;
        int b = (axis + 1) % 3;
        int c = (axis + 2) % 3;
        if (corner[b] < 0 || corner[b] > n || corner[c] < 0 || corner[c] > n) return;
        if (!found || edge_less(corner, axis, best.corner, best.axis)) {
            best = {corner, axis};
            found = true;
        }
    };
    for (int a = 0; a < 3; ++a) {
        consider(g, a);
        Vec3i prev = g;
        prev[a] -= 1;
        consider(prev, a);
    }
    return best;
}

// Cells whose closed box may contain geometry, from triangle bounding boxes.
// Dense byte mask for moderate resolutions, hashed set above that.
class CellMask {
public:
    CellMask(const Mesh& mesh, int64_t n) : n_(n) {
        if (n <= 256) dense_.assign(static_cast<size_t>(n * n * n), 0);
        const double res = static_cast<double>(n);
        for (const auto& t : mesh.triangles) {
            Vec3 lo = min(min(mesh.vertices[t[0]], mesh.vertices[t[1]]), mesh.vertices[t[2]]);
            Vec3 hi = max(max(mesh.vertices[t[0]], mesh.vertices[t[1]]), mesh.vertices[t[2]]);
            int64_t c0[3], c1[3];
            for (int a = 0; a < 3; ++a) {
                c0[a] = std::clamp<int64_t>(
                    static_cast<int64_t>(std::floor((lo[a] - kCornerEps) * res)), 0, n - 1);
                c1[a] = std::clamp<int64_t>(
                    static_cast<int64_t>(std::floor((hi[a] + kCornerEps) * res)), 0, n - 1);
            }
            for (int64_t k = c0[2]; k <= c1[2]; ++k) {
                for (int64_t j = c0[1]; j <= c1[1]; ++j) {
                    for (int64_t i = c0[0]; i <= c1[0]; ++i) mark((k * n + j) * n + i);
                }
            }
        }
    }

    bool marked(int64_t i, int64_t j, int64_t k) const {
        if (i < 0 || j < 0 || k < 0 || i >= n_ || j >= n_ || k >= n_) return false;
        uint64_t lin = static_cast<uint64_t>((k * n_ + j) * n_ + i);
        return dense_.empty() ? sparse_.count(lin) > 0 : dense_[lin] != 0;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        if (!dense_.empty()) {
            for (size_t lin = 0; lin < dense_.size(); ++lin) {
                if (dense_[lin]) fn(static_cast<uint64_t>(lin));
            }
        } else {
            for (uint64_t lin : sparse_) fn(lin);
        }
    }

private:
    void mark(int64_t lin) {
        if (dense_.empty()) sparse_.insert(static_cast<uint64_t>(lin));
        else dense_[static_cast<size_t>(lin)] = 1;
    }

    int64_t n_;
    std::vector<uint8_t> dense_;
    std::unordered_set<uint64_t> sparse_;
};

}  // namespace

std::vector<IntersectedEdge> enumerate_intersected_edges(const Bvh& bvh, uint32_t resolution) {
    if (resolution == 0) raise(Errc::invalid_argument, "resolution must be positive");
    const Mesh& mesh = bvh.mesh();
    if (mesh.empty()) raise(Errc::empty_mesh, "cannot encode an empty mesh");

    const int64_t n = resolution;
    const double h = 1.0 / static_cast<double>(resolution);
    CellMask mask(mesh, n);

    // Candidate edges: the 12 edges of every cell a triangle box touches.
    std::vector<EdgeKey> candidates;
    mask.for_each([&](uint64_t lin) {
        Vec3i cell{static_cast<int64_t>(lin % static_cast<uint64_t>(n)),
                   static_cast<int64_t>((lin / static_cast<uint64_t>(n)) % static_cast<uint64_t>(n)),
                   static_cast<int64_t>(lin / static_cast<uint64_t>(n * n))};
        for (const auto& [corner, axis] : voxel_edges(cell)) {
            candidates.push_back({corner, axis});
        }
    });
    std::sort(candidates.begin(), candidates.end(), [](const EdgeKey& a, const EdgeKey& b) {
        return edge_less(a.corner, a.axis, b.corner, b.axis);
    });
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](const EdgeKey& a, const EdgeKey& b) {
                                     return a.corner == b.corner && a.axis == b.axis;
                                 }),
                     candidates.end());

    // Query every candidate as a short ray. The origin is pulled back by the
    // corner window so crossings rounding just below t=0 are still seen.
    std::vector<std::vector<EdgeHit>> kept(candidates.size());
    parallel_for(candidates.size(), [&](size_t begin, size_t end) {
        for (size_t ci = begin; ci < end; ++ci) {
            const EdgeKey& e = candidates[ci];
            Vec3 dir = axis_unit(e.axis);
            Vec3 corner{static_cast<double>(e.corner.x) * h, static_cast<double>(e.corner.y) * h,
                        static_cast<double>(e.corner.z) * h};
            Ray ray{corner - dir * kCornerEps, dir, h + 2.0 * kCornerEps};
            auto raw = bvh.ray_all_hits(ray);
            if (raw.empty()) continue;

            std::vector<EdgeHit>& out = kept[ci];
            for (const Bvh::Hit& hit : raw) {
                double t = hit.t - kCornerEps;  // back to corner-origin parameter
                if (t < -kCornerEps || t > h + kCornerEps) continue;
                if (t <= kCornerEps) {
                    EdgeKey owner = smallest_incident_edge(e.corner, n);
                    if (!(owner.corner == e.corner) || owner.axis != e.axis) continue;
                    t = 0.0;
                } else if (t >= h - kCornerEps) {
                    Vec3i far = e.corner;
                    far[e.axis] += 1;
                    EdgeKey owner = smallest_incident_edge(far, n);
                    if (!(owner.corner == e.corner) || owner.axis != e.axis) continue;
                    t = h;
                }
                out.push_back({t, hit.triangle, hit.normal});
            }
        }
    });

    std::vector<IntersectedEdge> edges;
    for (size_t ci = 0; ci < candidates.size(); ++ci) {
        if (kept[ci].empty()) continue;
        const EdgeKey& e = candidates[ci];
        int b = (e.axis + 1) % 3;
        int c = (e.axis + 2) % 3;
        bool interior = e.corner[b] >= 1 && e.corner[b] <= n - 1 && e.corner[c] >= 1 &&
                        e.corner[c] <= n - 1;
        if (!interior) {
            raise(Errc::normalization,
                  "mesh crosses a boundary-of-grid edge at corner (" +
                      std::to_string(e.corner.x) + "," + std::to_string(e.corner.y) + "," +
                      std::to_string(e.corner.z) + "); normalize with margin >= 1/N");
        }
        edges.push_back({e.corner, e.axis, std::move(kept[ci])});
    }
    return edges;
}

std::vector<HermiteSample> collect_hermite(const Vec3i& voxel, uint32_t resolution,
                                           std::span<const IntersectedEdge> edges) {
    const double h = 1.0 / static_cast<double>(resolution);
    std::vector<HermiteSample> samples;
    for (const auto& [corner, axis] : voxel_edges(voxel)) {
        for (const IntersectedEdge& e : edges) {
            if (!(e.owner == corner) || e.axis != axis || e.hits.empty()) continue;
            const EdgeHit& first = e.hits.front();
            Vec3 p{static_cast<double>(corner.x) * h, static_cast<double>(corner.y) * h,
                   static_cast<double>(corner.z) * h};
            p[axis] += first.t;
            samples.push_back({p, first.normal});
            break;
        }
    }
    return samples;
}

Vec3 solve_qef(std::span<const Vec3> points, std::span<const Vec3> normals,
               std::span<const std::pair<Vec3, Vec3>> boundary_segments, const Vec3& centroid,
               const QefParams& params, bool* clamped) {
    if (clamped != nullptr) *clamped = false;
    if (points.empty()) return {0.5, 0.5, 0.5};

    // A v = rhs with A = sum n n^T + lb * sum (I - d d^T) + lr * I
    double a00 = params.lambda_reg, a01 = 0, a02 = 0;
    double a11 = params.lambda_reg, a12 = 0;
    double a22 = params.lambda_reg;
    Vec3 rhs = centroid * params.lambda_reg;

    for (size_t i = 0; i < points.size(); ++i) {
        const Vec3& nrm = normals[i];
        double d = dot(nrm, points[i]);
        a00 += nrm.x * nrm.x;
        a01 += nrm.x * nrm.y;
        a02 += nrm.x * nrm.z;
        a11 += nrm.y * nrm.y;
        a12 += nrm.y * nrm.z;
        a22 += nrm.z * nrm.z;
        rhs += nrm * d;
    }

    for (const auto& [sa, sb] : boundary_segments) {
        Vec3 dir = sb - sa;
        double len2 = norm2(dir);
        if (len2 < 1e-24) continue;
        dir = dir / std::sqrt(len2);
        // (I - d d^T) is the projector onto the plane orthogonal to the line
        double lb = params.lambda_bound;
        a00 += lb * (1.0 - dir.x * dir.x);
        a01 += lb * (-dir.x * dir.y);
        a02 += lb * (-dir.x * dir.z);
        a11 += lb * (1.0 - dir.y * dir.y);
        a12 += lb * (-dir.y * dir.z);
        a22 += lb * (1.0 - dir.z * dir.z);
        Vec3 proj = sa - dir * dot(dir, sa);
        rhs += proj * lb;
    }

    double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                 a02 * (a01 * a12 - a11 * a02);
    Vec3 v;
    if (std::fabs(det) < 1e-30) {
        v = centroid;  // only reachable with lambda_reg = 0
    } else {
        double inv = 1.0 / det;
        double i00 = (a11 * a22 - a12 * a12) * inv;
        double i01 = (a02 * a12 - a01 * a22) * inv;
        double i02 = (a01 * a12 - a02 * a11) * inv;
        double i11 = (a00 * a22 - a02 * a02) * inv;
        double i12 = (a02 * a01 - a00 * a12) * inv;
        double i22 = (a00 * a11 - a01 * a01) * inv;
        v = {i00 * rhs.x + i01 * rhs.y + i02 * rhs.z, i01 * rhs.x + i11 * rhs.y + i12 * rhs.z,
             i02 * rhs.x + i12 * rhs.y + i22 * rhs.z};
    }

    if (v.x >= 0.0 && v.x <= 1.0 && v.y >= 0.0 && v.y <= 1.0 && v.z >= 0.0 && v.z <= 1.0) {
        return v;
    }
    if (clamped != nullptr) *clamped = true;

    // The unconstrained minimizer left the voxel. A componentwise clamp can
    // land far above the box-constrained optimum when the quadratic couples
    // the axes, so enumerate the 27 active-coordinate subsets (free, pinned
    // at 0, pinned at 1), solve each reduced system, and keep the feasible
    // candidate of least energy. The true box minimizer is one of them.
    const double A[3][3] = {{a00, a01, a02}, {a01, a11, a12}, {a02, a12, a22}};
    const double b[3] = {rhs.x, rhs.y, rhs.z};
    auto energy = [&](const Vec3& p) {
        double q[3] = {p.x, p.y, p.z};
        double e = 0.0;
        for (int r = 0; r < 3; ++r) {
            double av = 0.0;
            for (int c = 0; c < 3; ++c) av += A[r][c] * q[c];
            e += q[r] * av - 2.0 * b[r] * q[r];
        }
        return e;
    };

    Vec3 best{};
    double best_energy = std::numeric_limits<double>::max();
    for (int state = 0; state < 27; ++state) {
        int s[3] = {state % 3, (state / 3) % 3, state / 9};  // 0 free, 1 at 0, 2 at 1
        int free_idx[3];
        int nfree = 0;
        Vec3 cand{};
        for (int a = 0; a < 3; ++a) {
            if (s[a] == 0) free_idx[nfree++] = a;
            else cand[a] = s[a] == 1 ? 0.0 : 1.0;
        }
        // reduced right-hand side: b_F - A_FK x_K
        double rb[3];
        for (int f = 0; f < nfree; ++f) {
            int r = free_idx[f];
            rb[f] = b[r];
            for (int a = 0; a < 3; ++a) {
                if (s[a] != 0) rb[f] -= A[r][a] * cand[a];
            }
        }
        bool ok = true;
        if (nfree == 1) {
            int r = free_idx[0];
            cand[r] = rb[0] / A[r][r];
        } else if (nfree == 2) {
            int r0 = free_idx[0], r1 = free_idx[1];
            double m00 = A[r0][r0], m01 = A[r0][r1], m11 = A[r1][r1];
            double d = m00 * m11 - m01 * m01;
            if (std::fabs(d) < 1e-30) {
                ok = false;
            } else {
                cand[r0] = (rb[0] * m11 - rb[1] * m01) / d;
                cand[r1] = (rb[1] * m00 - rb[0] * m01) / d;
            }
        } else if (nfree == 3) {
            continue;  // the unconstrained solve already failed the box test
        }
        for (int f = 0; ok && f < nfree; ++f) {
            int r = free_idx[f];
            ok = cand[r] >= 0.0 && cand[r] <= 1.0;
        }
        if (!ok) continue;
        double e = energy(cand);
        if (e < best_energy) {
            best_energy = e;
            best = cand;
        }
    }
    return best;
}

bool derive_direction_exact(std::span<const EdgeHit> hits_sorted, int axis) {
    return hits_sorted.front().normal[axis] >= 0.0;
}

bool derive_direction_voxel_normal(const Vec3& voxel_average_normal, int axis) {
    return voxel_average_normal[axis] >= 0.0;
}

namespace {

// Segment-box clip (slab method); returns false when the segment misses.
bool clip_segment(const Vec3& a, const Vec3& b, const Vec3& lo, const Vec3& hi, Vec3& out_a,
                  Vec3& out_b) {
    Vec3 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        if (d[ax] == 0.0) {
            if (a[ax] < lo[ax] || a[ax] > hi[ax]) return false;
            continue;
        }
        double ta = (lo[ax] - a[ax]) / d[ax];
        double tb = (hi[ax] - a[ax]) / d[ax];
        if (ta > tb) std::swap(ta, tb);
        if (ta > t0) t0 = ta;
        if (tb < t1) t1 = tb;
        if (t0 > t1) return false;
    }
    out_a = a + d * t0;
    out_b = a + d * t1;
    return true;
}

struct BoundaryIndex {
    std::vector<std::pair<Vec3, Vec3>> segments;
    std::unordered_map<uint64_t, std::vector<uint32_t>> cells;  // cell linear -> segment ids

    BoundaryIndex(const Mesh& mesh, int64_t n) {
        std::unordered_map<uint64_t, int> edge_count;
        auto key = [](uint32_t a, uint32_t b) {
            uint32_t lo = a < b ? a : b;
            uint32_t hi = a < b ? b : a;
            return (static_cast<uint64_t>(lo) << 32) | hi;
        };
        for (const auto& t : mesh.triangles) {
            for (int e = 0; e < 3; ++e) edge_count[key(t[e], t[(e + 1) % 3])] += 1;
        }
        const double res = static_cast<double>(n);
        for (const auto& [k, count] : edge_count) {
            if (count != 1) continue;
            Vec3 a = mesh.vertices[static_cast<uint32_t>(k >> 32)];
            Vec3 b = mesh.vertices[static_cast<uint32_t>(k & 0xFFFFFFFFu)];
            uint32_t id = static_cast<uint32_t>(segments.size());
            segments.emplace_back(a, b);
            Vec3 lo = min(a, b), hi = max(a, b);
            int64_t c0[3], c1[3];
            for (int ax = 0; ax < 3; ++ax) {
                c0[ax] = std::clamp<int64_t>(
                    static_cast<int64_t>(std::floor((lo[ax] - kCornerEps) * res)), 0, n - 1);
                c1[ax] = std::clamp<int64_t>(
                    static_cast<int64_t>(std::floor((hi[ax] + kCornerEps) * res)), 0, n - 1);
            }
            for (int64_t kk = c0[2]; kk <= c1[2]; ++kk) {
                for (int64_t jj = c0[1]; jj <= c1[1]; ++jj) {
                    for (int64_t ii = c0[0]; ii <= c1[0]; ++ii) {
                        cells[static_cast<uint64_t>((kk * n + jj) * n + ii)].push_back(id);
                    }
                }
            }
        }
    }
};

}  // namespace

FdgdGrid encode_mesh(const Mesh& mesh, uint32_t resolution, DirectionMode mode,
                     const QefParams& params, EncodeStats* stats) {
    if (mesh.empty()) raise(Errc::empty_mesh, "cannot encode an empty mesh");
    if (resolution < 2) raise(Errc::invalid_argument, "resolution must be >= 2");
    if (!(params.lambda_reg > 0.0)) raise(Errc::invalid_argument, "lambda_reg must be > 0");
    if (params.lambda_bound < 0.0) raise(Errc::invalid_argument, "lambda_bound must be >= 0");

    const double h = 1.0 / static_cast<double>(resolution);
    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    for (int a = 0; a < 3; ++a) {
        if (lo[a] < h - kCornerEps || hi[a] > 1.0 - h + kCornerEps) {
            raise(Errc::normalization,
                  "mesh exceeds [1/N, 1-1/N]^3; normalize with margin >= 1/N first");
        }
    }

    Bvh bvh(mesh);
    std::vector<IntersectedEdge> edges = enumerate_intersected_edges(bvh, resolution);

    FdgdGrid grid(resolution);
    const int64_t n = resolution;

    // Every voxel sharing an intersected edge becomes active.
    std::vector<uint64_t> active;
    active.reserve(edges.size() * 4);
    for (const IntersectedEdge& e : edges) {
        for (const Vec3i& v : edge_quad_voxels(e.owner, e.axis)) {
            active.push_back(grid.linear_index(v.x, v.y, v.z));
        }
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());

    // (owner linear, axis) -> edge, for the per-voxel 12-edge gather.
    std::unordered_map<uint64_t, const IntersectedEdge*> edge_map;
    edge_map.reserve(edges.size() * 2);
    for (const IntersectedEdge& e : edges) {
        uint64_t lin = grid.linear_index(e.owner.x, e.owner.y, e.owner.z);
        edge_map.emplace((lin << 2) | static_cast<uint64_t>(e.axis), &e);
    }

    BoundaryIndex boundary(mesh, n);

    std::vector<VoxelRecord> records(active.size());
    std::vector<Vec3> avg_normals(active.size());
    std::vector<uint8_t> clamped_flags(active.size(), 0);
    std::vector<uint32_t> sample_counts(active.size(), 0);

    parallel_for(active.size(), [&](size_t begin, size_t end) {
        std::vector<Vec3> pts, nrms;
        std::vector<std::pair<Vec3, Vec3>> segs;
        for (size_t vi = begin; vi < end; ++vi) {
            uint64_t lin = active[vi];
            Vec3i idx = grid.unpack_index(lin);
            Vec3 corner{static_cast<double>(idx.x) * h, static_cast<double>(idx.y) * h,
                        static_cast<double>(idx.z) * h};

            pts.clear();
            nrms.clear();
            Vec3 normal_sum{};
            for (const auto& [ec, axis] : voxel_edges(idx)) {
                int b = (axis + 1) % 3;
                int c = (axis + 2) % 3;
                if (ec[b] > n - 1 || ec[c] > n - 1) continue;  // owner outside voxel range
                uint64_t elin = grid.linear_index(ec.x, ec.y, ec.z);
                auto it = edge_map.find((elin << 2) | static_cast<uint64_t>(axis));
                if (it == edge_map.end()) continue;
                const EdgeHit& first = it->second->hits.front();
                Vec3 p{static_cast<double>(ec.x) * h, static_cast<double>(ec.y) * h,
                       static_cast<double>(ec.z) * h};
                p[axis] += first.t;
                // voxel-local coordinates
                Vec3 local = (p - corner) * static_cast<double>(resolution);
                local = {std::clamp(local.x, 0.0, 1.0), std::clamp(local.y, 0.0, 1.0),
                         std::clamp(local.z, 0.0, 1.0)};
                pts.push_back(local);
                nrms.push_back(first.normal);
                normal_sum += first.normal;
            }

            segs.clear();
            auto cell_it = boundary.cells.find(lin);
            if (cell_it != boundary.cells.end()) {
                Vec3 box_hi = corner + Vec3{h, h, h};
                for (uint32_t sid : cell_it->second) {
                    Vec3 ca, cb;
                    if (clip_segment(boundary.segments[sid].first, boundary.segments[sid].second,
                                     corner, box_hi, ca, cb)) {
                        segs.emplace_back((ca - corner) * static_cast<double>(resolution),
                                          (cb - corner) * static_cast<double>(resolution));
                    }
                }
            }

            Vec3 centroid{};
            for (const Vec3& p : pts) centroid += p;
            if (!pts.empty()) centroid = centroid / static_cast<double>(pts.size());

            bool clamped = false;
            Vec3 dual = solve_qef(pts, nrms, segs, centroid, params, &clamped);

            VoxelRecord& rec = records[vi];
            rec.linear = lin;
            for (int a = 0; a < 3; ++a) {
                rec.dual_vertex[a] = std::clamp(static_cast<float>(dual[a]), 0.0f, 1.0f);
            }
            rec.split = 0.5f;
            avg_normals[vi] = normalized(normal_sum);
            clamped_flags[vi] = clamped ? 1 : 0;
            sample_counts[vi] = static_cast<uint32_t>(pts.size());
        }
    });

    // Direction and intersect bits, written onto the owning records.
    auto record_of = [&](uint64_t lin) -> VoxelRecord& {
        auto it = std::lower_bound(active.begin(), active.end(), lin);
        return records[static_cast<size_t>(it - active.begin())];
    };
    for (const IntersectedEdge& e : edges) {
        uint64_t lin = grid.linear_index(e.owner.x, e.owner.y, e.owner.z);
        size_t slot = static_cast<size_t>(
            std::lower_bound(active.begin(), active.end(), lin) - active.begin());
        bool dir = mode == DirectionMode::ExactRay
                       ? derive_direction_exact(e.hits, e.axis)
                       : derive_direction_voxel_normal(avg_normals[slot], e.axis);
        VoxelRecord& rec = record_of(lin);
        rec.flags |= static_cast<uint8_t>(1u << e.axis);
        if (dir) rec.flags |= static_cast<uint8_t>(1u << (3 + e.axis));
    }

    grid.records() = std::move(records);

    if (stats != nullptr) {
        stats->intersected_edges = edges.size();
        stats->active_voxels = grid.records().size();
        uint64_t hermite = 0, clamped_total = 0;
        for (size_t i = 0; i < active.size(); ++i) {
            hermite += sample_counts[i];
            clamped_total += clamped_flags[i];
        }
        stats->hermite_samples = hermite;
        stats->clamped_dual_vertices = clamped_total;
    }
    return grid;
}

}  // namespace ov
