#include "bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace ov {

namespace {

constexpr double kBaryEps = 1e-9;
constexpr size_t kLeafSize = 4;

struct RayFrame {
    int kx, ky, kz;
    double sx, sy, sz;
};

RayFrame make_frame(const Vec3& d) {
    RayFrame f;
    f.kz = 0;
    if (std::fabs(d.y) > std::fabs(d[f.kz])) f.kz = 1;
    if (std::fabs(d.z) > std::fabs(d[f.kz])) f.kz = 2;
    f.kx = (f.kz + 1) % 3;
    f.ky = (f.kz + 2) % 3;
    if (d[f.kz] < 0.0) std::swap(f.kx, f.ky);
    f.sx = d[f.kx] / d[f.kz];
    f.sy = d[f.ky] / d[f.kz];
    f.sz = 1.0 / d[f.kz];
    return f;
}

// Watertight ray-triangle test (shear + 2D edge functions). Accepts boundary
// hits within kBaryEps of the normalized barycentric bounds so crossings on
// shared edges are seen by both incident triangles; the caller deduplicates.
bool intersect_frame(const RayFrame& f, const Vec3& origin, const Vec3& a, const Vec3& b,
                     const Vec3& c, double& t_out) {
    Vec3 A = a - origin;
    Vec3 B = b - origin;
    Vec3 C = c - origin;

    double ax = A[f.kx] - f.sx * A[f.kz];
    double ay = A[f.ky] - f.sy * A[f.kz];
    double bx = B[f.kx] - f.sx * B[f.kz];
    double by = B[f.ky] - f.sy * B[f.kz];
    double cx = C[f.kx] - f.sx * C[f.kz];
    double cy = C[f.ky] - f.sy * C[f.kz];

    double u = cx * by - cy * bx;
    double v = ax * cy - ay * cx;
    double w = bx * ay - by * ax;

    double det = u + v + w;
    if (det == 0.0) return false;
    double inv = 1.0 / det;
    double bu = u * inv, bv = v * inv, bw = w * inv;
    if (bu < -kBaryEps || bv < -kBaryEps || bw < -kBaryEps) return false;

    double az = f.sz * A[f.kz];
    double bz = f.sz * B[f.kz];
    double cz = f.sz * C[f.kz];
    t_out = bu * az + bv * bz + bw * cz;
    return true;
}

inline bool box_hits_ray(const Vec3& lo, const Vec3& hi, const Vec3& origin, const Vec3& inv_dir,
                         double t_max) {
    double t0 = 0.0, t1 = t_max;
    for (int i = 0; i < 3; ++i) {
        double ta = (lo[i] - origin[i]) * inv_dir[i];
        double tb = (hi[i] - origin[i]) * inv_dir[i];
        if (ta > tb) std::swap(ta, tb);
        if (ta > t0) t0 = ta;
        if (tb < t1) t1 = tb;
        if (t0 > t1) return false;
    }
    return true;
}

inline double box_distance2(const Vec3& lo, const Vec3& hi, const Vec3& p) {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        double d = 0.0;
        if (p[i] < lo[i]) d = lo[i] - p[i];
        else if (p[i] > hi[i]) d = p[i] - hi[i];
        d2 += d * d;
    }
    return d2;
}

}  // namespace

bool ray_triangle_intersect(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                            const Vec3& c, double& t_out) {
    RayFrame f = make_frame(dir);
    return intersect_frame(f, origin, a, b, c, t_out);
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap);
    double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    Vec3 bp = p - b;
    double d3 = dot(ab, bp);
    double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return a + ab * v;
    }

    Vec3 cp = p - c;
    double d5 = dot(ab, cp);
    double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return a + ac * w;
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom;
    double w = vc * denom;
    return a + ab * v + ac * w;
}

Bvh::Bvh(const Mesh& mesh) : mesh_(&mesh) {
    size_t n = mesh.triangles.size();
    face_normals_.resize(n);
    for (size_t i = 0; i < n; ++i) face_normals_[i] = mesh.face_normal(i);

    if (n == 0) return;
    std::vector<uint32_t> tris(n);
    for (size_t i = 0; i < n; ++i) tris[i] = static_cast<uint32_t>(i);
    nodes_.reserve(2 * n);
    order_.reserve(n);
    build(tris, 0, n);
}

uint32_t Bvh::build(std::vector<uint32_t>& tris, size_t begin, size_t end) {
    Node node;
    node.lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
               std::numeric_limits<double>::max()};
    node.hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
               std::numeric_limits<double>::lowest()};
    for (size_t i = begin; i < end; ++i) {
        const auto& t = mesh_->triangles[tris[i]];
        for (int k = 0; k < 3; ++k) {
            node.lo = min(node.lo, mesh_->vertices[t[k]]);
            node.hi = max(node.hi, mesh_->vertices[t[k]]);
        }
    }

    uint32_t index = static_cast<uint32_t>(nodes_.size());
    nodes_.push_back(node);

    if (end - begin <= kLeafSize) {
        nodes_[index].left = static_cast<uint32_t>(order_.size());
        nodes_[index].count = static_cast<uint32_t>(end - begin);
        for (size_t i = begin; i < end; ++i) order_.push_back(tris[i]);
        return index;
    }

    Vec3 extent = node.hi - node.lo;
    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    auto centroid = [this, axis](uint32_t tri) {
        const auto& t = mesh_->triangles[tri];
        return (mesh_->vertices[t[0]][axis] + mesh_->vertices[t[1]][axis] +
                mesh_->vertices[t[2]][axis]) / 3.0;
    };
    size_t mid = begin + (end - begin) / 2;
    // ordering key includes the triangle id so the split is fully deterministic
    std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                     [&centroid](uint32_t lhs, uint32_t rhs) {
                         double cl = centroid(lhs), cr = centroid(rhs);
                         return cl < cr || (cl == cr && lhs < rhs);
                     });

    uint32_t left = build(tris, begin, mid);
    uint32_t right = build(tris, mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

std::vector<Bvh::Hit> Bvh::ray_all_hits(const Ray& ray) const {
    std::vector<Hit> hits;
    if (nodes_.empty() || ray.t_max <= 0.0) return hits;

    RayFrame frame = make_frame(ray.direction);
    Vec3 inv_dir{ray.direction.x != 0.0 ? 1.0 / ray.direction.x
                                         : std::numeric_limits<double>::infinity(),
                 ray.direction.y != 0.0 ? 1.0 / ray.direction.y
                                         : std::numeric_limits<double>::infinity(),
                 ray.direction.z != 0.0 ? 1.0 / ray.direction.z
                                         : std::numeric_limits<double>::infinity()};

    uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!box_hits_ray(node.lo, node.hi, ray.origin, inv_dir, ray.t_max)) continue;
        if (node.count > 0) {
            for (uint32_t i = 0; i < node.count; ++i) {
                uint32_t tri = order_[node.left + i];
                const auto& t = mesh_->triangles[tri];
                double hit_t;
                if (intersect_frame(frame, ray.origin, mesh_->vertices[t[0]],
                                    mesh_->vertices[t[1]], mesh_->vertices[t[2]], hit_t) &&
                    hit_t >= 0.0 && hit_t <= ray.t_max) {
                    hits.push_back({hit_t, tri, face_normals_[tri]});
                }
            }
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }

    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.t < b.t || (a.t == b.t && a.triangle < b.triangle);
    });
    // coincident crossings (shared edge / vertex) collapse to one report
    std::vector<Hit> unique;
    unique.reserve(hits.size());
    for (const Hit& h : hits) {
        if (!unique.empty() && std::fabs(h.t - unique.back().t) <= kBaryEps) continue;
        unique.push_back(h);
    }
    return unique;
}

Bvh::ClosestPoint Bvh::closest_point(const Vec3& p) const {
    if (nodes_.empty()) raise(Errc::empty_mesh, "closest_point on empty mesh");

    ClosestPoint best;
    best.distance = std::numeric_limits<double>::max();
    double best_d2 = std::numeric_limits<double>::max();
    best.triangle = std::numeric_limits<uint32_t>::max();

    struct Entry {
        uint32_t node;
        double d2;
    };
    Entry stack[64];
    int top = 0;
    stack[top++] = {0, box_distance2(nodes_[0].lo, nodes_[0].hi, p)};
    while (top > 0) {
        Entry e = stack[--top];
        if (e.d2 > best_d2) continue;
        const Node& node = nodes_[e.node];
        if (node.count > 0) {
            for (uint32_t i = 0; i < node.count; ++i) {
                uint32_t tri = order_[node.left + i];
                const auto& t = mesh_->triangles[tri];
                Vec3 q = closest_point_on_triangle(p, mesh_->vertices[t[0]], mesh_->vertices[t[1]],
                                                   mesh_->vertices[t[2]]);
                double d2 = norm2(p - q);
                if (d2 < best_d2 || (d2 == best_d2 && tri < best.triangle)) {
                    best_d2 = d2;
                    best.triangle = tri;
                    best.point = q;
                }
            }
        } else {
            Entry l{node.left, box_distance2(nodes_[node.left].lo, nodes_[node.left].hi, p)};
            Entry r{node.right, box_distance2(nodes_[node.right].lo, nodes_[node.right].hi, p)};
            // visit the nearer child first; push the farther one below it
            if (l.d2 > r.d2) std::swap(l, r);
            if (r.d2 <= best_d2) stack[top++] = r;
            if (l.d2 <= best_d2) stack[top++] = l;
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

}  // namespace ov
