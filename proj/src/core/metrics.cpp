#include "metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "bvh.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace ov {

namespace {

constexpr double kRadToDeg = 57.29577951308232;

// Seed streams per report: 0 = prediction-side CD/F samples, 1 = ground-truth
// side, 2 = normal-evaluation samples on the prediction.
enum SeedStream : uint64_t { kStreamPredSurface = 0, kStreamGtSurface = 1, kStreamNormals = 2 };

// ---------------------------------------------------------------- kd-tree --

// Median-split kd-tree over a point set; queries return squared distance to
// the nearest point. Build and queries are deterministic.
class PointKdTree {
public:
    explicit PointKdTree(const std::vector<Vec3>& points) : points_(points) {
        index_.resize(points.size());
        std::iota(index_.begin(), index_.end(), 0u);
        nodes_.reserve(points.size() * 2);
        if (!points.empty()) root_ = build(0, points.size());
    }

    double nearest_dist2(const Vec3& q) const {
        double best = std::numeric_limits<double>::max();
        if (!nodes_.empty()) search(root_, q, best);
        return best;
    }

private:
    struct Node {
        Vec3 lo, hi;
        uint32_t begin = 0, count = 0;  // leaf payload
        int32_t left = -1, right = -1;
    };

    uint32_t build(size_t begin, size_t end) {
        Node node;
        node.lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                   std::numeric_limits<double>::max()};
        node.hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
                   std::numeric_limits<double>::lowest()};
        for (size_t i = begin; i < end; ++i) {
            node.lo = min(node.lo, points_[index_[i]]);
            node.hi = max(node.hi, points_[index_[i]]);
        }
        uint32_t id = static_cast<uint32_t>(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= 8) {
            nodes_[id].begin = static_cast<uint32_t>(begin);
            nodes_[id].count = static_cast<uint32_t>(end - begin);
            return id;
        }
        Vec3 extent = node.hi - node.lo;
        int axis = 0;
        if (extent.y > extent[axis]) axis = 1;
        if (extent.z > extent[axis]) axis = 2;
        size_t mid = begin + (end - begin) / 2;
        std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                         [this, axis](uint32_t a, uint32_t b) {
                             double ca = points_[a][axis], cb = points_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        int32_t l = static_cast<int32_t>(build(begin, mid));
        int32_t r = static_cast<int32_t>(build(mid, end));
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    static double box_dist2(const Node& n, const Vec3& q) {
        double d2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            double d = 0.0;
            if (q[i] < n.lo[i]) d = n.lo[i] - q[i];
            else if (q[i] > n.hi[i]) d = q[i] - n.hi[i];
            d2 += d * d;
        }
        return d2;
    }

    void search(uint32_t id, const Vec3& q, double& best) const {
        const Node& node = nodes_[id];
        if (node.count > 0 || node.left < 0) {
            for (uint32_t i = 0; i < node.count; ++i) {
                double d2 = norm2(points_[index_[node.begin + i]] - q);
                if (d2 < best) best = d2;
            }
            return;
        }
        double dl = box_dist2(nodes_[node.left], q);
        double dr = box_dist2(nodes_[node.right], q);
        uint32_t first = node.left, second = node.right;
        double dfirst = dl, dsecond = dr;
        if (dr < dl) {
            std::swap(first, second);
            std::swap(dfirst, dsecond);
        }
        if (dfirst < best) search(first, q, best);
        if (dsecond < best) search(second, q, best);
    }

    const std::vector<Vec3>& points_;
    std::vector<uint32_t> index_;
    std::vector<Node> nodes_;
    uint32_t root_ = 0;
};

std::vector<Vec3> sample_positions(const Mesh& mesh, uint32_t count, uint64_t seed) {
    auto samples = sample_surface(mesh, count, seed);
    std::vector<Vec3> pts(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) pts[i] = samples[i].position;
    return pts;
}

double mean_nn_distance(const std::vector<Vec3>& from, const PointKdTree& to) {
    std::vector<double> dist(from.size());
    parallel_for(from.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) dist[i] = std::sqrt(to.nearest_dist2(from[i]));
    });
    double sum = 0.0;
    for (double d : dist) sum += d;
    return from.empty() ? 0.0 : sum / static_cast<double>(from.size());
}

double chamfer_impl(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    PointKdTree tree_a(a);
    PointKdTree tree_b(b);
    return 0.5 * (mean_nn_distance(a, tree_b) + mean_nn_distance(b, tree_a));
}

double within_tau_fraction(const std::vector<Vec3>& points, const Bvh& surface, double tau) {
    std::vector<uint8_t> ok(points.size());
    parallel_for(points.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            ok[i] = surface.closest_point(points[i]).distance <= tau ? 1 : 0;
        }
    });
    size_t hits = 0;
    for (uint8_t v : ok) hits += v;
    return points.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(points.size());
}

NormalErrors normals_impl(const std::vector<SurfaceSample>& pred_samples, const Bvh& gt_bvh,
                          const Mesh& gt, bool global_flip) {
    size_t n = pred_samples.size();
    std::vector<double> dots(n);
    parallel_for(n, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            auto cp = gt_bvh.closest_point(pred_samples[i].position);
            Vec3 gt_normal = gt.face_normal(cp.triangle);
            dots[i] = std::clamp(dot(gt_normal, pred_samples[i].normal), -1.0, 1.0);
        }
    });

    size_t pos = 0, neg = 0;
    for (double d : dots) {
        if (d > 0.0) ++pos;
        else if (d < 0.0) ++neg;
    }
    bool flip = global_flip && neg > pos;

    double su = 0.0, so = 0.0;
    for (double d : dots) {
        double du = std::acos(std::fabs(d)) * kRadToDeg;
        double dd = std::acos(flip ? -d : d) * kRadToDeg;
        su += du * du;
        so += dd * dd;
    }
    NormalErrors out;
    double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    out.rmse_u = std::sqrt(su * inv);
    out.rmse_o = std::sqrt(so * inv);
    out.orient_correct_pct = 100.0 * static_cast<double>(flip ? neg : pos) * inv;
    return out;
}

// Akenine-Moller triangle / axis-aligned box overlap, closed-box semantics.
bool tri_box_overlap(const Vec3& center, const Vec3& half, const Vec3& a, const Vec3& b,
                     const Vec3& c) {
    Vec3 v0 = a - center, v1 = b - center, v2 = c - center;
    Vec3 e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;

    auto axis_test = [&](const Vec3& axis) {
        double p0 = dot(v0, axis), p1 = dot(v1, axis), p2 = dot(v2, axis);
        double mn = std::min({p0, p1, p2}), mx = std::max({p0, p1, p2});
        double r = half.x * std::fabs(axis.x) + half.y * std::fabs(axis.y) +
                   half.z * std::fabs(axis.z);
        return mn > r || mx < -r;  // strictly separated
    };

    for (const Vec3& e : {e0, e1, e2}) {
        if (axis_test({0.0, -e.z, e.y})) return false;
        if (axis_test({e.z, 0.0, -e.x})) return false;
        if (axis_test({-e.y, e.x, 0.0})) return false;
    }

    for (int i = 0; i < 3; ++i) {
        double mn = std::min({v0[i], v1[i], v2[i]});
        double mx = std::max({v0[i], v1[i], v2[i]});
        if (mn > half[i] || mx < -half[i]) return false;
    }

    Vec3 normal = cross(e0, e1);
    double d = -dot(normal, v0);
    double r = half.x * std::fabs(normal.x) + half.y * std::fabs(normal.y) +
               half.z * std::fabs(normal.z);
    return std::fabs(d) <= r;
}

std::vector<uint8_t> rasterize_occupancy(const Mesh& mesh, int64_t res) {
    std::vector<uint8_t> occ(static_cast<size_t>(res * res * res), 0);
    const double h = 1.0 / static_cast<double>(res);
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        Vec3 lo = min(min(a, b), c);
        Vec3 hi = max(max(a, b), c);
        int64_t c0[3], c1[3];
        for (int ax = 0; ax < 3; ++ax) {
            c0[ax] = std::clamp<int64_t>(static_cast<int64_t>(std::floor(lo[ax] * res)), 0,
                                         res - 1);
            c1[ax] = std::clamp<int64_t>(static_cast<int64_t>(std::floor(hi[ax] * res)), 0,
                                         res - 1);
        }
        for (int64_t k = c0[2]; k <= c1[2]; ++k) {
            for (int64_t j = c0[1]; j <= c1[1]; ++j) {
                for (int64_t i = c0[0]; i <= c1[0]; ++i) {
                    size_t lin = static_cast<size_t>((k * res + j) * res + i);
                    if (occ[lin]) continue;
                    Vec3 center{(static_cast<double>(i) + 0.5) * h,
                                (static_cast<double>(j) + 0.5) * h,
                                (static_cast<double>(k) + 0.5) * h};
                    Vec3 half{0.5 * h, 0.5 * h, 0.5 * h};
                    if (tri_box_overlap(center, half, a, b, c)) occ[lin] = 1;
                }
            }
        }
    }
    return occ;
}

// ------------------------------------------------------------- topology ----

struct UnionFind {
    std::vector<uint32_t> parent;

    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }

    uint32_t find(uint32_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }

    void unite(uint32_t a, uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[b < a ? a : b] = b < a ? b : a;
    }
};

uint64_t edge_key(uint32_t a, uint32_t b) {
    uint32_t lo = a < b ? a : b;
    uint32_t hi = a < b ? b : a;
    return (static_cast<uint64_t>(lo) << 32) | hi;
}

std::unordered_map<uint64_t, uint32_t> count_edges(const Mesh& mesh) {
    std::unordered_map<uint64_t, uint32_t> edges;
    edges.reserve(mesh.triangles.size() * 2);
    for (const auto& t : mesh.triangles) {
        edges[edge_key(t[0], t[1])] += 1;
        edges[edge_key(t[1], t[2])] += 1;
        edges[edge_key(t[2], t[0])] += 1;
    }
    return edges;
}

void require_non_empty(const Mesh& m, const char* what) {
    if (m.empty()) raise(Errc::empty_mesh, std::string(what) + " requires a non-empty mesh");
}

void format_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, ptr);
}

}  // namespace

double chamfer_distance(const Mesh& a, const Mesh& b, uint32_t samples_per_side, uint64_t seed_a,
                        uint64_t seed_b) {
    require_non_empty(a, "chamfer_distance");
    require_non_empty(b, "chamfer_distance");
    return chamfer_impl(sample_positions(a, samples_per_side, seed_a),
                        sample_positions(b, samples_per_side, seed_b));
}

double chamfer_distance(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg) {
    return chamfer_distance(pred, gt, cfg.cd_samples, derive_seed(cfg.seed, kStreamPredSurface),
                            derive_seed(cfg.seed, kStreamGtSurface));
}

double f_score(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg) {
    require_non_empty(pred, "f_score");
    require_non_empty(gt, "f_score");
    Bvh pred_bvh(pred), gt_bvh(gt);
    auto pred_pts = sample_positions(pred, cfg.cd_samples, derive_seed(cfg.seed, kStreamPredSurface));
    auto gt_pts = sample_positions(gt, cfg.cd_samples, derive_seed(cfg.seed, kStreamGtSurface));
    double precision = within_tau_fraction(pred_pts, gt_bvh, cfg.f_tau);
    double recall = within_tau_fraction(gt_pts, pred_bvh, cfg.f_tau);
    double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

double voxel_iou(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg) {
    require_non_empty(pred, "voxel_iou");
    require_non_empty(gt, "voxel_iou");
    auto a = rasterize_occupancy(pred, cfg.iou_res);
    auto b = rasterize_occupancy(gt, cfg.iou_res);
    uint64_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        inter += (a[i] & b[i]) ? 1 : 0;
        uni += (a[i] | b[i]) ? 1 : 0;
    }
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

NormalErrors normal_errors(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg) {
    require_non_empty(pred, "normal_errors");
    require_non_empty(gt, "normal_errors");
    Bvh gt_bvh(gt);
    auto samples = sample_surface(pred, cfg.normal_samples, derive_seed(cfg.seed, kStreamNormals));
    return normals_impl(samples, gt_bvh, gt, cfg.global_flip);
}

BoundaryStats boundary_stats(const Mesh& mesh) {
    BoundaryStats out;
    if (mesh.empty()) return out;
    auto edges = count_edges(mesh);

    UnionFind uf(mesh.vertices.size());
    std::vector<uint8_t> on_boundary(mesh.vertices.size(), 0);
    for (const auto& [key, count] : edges) {
        if (count != 1) continue;
        ++out.n_b;
        uint32_t a = static_cast<uint32_t>(key >> 32);
        uint32_t b = static_cast<uint32_t>(key & 0xFFFFFFFFu);
        on_boundary[a] = on_boundary[b] = 1;
        uf.unite(a, b);
    }
    std::vector<uint8_t> seen(mesh.vertices.size(), 0);
    for (uint32_t v = 0; v < mesh.vertices.size(); ++v) {
        if (!on_boundary[v]) continue;
        uint32_t root = uf.find(v);
        if (!seen[root]) {
            seen[root] = 1;
            ++out.n_c;
        }
    }
    return out;
}

GenusResult genus(const Mesh& mesh) {
    GenusResult out;
    if (mesh.empty()) return out;

    auto edges = count_edges(mesh);
    UnionFind comp(mesh.vertices.size());
    for (const auto& t : mesh.triangles) {
        comp.unite(t[0], t[1]);
        comp.unite(t[1], t[2]);
    }

    std::unordered_map<uint32_t, int64_t> v_count, e_count, f_count, loop_count;
    std::vector<uint8_t> referenced(mesh.vertices.size(), 0);
    for (const auto& t : mesh.triangles) {
        referenced[t[0]] = referenced[t[1]] = referenced[t[2]] = 1;
        f_count[comp.find(t[0])] += 1;
    }
    for (uint32_t v = 0; v < mesh.vertices.size(); ++v) {
        if (referenced[v]) v_count[comp.find(v)] += 1;
    }
    for (const auto& [key, count] : edges) {
        e_count[comp.find(static_cast<uint32_t>(key >> 32))] += 1;
    }

    // boundary loops, attributed to the mesh component they lie on
    UnionFind loops(mesh.vertices.size());
    std::vector<uint8_t> on_boundary(mesh.vertices.size(), 0);
    for (const auto& [key, count] : edges) {
        if (count != 1) continue;
        uint32_t a = static_cast<uint32_t>(key >> 32);
        uint32_t b = static_cast<uint32_t>(key & 0xFFFFFFFFu);
        on_boundary[a] = on_boundary[b] = 1;
        loops.unite(a, b);
    }
    std::vector<uint8_t> seen(mesh.vertices.size(), 0);
    for (uint32_t v = 0; v < mesh.vertices.size(); ++v) {
        if (!on_boundary[v]) continue;
        uint32_t root = loops.find(v);
        if (!seen[root]) {
            seen[root] = 1;
            loop_count[comp.find(v)] += 1;
        }
    }

    for (const auto& [root, faces] : f_count) {
        int64_t chi = v_count[root] - e_count[root] + faces;
        int64_t b = loop_count.count(root) ? loop_count[root] : 0;
        double g = (2.0 - static_cast<double>(chi) - static_cast<double>(b)) / 2.0;
        int64_t gi = std::llround(g);
        if (gi < 0) {
            out.clamped = true;
            gi = 0;
        }
        out.n_g += static_cast<uint64_t>(gi);
    }
    return out;
}

double nonmanifold_vertex_pct(const Mesh& mesh) {
    if (mesh.vertices.empty()) return 0.0;
    auto edges = count_edges(mesh);
    std::vector<uint8_t> flagged(mesh.vertices.size(), 0);
    for (const auto& [key, count] : edges) {
        if (count <= 2) continue;
        flagged[static_cast<uint32_t>(key >> 32)] = 1;
        flagged[static_cast<uint32_t>(key & 0xFFFFFFFFu)] = 1;
    }
    uint64_t n = 0;
    for (uint8_t f : flagged) n += f;
    return 100.0 * static_cast<double>(n) / static_cast<double>(mesh.vertices.size());
}

MetricsReport full_report(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg) {
    require_non_empty(pred, "full_report");
    require_non_empty(gt, "full_report");

    MetricsReport r;
    r.config = cfg;

    auto pred_pts = sample_positions(pred, cfg.cd_samples, derive_seed(cfg.seed, kStreamPredSurface));
    auto gt_pts = sample_positions(gt, cfg.cd_samples, derive_seed(cfg.seed, kStreamGtSurface));
    r.cd = chamfer_impl(pred_pts, gt_pts);

    Bvh pred_bvh(pred), gt_bvh(gt);
    double precision = within_tau_fraction(pred_pts, gt_bvh, cfg.f_tau);
    double recall = within_tau_fraction(gt_pts, pred_bvh, cfg.f_tau);
    double denom = precision + recall;
    r.f_score = denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;

    r.iou = voxel_iou(pred, gt, cfg);

    auto normal_samples =
        sample_surface(pred, cfg.normal_samples, derive_seed(cfg.seed, kStreamNormals));
    NormalErrors ne = normals_impl(normal_samples, gt_bvh, gt, cfg.global_flip);
    r.rmse_u = ne.rmse_u;
    r.rmse_o = ne.rmse_o;
    r.orient_correct_pct = ne.orient_correct_pct;

    BoundaryStats bs = boundary_stats(pred);
    r.n_b = bs.n_b;
    r.n_c = bs.n_c;
    GenusResult g = genus(pred);
    r.n_g = g.n_g;
    r.genus_clamped = g.clamped;
    r.tau_v_pct = nonmanifold_vertex_pct(pred);
    return r;
}

std::string report_csv_header() {
    return "cd,f_score,iou,rmse_u,rmse_o,orient_correct_pct,n_b,n_c,n_g,tau_v_pct,seed,"
           "cd_samples,normal_samples,f_tau,iou_res";
}

std::string report_csv_row(const MetricsReport& r) {
    std::string out;
    format_double(out, r.cd);
    out += ',';
    format_double(out, r.f_score);
    out += ',';
    format_double(out, r.iou);
    out += ',';
    format_double(out, r.rmse_u);
    out += ',';
    format_double(out, r.rmse_o);
    out += ',';
    format_double(out, r.orient_correct_pct);
    out += ',';
    out += std::to_string(r.n_b);
    out += ',';
    out += std::to_string(r.n_c);
    out += ',';
    out += std::to_string(r.n_g);
    out += ',';
    format_double(out, r.tau_v_pct);
    out += ',';
    out += std::to_string(r.config.seed);
    out += ',';
    out += std::to_string(r.config.cd_samples);
    out += ',';
    out += std::to_string(r.config.normal_samples);
    out += ',';
    format_double(out, r.config.f_tau);
    out += ',';
    out += std::to_string(r.config.iou_res);
    return out;
}

std::string report_json(const MetricsReport& r) {
    std::string out = "{";
    auto field = [&out](const char* name, bool first = false) {
        if (!first) out += ',';
        out += '"';
        out += name;
        out += "\":";
    };
    field("cd", true);
    format_double(out, r.cd);
    field("f_score");
    format_double(out, r.f_score);
    field("iou");
    format_double(out, r.iou);
    field("rmse_u");
    format_double(out, r.rmse_u);
    field("rmse_o");
    format_double(out, r.rmse_o);
    field("orient_correct_pct");
    format_double(out, r.orient_correct_pct);
    field("n_b");
    out += std::to_string(r.n_b);
    field("n_c");
    out += std::to_string(r.n_c);
    field("n_g");
    out += std::to_string(r.n_g);
    field("tau_v_pct");
    format_double(out, r.tau_v_pct);
    field("genus_clamped");
    out += r.genus_clamped ? "true" : "false";
    field("seed");
    out += std::to_string(r.config.seed);
    field("cd_samples");
    out += std::to_string(r.config.cd_samples);
    field("normal_samples");
    out += std::to_string(r.config.normal_samples);
    field("f_tau");
    format_double(out, r.config.f_tau);
    field("iou_res");
    out += std::to_string(r.config.iou_res);
    field("global_flip");
    out += r.config.global_flip ? "true" : "false";
    out += '}';
    return out;
}

}  // namespace ov
