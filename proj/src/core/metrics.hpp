#pragma once

#include <cstdint>
#include <string>

#include "mesh.hpp"

namespace ov {

struct EvalConfig {
    uint32_t cd_samples = 100000;   // surface samples per side for CD / F-Score
    uint32_t normal_samples = 10000;
    double f_tau = 0.03;            // F-Score distance threshold
    uint32_t iou_res = 64;          // occupancy rasterization resolution
    uint64_t seed = 0;
    bool global_flip = true;        // allow one global sign flip of predicted normals
};

struct MetricsReport {
    double cd = 0.0;
    double f_score = 0.0;
    double iou = 0.0;
    double rmse_u = 0.0;              // degrees, [0, 90]
    double rmse_o = 0.0;              // degrees, [0, 180]
    double orient_correct_pct = 0.0;  // percent, global flip applied when configured
    uint64_t n_b = 0;                 // boundary edges
    uint64_t n_c = 0;                 // boundary loops
    uint64_t n_g = 0;                 // total genus over components
    double tau_v_pct = 0.0;           // percent of non-manifold vertices
    bool genus_clamped = false;       // a component's Euler-derived genus was negative
    EvalConfig config;
};

// Mean nearest-neighbor distance between two independently sampled point
// sets, averaged over both directions. Unsquared distances. The two sides
// use their own seeds; equal meshes with equal seeds give exactly zero.
double chamfer_distance(const Mesh& a, const Mesh& b, uint32_t samples_per_side, uint64_t seed_a,
                        uint64_t seed_b);
double chamfer_distance(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg);

// Precision = fraction of prediction samples within tau of the ground-truth
// surface (exact point-to-triangle distance); recall symmetric;
// F = 2PR/(P+R), 0 when both vanish.
double f_score(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg);

// Surface-rasterized occupancy IoU: a cell counts as occupied when any
// triangle intersects its closed box. Meshes are expected in [0,1]^3.
double voxel_iou(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg);

struct NormalErrors {
    double rmse_u = 0.0;
    double rmse_o = 0.0;
    double orient_correct_pct = 0.0;
};

// Pairs the face normal at each prediction sample with the face normal of
// the nearest ground-truth triangle. When cfg.global_flip is set and negating
// every predicted normal raises the correctly-oriented fraction, rmse_o and
// the percentage are reported under that flip; rmse_u is flip-invariant.
NormalErrors normal_errors(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg);

struct BoundaryStats {
    uint64_t n_b = 0;
    uint64_t n_c = 0;
};

// n_b: undirected edges with exactly one incident triangle. n_c: connected
// components of the graph spanned by those edges.
BoundaryStats boundary_stats(const Mesh& mesh);

struct GenusResult {
    uint64_t n_g = 0;
    bool clamped = false;
};

// Per connected component: g = max(0, round((2 - chi - b) / 2)) with
// chi = V - E + F and b the component's boundary loops; summed over
// components. `clamped` reports that the formula went negative somewhere
// (non-manifold input).
GenusResult genus(const Mesh& mesh);

// Percent of vertices incident to an edge shared by more than two triangles.
double nonmanifold_vertex_pct(const Mesh& mesh);

// All nine metrics; topology metrics are computed on the prediction only.
MetricsReport full_report(const Mesh& pred, const Mesh& gt, const EvalConfig& cfg);

// Fixed-schema serializations shared by the CLI and the C API.
std::string report_csv_header();
std::string report_csv_row(const MetricsReport& r);
std::string report_json(const MetricsReport& r);

}  // namespace ov
