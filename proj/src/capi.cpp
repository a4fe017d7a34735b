#include "ovoxel/ovoxel.h"

#include <cstring>
#include <string>

#include "core/decode.hpp"
#include "core/encode.hpp"
#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/grid.hpp"
#include "core/mesh.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "json.hpp"

struct ov_mesh {
    ov::Mesh mesh;
};

struct ov_grid {
    ov::FdgdGrid grid;
};

namespace {

thread_local std::string g_last_error;

ov_status status_of(ov::Errc code) {
    switch (code) {
        case ov::Errc::invalid_argument: return OV_ERR_INVALID_ARGUMENT;
        case ov::Errc::io: return OV_ERR_IO;
        case ov::Errc::parse: return OV_ERR_PARSE;
        case ov::Errc::empty_mesh: return OV_ERR_EMPTY_MESH;
        case ov::Errc::normalization: return OV_ERR_NORMALIZATION;
        case ov::Errc::bad_magic: return OV_ERR_BAD_MAGIC;
        case ov::Errc::bad_version: return OV_ERR_BAD_VERSION;
        case ov::Errc::truncated: return OV_ERR_TRUNCATED;
        case ov::Errc::reserved_bits: return OV_ERR_RESERVED_BITS;
        case ov::Errc::corrupt: return OV_ERR_CORRUPT;
        case ov::Errc::invalid_grid: return OV_ERR_INVALID_GRID;
        case ov::Errc::internal: return OV_ERR_INTERNAL;
    }
    return OV_ERR_INTERNAL;
}

template <typename Fn>
ov_status guarded(Fn&& fn) {
    try {
        fn();
        return OV_OK;
    } catch (const ov::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return OV_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ov_status require(bool ok, const char* message) {
    if (ok) return OV_OK;
    g_last_error = message;
    return OV_ERR_INVALID_ARGUMENT;
}

ov::EvalConfig to_core(const ov_eval_config& c) {
    ov::EvalConfig out;
    out.cd_samples = c.cd_samples;
    out.normal_samples = c.normal_samples;
    out.f_tau = c.f_tau;
    out.iou_res = c.iou_res;
    out.seed = c.seed;
    out.global_flip = c.global_flip != 0;
    return out;
}

ov_metrics_report from_core(const ov::MetricsReport& r) {
    ov_metrics_report out{};
    out.cd = r.cd;
    out.f_score = r.f_score;
    out.iou = r.iou;
    out.rmse_u = r.rmse_u;
    out.rmse_o = r.rmse_o;
    out.orient_correct_pct = r.orient_correct_pct;
    out.n_b = r.n_b;
    out.n_c = r.n_c;
    out.n_g = r.n_g;
    out.tau_v_pct = r.tau_v_pct;
    out.genus_clamped = r.genus_clamped ? 1 : 0;
    out.config.cd_samples = r.config.cd_samples;
    out.config.normal_samples = r.config.normal_samples;
    out.config.f_tau = r.config.f_tau;
    out.config.iou_res = r.config.iou_res;
    out.config.seed = r.config.seed;
    out.config.global_flip = r.config.global_flip ? 1 : 0;
    return out;
}

ov::MetricsReport to_core(const ov_metrics_report& r) {
    ov::MetricsReport out;
    out.cd = r.cd;
    out.f_score = r.f_score;
    out.iou = r.iou;
    out.rmse_u = r.rmse_u;
    out.rmse_o = r.rmse_o;
    out.orient_correct_pct = r.orient_correct_pct;
    out.n_b = r.n_b;
    out.n_c = r.n_c;
    out.n_g = r.n_g;
    out.tau_v_pct = r.tau_v_pct;
    out.genus_clamped = r.genus_clamped != 0;
    out.config = to_core(r.config);
    return out;
}

}  // namespace

extern "C" {

void ov_encode_params_init(ov_encode_params* params) {
    if (params == nullptr) return;
    params->resolution = 128;
    params->direction_mode = OV_DIRECTION_EXACT_RAY;
    params->qef.lambda_bound = 1.0;
    params->qef.lambda_reg = 0.05;
}

void ov_eval_config_init(ov_eval_config* config) {
    if (config == nullptr) return;
    config->cd_samples = 100000;
    config->normal_samples = 10000;
    config->f_tau = 0.03;
    config->iou_res = 64;
    config->seed = 0;
    config->global_flip = 1;
}

const char* ov_status_name(ov_status status) {
    switch (status) {
        case OV_OK: return "ok";
        case OV_ERR_INVALID_ARGUMENT: return "invalid argument";
        case OV_ERR_IO: return "i/o error";
        case OV_ERR_PARSE: return "parse error";
        case OV_ERR_EMPTY_MESH: return "empty mesh";
        case OV_ERR_NORMALIZATION: return "normalization error";
        case OV_ERR_BAD_MAGIC: return "bad magic";
        case OV_ERR_BAD_VERSION: return "unsupported version";
        case OV_ERR_TRUNCATED: return "truncated file";
        case OV_ERR_RESERVED_BITS: return "reserved bits set";
        case OV_ERR_CORRUPT: return "corrupt file";
        case OV_ERR_INVALID_GRID: return "invalid grid";
        case OV_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

const char* ov_last_error(void) { return g_last_error.c_str(); }

void ov_string_free(char* str) { delete[] str; }

ov_status ov_mesh_load_obj(const char* path, ov_mesh** out) {
    if (ov_status s = require(path && out, "path and out must be non-null"); s != OV_OK) return s;
    return guarded([&] {
        auto* handle = new ov_mesh{ov::load_obj(path)};
        *out = handle;
    });
}

ov_status ov_mesh_save_obj(const ov_mesh* mesh, const char* path) {
    if (ov_status s = require(mesh && path, "mesh and path must be non-null"); s != OV_OK) {
        return s;
    }
    return guarded([&] { ov::save_obj(mesh->mesh, path); });
}

void ov_mesh_free(ov_mesh* mesh) { delete mesh; }

size_t ov_mesh_vertex_count(const ov_mesh* mesh) {
    return mesh != nullptr ? mesh->mesh.vertices.size() : 0;
}

size_t ov_mesh_triangle_count(const ov_mesh* mesh) {
    return mesh != nullptr ? mesh->mesh.triangles.size() : 0;
}

ov_status ov_mesh_normalize_unit_cube(const ov_mesh* mesh, double margin, ov_mesh** out) {
    if (ov_status s = require(mesh && out, "mesh and out must be non-null"); s != OV_OK) return s;
    return guarded([&] { *out = new ov_mesh{ov::normalize_to_unit_cube(mesh->mesh, margin)}; });
}

ov_status ov_grid_read(const char* path, ov_grid** out) {
    if (ov_status s = require(path && out, "path and out must be non-null"); s != OV_OK) return s;
    return guarded([&] { *out = new ov_grid{ov::read_fdgd(path)}; });
}

ov_status ov_grid_write(const ov_grid* grid, const char* path) {
    if (ov_status s = require(grid && path, "grid and path must be non-null"); s != OV_OK) {
        return s;
    }
    return guarded([&] { ov::write_fdgd(grid->grid, path); });
}

void ov_grid_free(ov_grid* grid) { delete grid; }

uint32_t ov_grid_resolution(const ov_grid* grid) {
    return grid != nullptr ? grid->grid.resolution() : 0;
}

size_t ov_grid_record_count(const ov_grid* grid) {
    return grid != nullptr ? grid->grid.records().size() : 0;
}

size_t ov_grid_edge_count(const ov_grid* grid) {
    return grid != nullptr ? grid->grid.intersected_edge_count() : 0;
}

ov_status ov_grid_validate(const ov_grid* grid, char** violations_json, size_t* count) {
    if (ov_status s = require(grid != nullptr, "grid must be non-null"); s != OV_OK) return s;
    return guarded([&] {
        auto violations = ov::validate(grid->grid);
        if (count != nullptr) *count = violations.size();
        if (violations_json != nullptr) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& v : violations) {
                arr.push_back({{"voxel", v.linear}, {"rule", v.rule}, {"detail", v.detail}});
            }
            *violations_json = dup_string(arr.dump());
        }
    });
}

ov_status ov_encode(const ov_mesh* mesh, const ov_encode_params* params, ov_grid** out,
                    ov_encode_stats* stats) {
    if (ov_status s = require(mesh && params && out, "mesh, params and out must be non-null");
        s != OV_OK) {
        return s;
    }
    return guarded([&] {
        ov::QefParams qef{params->qef.lambda_bound, params->qef.lambda_reg};
        ov::DirectionMode mode = params->direction_mode == OV_DIRECTION_VOXEL_NORMAL
                                     ? ov::DirectionMode::VoxelNormal
                                     : ov::DirectionMode::ExactRay;
        ov::EncodeStats core_stats;
        auto grid = ov::encode_mesh(mesh->mesh, params->resolution, mode, qef, &core_stats);
        if (stats != nullptr) {
            stats->intersected_edges = core_stats.intersected_edges;
            stats->active_voxels = core_stats.active_voxels;
            stats->hermite_samples = core_stats.hermite_samples;
            stats->clamped_dual_vertices = core_stats.clamped_dual_vertices;
        }
        *out = new ov_grid{std::move(grid)};
    });
}

ov_status ov_decode(const ov_grid* grid, int winding_mode, ov_mesh** out,
                    uint64_t* degenerate_dropped) {
    if (ov_status s = require(grid && out, "grid and out must be non-null"); s != OV_OK) return s;
    return guarded([&] {
        ov::WindingMode mode = winding_mode == OV_WINDING_AXIS ? ov::WindingMode::AxisHardcoded
                                                               : ov::WindingMode::Directed;
        ov::DecodeStats stats;
        auto mesh = ov::decode_grid(grid->grid, mode, &stats);
        if (degenerate_dropped != nullptr) *degenerate_dropped = stats.degenerate_dropped;
        *out = new ov_mesh{std::move(mesh)};
    });
}

ov_status ov_evaluate(const ov_mesh* pred, const ov_mesh* gt, const ov_eval_config* config,
                      ov_metrics_report* out) {
    if (ov_status s = require(pred && gt && config && out, "all arguments must be non-null");
        s != OV_OK) {
        return s;
    }
    return guarded([&] { *out = from_core(ov::full_report(pred->mesh, gt->mesh, to_core(*config))); });
}

ov_status ov_report_json(const ov_metrics_report* report, char** out) {
    if (ov_status s = require(report && out, "report and out must be non-null"); s != OV_OK) {
        return s;
    }
    return guarded([&] { *out = dup_string(ov::report_json(to_core(*report))); });
}

ov_status ov_report_csv(const ov_metrics_report* report, int include_header, char** out) {
    if (ov_status s = require(report && out, "report and out must be non-null"); s != OV_OK) {
        return s;
    }
    return guarded([&] {
        std::string csv;
        if (include_header != 0) {
            csv += ov::report_csv_header();
            csv += '\n';
        }
        csv += ov::report_csv_row(to_core(*report));
        csv += '\n';
        *out = dup_string(csv);
    });
}

ov_status ov_fixture_generate(const char* name, ov_mesh** out) {
    if (ov_status s = require(name && out, "name and out must be non-null"); s != OV_OK) return s;
    return guarded([&] {
        auto fixture = ov::generate(ov::FixtureSpec::defaults(ov::fixture_shape_by_name(name)));
        *out = new ov_mesh{std::move(fixture.mesh)};
    });
}

ov_status ov_fixtures_write_corpus(const char* directory, uint64_t seed, char** files_json) {
    if (ov_status s = require(directory != nullptr, "directory must be non-null"); s != OV_OK) {
        return s;
    }
    return guarded([&] {
        auto files = ov::generate_corpus(directory, seed);
        if (files_json != nullptr) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& f : files) arr.push_back(f);
            *files_json = dup_string(arr.dump());
        }
    });
}

void ov_roundtrip_params_init(ov_roundtrip_params* params) {
    if (params == nullptr) return;
    ov_encode_params_init(&params->encode);
    params->winding_mode = OV_WINDING_DIRECTED;
    ov_eval_config_init(&params->eval);
}

ov_status ov_roundtrip_file(const char* mesh_path, const ov_roundtrip_params* params,
                            char** json_out) {
    if (ov_status s = require(mesh_path && params && json_out, "all arguments must be non-null");
        s != OV_OK) {
        return s;
    }
    return guarded([&] {
        ov::RoundtripParams core;
        core.resolution = params->encode.resolution;
        core.direction = params->encode.direction_mode == OV_DIRECTION_VOXEL_NORMAL
                             ? ov::DirectionMode::VoxelNormal
                             : ov::DirectionMode::ExactRay;
        core.winding = params->winding_mode == OV_WINDING_AXIS ? ov::WindingMode::AxisHardcoded
                                                               : ov::WindingMode::Directed;
        core.qef = {params->encode.qef.lambda_bound, params->encode.qef.lambda_reg};
        core.eval = to_core(params->eval);

        ov::Mesh mesh = ov::load_obj(mesh_path);
        ov::RoundtripResult result = ov::roundtrip_mesh(mesh, core);

        nlohmann::json j;
        j["input"] = mesh_path;
        j["resolution"] = core.resolution;
        j["direction_mode"] =
            core.direction == ov::DirectionMode::ExactRay ? "exact-ray" : "voxel-normal";
        j["winding_mode"] = core.winding == ov::WindingMode::Directed ? "directed" : "axis";
        j["lambda_bound"] = core.qef.lambda_bound;
        j["lambda_reg"] = core.qef.lambda_reg;
        j["encode"] = {{"intersected_edges", result.encode.intersected_edges},
                       {"active_voxels", result.encode.active_voxels},
                       {"hermite_samples", result.encode.hermite_samples},
                       {"clamped_dual_vertices", result.encode.clamped_dual_vertices}};
        j["decode"] = {{"quads", result.decode.quads},
                       {"degenerate_dropped", result.decode.degenerate_dropped}};
        j["metrics"] = nlohmann::json::parse(ov::report_json(result.report));
        *json_out = dup_string(j.dump());
    });
}

ov_status ov_bench_corpus(const char* corpus_dir, const uint32_t* resolutions,
                          size_t resolution_count, const ov_qef_params* qef,
                          const ov_eval_config* eval, char** long_csv, char** pivot_csv) {
    if (ov_status s = require(corpus_dir && resolutions && resolution_count > 0 && qef && eval &&
                                  long_csv,
                              "corpus_dir, resolutions, qef, eval and long_csv are required");
        s != OV_OK) {
        return s;
    }
    return guarded([&] {
        ov::QefParams core_qef{qef->lambda_bound, qef->lambda_reg};
        ov::BenchResult result = ov::bench_corpus(
            corpus_dir, std::span<const uint32_t>(resolutions, resolution_count), core_qef,
            to_core(*eval));
        *long_csv = dup_string(result.long_csv());
        if (pivot_csv != nullptr) *pivot_csv = dup_string(result.pivot_csv());
    });
}

}  // extern "C"
