/* ovoxel — sparse dual-grid surface representation with directed edges.
 *
 * C interface of the shared library. Objects are opaque handles created and
 * destroyed through this API; every fallible call returns an ov_status and
 * leaves a human-readable message in ov_last_error() (thread-local, valid
 * until the next failing call on the same thread).
 */
#ifndef OVOXEL_H
#define OVOXEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OV_API __declspec(dllexport)
#else
#define OV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ov_status {
    OV_OK = 0,
    OV_ERR_INVALID_ARGUMENT = 1,
    OV_ERR_IO = 2,
    OV_ERR_PARSE = 3,
    OV_ERR_EMPTY_MESH = 4,
    OV_ERR_NORMALIZATION = 5,
    OV_ERR_BAD_MAGIC = 6,
    OV_ERR_BAD_VERSION = 7,
    OV_ERR_TRUNCATED = 8,
    OV_ERR_RESERVED_BITS = 9,
    OV_ERR_CORRUPT = 10,
    OV_ERR_INVALID_GRID = 11,
    OV_ERR_INTERNAL = 12
} ov_status;

typedef enum ov_direction_mode {
    OV_DIRECTION_EXACT_RAY = 0,   /* direction from the edge's true crossing */
    OV_DIRECTION_VOXEL_NORMAL = 1 /* direction from the voxel-averaged normal */
} ov_direction_mode;

typedef enum ov_winding_mode {
    OV_WINDING_DIRECTED = 0, /* quad winding recovered from stored directions */
    OV_WINDING_AXIS = 1      /* winding hardcoded per coordinate axis */
} ov_winding_mode;

typedef struct ov_mesh ov_mesh;
typedef struct ov_grid ov_grid;

typedef struct ov_qef_params {
    double lambda_bound; /* open-boundary alignment weight, default 1.0 */
    double lambda_reg;   /* centroid regularizer, default 0.05, must be > 0 */
} ov_qef_params;

typedef struct ov_encode_params {
    uint32_t resolution; /* grid resolution N, default 128 */
    int direction_mode;  /* ov_direction_mode */
    ov_qef_params qef;
} ov_encode_params;

typedef struct ov_eval_config {
    uint32_t cd_samples;     /* default 100000 */
    uint32_t normal_samples; /* default 10000 */
    double f_tau;            /* default 0.03 */
    uint32_t iou_res;        /* default 64 */
    uint64_t seed;
    int global_flip;         /* default 1 */
} ov_eval_config;

typedef struct ov_metrics_report {
    double cd;
    double f_score;
    double iou;
    double rmse_u;             /* degrees */
    double rmse_o;             /* degrees */
    double orient_correct_pct; /* percent */
    uint64_t n_b;
    uint64_t n_c;
    uint64_t n_g;
    double tau_v_pct;
    int genus_clamped;
    ov_eval_config config;
} ov_metrics_report;

typedef struct ov_encode_stats {
    uint64_t intersected_edges;
    uint64_t active_voxels;
    uint64_t hermite_samples;
    uint64_t clamped_dual_vertices;
} ov_encode_stats;

/* ---- defaults & errors --------------------------------------------------*/

OV_API void ov_encode_params_init(ov_encode_params* params);
OV_API void ov_eval_config_init(ov_eval_config* config);
OV_API const char* ov_status_name(ov_status status);
OV_API const char* ov_last_error(void);

/* Frees strings returned through char** out-parameters. */
OV_API void ov_string_free(char* str);

/* ---- meshes -------------------------------------------------------------*/

OV_API ov_status ov_mesh_load_obj(const char* path, ov_mesh** out);
OV_API ov_status ov_mesh_save_obj(const ov_mesh* mesh, const char* path);
OV_API void ov_mesh_free(ov_mesh* mesh);
OV_API size_t ov_mesh_vertex_count(const ov_mesh* mesh);
OV_API size_t ov_mesh_triangle_count(const ov_mesh* mesh);

/* Centers the bounding box inside [margin, 1-margin]^3 with uniform scale. */
OV_API ov_status ov_mesh_normalize_unit_cube(const ov_mesh* mesh, double margin, ov_mesh** out);

/* ---- grids --------------------------------------------------------------*/

OV_API ov_status ov_grid_read(const char* path, ov_grid** out);
OV_API ov_status ov_grid_write(const ov_grid* grid, const char* path);
OV_API void ov_grid_free(ov_grid* grid);
OV_API uint32_t ov_grid_resolution(const ov_grid* grid);
OV_API size_t ov_grid_record_count(const ov_grid* grid);
OV_API size_t ov_grid_edge_count(const ov_grid* grid);

/* violations_json receives a JSON array describing each violated invariant
 * (empty array for a valid grid); pass NULL to only count them. */
OV_API ov_status ov_grid_validate(const ov_grid* grid, char** violations_json, size_t* count);

/* ---- conversion ---------------------------------------------------------*/

/* The mesh must already be normalized into [1/N, 1-1/N]^3. */
OV_API ov_status ov_encode(const ov_mesh* mesh, const ov_encode_params* params, ov_grid** out,
                           ov_encode_stats* stats);
OV_API ov_status ov_decode(const ov_grid* grid, int winding_mode, ov_mesh** out,
                           uint64_t* degenerate_dropped);

/* ---- evaluation ---------------------------------------------------------*/

OV_API ov_status ov_evaluate(const ov_mesh* pred, const ov_mesh* gt, const ov_eval_config* config,
                             ov_metrics_report* out);
OV_API ov_status ov_report_json(const ov_metrics_report* report, char** out);
OV_API ov_status ov_report_csv(const ov_metrics_report* report, int include_header, char** out);

/* ---- fixtures -----------------------------------------------------------*/

/* name: sphere | torus | plane | cylinder | wavysheet | hybrid */
OV_API ov_status ov_fixture_generate(const char* name, ov_mesh** out);

/* Writes the six fixtures plus manifest.json; files_json receives a JSON
 * array of the written paths. */
OV_API ov_status ov_fixtures_write_corpus(const char* directory, uint64_t seed, char** files_json);

/* ---- pipeline -----------------------------------------------------------*/

typedef struct ov_roundtrip_params {
    ov_encode_params encode;
    int winding_mode; /* ov_winding_mode */
    ov_eval_config eval;
} ov_roundtrip_params;

OV_API void ov_roundtrip_params_init(ov_roundtrip_params* params);

/* Normalize -> encode -> decode -> evaluate against the normalized input.
 * json_out receives the combined report (encode stats + metrics). */
OV_API ov_status ov_roundtrip_file(const char* mesh_path, const ov_roundtrip_params* params,
                                   char** json_out);

/* Runs the three-variant ablation over every mesh in the corpus manifest at
 * each resolution. long_csv gets per-cell rows plus mean rows; pivot_csv
 * (optional, pass NULL to skip) gets the wide per-variant summary. */
OV_API ov_status ov_bench_corpus(const char* corpus_dir, const uint32_t* resolutions,
                                 size_t resolution_count, const ov_qef_params* qef,
                                 const ov_eval_config* eval, char** long_csv, char** pivot_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OVOXEL_H */
