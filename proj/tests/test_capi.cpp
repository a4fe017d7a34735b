// Exercises the shared library through the C interface only.
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "ovoxel/ovoxel.h"

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string take(char* owned) {
    std::string out = owned != nullptr ? owned : "";
    ov_string_free(owned);
    return out;
}

}  // namespace

TEST_CASE("c api: defaults") {
    ov_encode_params params;
    ov_encode_params_init(&params);
    CHECK(params.resolution == 128);
    CHECK(params.direction_mode == OV_DIRECTION_EXACT_RAY);
    CHECK(params.qef.lambda_bound == 1.0);
    CHECK(params.qef.lambda_reg == 0.05);

    ov_eval_config cfg;
    ov_eval_config_init(&cfg);
    CHECK(cfg.cd_samples == 100000);
    CHECK(cfg.normal_samples == 10000);
    CHECK(cfg.f_tau == 0.03);
    CHECK(cfg.iou_res == 64);
    CHECK(cfg.global_flip == 1);
}

TEST_CASE("c api: null arguments are rejected") {
    CHECK(ov_mesh_load_obj(nullptr, nullptr) == OV_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(ov_last_error()) > 0);
    CHECK(ov_mesh_vertex_count(nullptr) == 0);
}

TEST_CASE("c api: io errors carry status codes") {
    ov_mesh* mesh = nullptr;
    CHECK(ov_mesh_load_obj("/nonexistent/path.obj", &mesh) == OV_ERR_IO);

    ov_grid* grid = nullptr;
    std::string bad = temp_path("ov_capi_bad.fdgd");
    std::ofstream(bad, std::ios::binary) << "XXXXnotagrid";
    CHECK(ov_grid_read(bad.c_str(), &grid) == OV_ERR_BAD_MAGIC);
}

TEST_CASE("c api: full pipeline over the shared surface") {
    // fixture -> obj -> load -> normalize -> encode -> write -> read ->
    // decode -> save -> evaluate
    ov_mesh* fixture = nullptr;
    REQUIRE(ov_fixture_generate("sphere", &fixture) == OV_OK);
    CHECK(ov_mesh_vertex_count(fixture) > 0);
    CHECK(ov_mesh_triangle_count(fixture) > 0);

    std::string obj_path = temp_path("ov_capi_sphere.obj");
    REQUIRE(ov_mesh_save_obj(fixture, obj_path.c_str()) == OV_OK);

    ov_mesh* loaded = nullptr;
    REQUIRE(ov_mesh_load_obj(obj_path.c_str(), &loaded) == OV_OK);
    CHECK(ov_mesh_triangle_count(loaded) == ov_mesh_triangle_count(fixture));

    ov_encode_params params;
    ov_encode_params_init(&params);
    params.resolution = 32;

    ov_mesh* normalized = nullptr;
    REQUIRE(ov_mesh_normalize_unit_cube(loaded, 1.0 / 32, &normalized) == OV_OK);

    ov_grid* grid = nullptr;
    ov_encode_stats stats{};
    REQUIRE(ov_encode(normalized, &params, &grid, &stats) == OV_OK);
    CHECK(stats.intersected_edges > 0);
    CHECK(stats.active_voxels > 0);
    CHECK(ov_grid_resolution(grid) == 32);
    CHECK(ov_grid_record_count(grid) == stats.active_voxels);
    CHECK(ov_grid_edge_count(grid) == stats.intersected_edges);

    size_t violations = 1;
    char* violations_json = nullptr;
    REQUIRE(ov_grid_validate(grid, &violations_json, &violations) == OV_OK);
    CHECK(violations == 0);
    CHECK(take(violations_json) == "[]");

    std::string grid_path = temp_path("ov_capi_sphere.fdgd");
    REQUIRE(ov_grid_write(grid, grid_path.c_str()) == OV_OK);
    ov_grid* grid_back = nullptr;
    REQUIRE(ov_grid_read(grid_path.c_str(), &grid_back) == OV_OK);
    CHECK(ov_grid_record_count(grid_back) == ov_grid_record_count(grid));

    ov_mesh* decoded = nullptr;
    uint64_t dropped = 0;
    REQUIRE(ov_decode(grid_back, OV_WINDING_DIRECTED, &decoded, &dropped) == OV_OK);
    CHECK(ov_mesh_triangle_count(decoded) + dropped == 2 * stats.intersected_edges);

    ov_eval_config cfg;
    ov_eval_config_init(&cfg);
    cfg.cd_samples = 10000;
    cfg.normal_samples = 2000;
    ov_metrics_report report{};
    REQUIRE(ov_evaluate(decoded, normalized, &cfg, &report) == OV_OK);
    CHECK(report.f_score > 0.97);
    CHECK(report.orient_correct_pct > 99.0);
    CHECK(report.rmse_u <= report.rmse_o + 1e-9);

    char* json = nullptr;
    REQUIRE(ov_report_json(&report, &json) == OV_OK);
    std::string json_text = take(json);
    CHECK(json_text.find("\"orient_correct_pct\"") != std::string::npos);

    char* csv = nullptr;
    REQUIRE(ov_report_csv(&report, 1, &csv) == OV_OK);
    std::string csv_text = take(csv);
    CHECK(csv_text.find("cd,f_score,iou,") == 0);

    ov_mesh_free(fixture);
    ov_mesh_free(loaded);
    ov_mesh_free(normalized);
    ov_mesh_free(decoded);
    ov_grid_free(grid);
    ov_grid_free(grid_back);
}

TEST_CASE("c api: unnormalized input to encode fails with a status") {
    std::string path = temp_path("ov_capi_unnorm.obj");
    std::ofstream(path, std::ios::binary)
        << "v 0 0 0.5\nv 1 0 0.5\nv 1 1 0.5\nv 0 1 0.5\nf 1 2 3 4\n";  // touches the domain walls
    ov_mesh* mesh = nullptr;
    REQUIRE(ov_mesh_load_obj(path.c_str(), &mesh) == OV_OK);
    ov_encode_params params;
    ov_encode_params_init(&params);
    params.resolution = 64;
    ov_grid* grid = nullptr;
    ov_status s = ov_encode(mesh, &params, &grid, nullptr);
    CHECK(s == OV_ERR_NORMALIZATION);
    ov_mesh_free(mesh);
}

TEST_CASE("c api: roundtrip json") {
    ov_mesh* fixture = nullptr;
    REQUIRE(ov_fixture_generate("cylinder", &fixture) == OV_OK);
    std::string obj_path = temp_path("ov_capi_cyl.obj");
    REQUIRE(ov_mesh_save_obj(fixture, obj_path.c_str()) == OV_OK);
    ov_mesh_free(fixture);

    ov_roundtrip_params params;
    ov_roundtrip_params_init(&params);
    params.encode.resolution = 32;
    params.eval.cd_samples = 10000;
    params.eval.normal_samples = 2000;

    char* json = nullptr;
    REQUIRE(ov_roundtrip_file(obj_path.c_str(), &params, &json) == OV_OK);
    std::string text = take(json);
    CHECK(text.find("\"encode\"") != std::string::npos);
    CHECK(text.find("\"metrics\"") != std::string::npos);
    CHECK(text.find("\"winding_mode\":\"directed\"") != std::string::npos);
}

TEST_CASE("c api: fixture names validated") {
    ov_mesh* mesh = nullptr;
    CHECK(ov_fixture_generate("dodecahedron", &mesh) == OV_ERR_INVALID_ARGUMENT);
}
