// ovoxel command-line front end. Talks to the core exclusively through the
// shared library's C interface; exit status is 0 on success, 1 on usage
// errors, 2 on runtime failures.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ovoxel/ovoxel.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct MeshDeleter {
    void operator()(ov_mesh* m) const { ov_mesh_free(m); }
};
struct GridDeleter {
    void operator()(ov_grid* g) const { ov_grid_free(g); }
};
using MeshPtr = std::unique_ptr<ov_mesh, MeshDeleter>;
using GridPtr = std::unique_ptr<ov_grid, GridDeleter>;

std::string take_string(char* owned) {
    std::string out = owned != nullptr ? owned : "";
    ov_string_free(owned);
    return out;
}

[[noreturn]] void fail(ov_status status) {
    std::cerr << "error: " << ov_status_name(status) << ": " << ov_last_error() << "\n";
    std::exit(kExitRuntime);
}

void check(ov_status status) {
    if (status != OV_OK) fail(status);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open '" << path << "' for writing\n";
        std::exit(kExitRuntime);
    }
    out << content;
    if (!out) {
        std::cerr << "error: write failed for '" << path << "'\n";
        std::exit(kExitRuntime);
    }
}

void emit(const nlohmann::json& j) { std::cout << j.dump() << "\n"; }

int direction_mode_of(const std::string& name) {
    return name == "voxel-normal" ? OV_DIRECTION_VOXEL_NORMAL : OV_DIRECTION_EXACT_RAY;
}

int winding_mode_of(const std::string& name) {
    return name == "axis" ? OV_WINDING_AXIS : OV_WINDING_DIRECTED;
}

void add_eval_options(CLI::App* cmd, ov_eval_config& eval) {
    cmd->add_option("--cd-samples", eval.cd_samples, "surface samples per side for CD/F-Score");
    cmd->add_option("--normal-samples", eval.normal_samples, "samples for normal metrics");
    cmd->add_option("--f-tau", eval.f_tau, "F-Score distance threshold");
    cmd->add_option("--iou-res", eval.iou_res, "occupancy grid resolution");
    cmd->add_option("--seed", eval.seed, "sampling seed");
    cmd->add_flag_callback("--no-global-flip", [&eval] { eval.global_flip = 0; },
                           "disable the global normal-flip allowance");
}

nlohmann::json report_to_json(const ov_metrics_report& report) {
    char* owned = nullptr;
    check(ov_report_json(&report, &owned));
    return nlohmann::json::parse(take_string(owned));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse dual-grid surface codec with directed edges"};
    app.require_subcommand(1);

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "generate the synthetic mesh corpus");
    std::string fixtures_out;
    uint64_t fixtures_seed = 0;
    fixtures->add_option("--out", fixtures_out, "output directory")->required();
    fixtures->add_option("--seed", fixtures_seed, "recorded in the manifest");

    // encode
    auto* encode = app.add_subcommand("encode", "convert a mesh into a .fdgd grid");
    std::string encode_in, encode_out, encode_mode = "exact-ray";
    ov_encode_params encode_params;
    ov_encode_params_init(&encode_params);
    double encode_margin = 0.0;
    encode->add_option("--in", encode_in, "input OBJ mesh")->required();
    encode->add_option("--out", encode_out, "output .fdgd file")->required();
    encode->add_option("--res", encode_params.resolution, "grid resolution N");
    encode->add_option("--mode", encode_mode, "exact-ray | voxel-normal")
        ->check(CLI::IsMember({"exact-ray", "voxel-normal"}));
    encode->add_option("--lambda-bound", encode_params.qef.lambda_bound, "boundary term weight");
    encode->add_option("--lambda-reg", encode_params.qef.lambda_reg, "regularizer weight");
    encode->add_option("--margin", encode_margin, "normalization margin (default 1.5/N)");

    // decode
    auto* decode = app.add_subcommand("decode", "reconstruct a mesh from a .fdgd grid");
    std::string decode_in, decode_out, decode_winding = "directed";
    decode->add_option("--in", decode_in, "input .fdgd file")->required();
    decode->add_option("--out", decode_out, "output OBJ mesh")->required();
    decode->add_option("--winding", decode_winding, "directed | axis")
        ->check(CLI::IsMember({"directed", "axis"}));

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a prediction against a ground truth");
    std::string eval_pred, eval_gt, eval_out;
    ov_eval_config eval_cfg;
    ov_eval_config_init(&eval_cfg);
    eval_cmd->add_option("--pred", eval_pred, "prediction OBJ")->required();
    eval_cmd->add_option("--gt", eval_gt, "ground-truth OBJ")->required();
    eval_cmd->add_option("--out", eval_out, "report file (.json or .csv)")->required();
    add_eval_options(eval_cmd, eval_cfg);

    // roundtrip
    auto* roundtrip = app.add_subcommand("roundtrip", "encode, decode and evaluate one mesh");
    std::string rt_in, rt_report, rt_mode = "exact-ray", rt_winding = "directed";
    ov_roundtrip_params rt_params;
    ov_roundtrip_params_init(&rt_params);
    roundtrip->add_option("--in", rt_in, "input OBJ mesh")->required();
    roundtrip->add_option("--report", rt_report, "combined JSON report path")->required();
    roundtrip->add_option("--res", rt_params.encode.resolution, "grid resolution N");
    roundtrip->add_option("--mode", rt_mode, "exact-ray | voxel-normal")
        ->check(CLI::IsMember({"exact-ray", "voxel-normal"}));
    roundtrip->add_option("--winding", rt_winding, "directed | axis")
        ->check(CLI::IsMember({"directed", "axis"}));
    roundtrip->add_option("--lambda-bound", rt_params.encode.qef.lambda_bound,
                          "boundary term weight");
    roundtrip->add_option("--lambda-reg", rt_params.encode.qef.lambda_reg, "regularizer weight");
    add_eval_options(roundtrip, rt_params.eval);

    // bench
    auto* bench = app.add_subcommand("bench", "three-variant ablation over a fixture corpus");
    std::string bench_corpus_dir, bench_out, bench_pivot;
    std::vector<uint32_t> bench_res = {128};
    ov_qef_params bench_qef{1.0, 0.05};
    ov_eval_config bench_eval;
    ov_eval_config_init(&bench_eval);
    bench->add_option("--corpus", bench_corpus_dir, "corpus directory with manifest.json")
        ->required();
    bench->add_option("--out", bench_out, "long-format CSV path")->required();
    bench->add_option("--res", bench_res, "resolution list (comma or space separated)")
        ->delimiter(',');
    bench->add_option("--pivot", bench_pivot, "also write the wide per-variant summary here");
    bench->add_option("--lambda-bound", bench_qef.lambda_bound, "boundary term weight");
    bench->add_option("--lambda-reg", bench_qef.lambda_reg, "regularizer weight");
    add_eval_options(bench, bench_eval);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints the message / help text
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (fixtures->parsed()) {
        char* files_json = nullptr;
        check(ov_fixtures_write_corpus(fixtures_out.c_str(), fixtures_seed, &files_json));
        nlohmann::json j;
        j["command"] = "fixtures";
        j["out"] = fixtures_out;
        j["seed"] = fixtures_seed;
        j["files"] = nlohmann::json::parse(take_string(files_json));
        emit(j);
        return kExitOk;
    }

    if (encode->parsed()) {
        encode_params.direction_mode = direction_mode_of(encode_mode);
        if (encode_params.resolution < 8) {
            std::cerr << "error: --res must be at least 8\n";
            return kExitUsage;
        }
        double margin = encode_margin > 0.0
                            ? encode_margin
                            : 1.5 / static_cast<double>(encode_params.resolution);
        if (margin < 1.0 / static_cast<double>(encode_params.resolution)) {
            std::cerr << "error: --margin must be at least 1/N\n";
            return kExitUsage;
        }

        ov_mesh* raw = nullptr;
        check(ov_mesh_load_obj(encode_in.c_str(), &raw));
        MeshPtr mesh(raw);
        ov_mesh* normalized_raw = nullptr;
        check(ov_mesh_normalize_unit_cube(mesh.get(), margin, &normalized_raw));
        MeshPtr normalized(normalized_raw);

        ov_grid* grid_raw = nullptr;
        ov_encode_stats stats{};
        check(ov_encode(normalized.get(), &encode_params, &grid_raw, &stats));
        GridPtr grid(grid_raw);
        check(ov_grid_write(grid.get(), encode_out.c_str()));

        nlohmann::json j;
        j["command"] = "encode";
        j["in"] = encode_in;
        j["out"] = encode_out;
        j["resolution"] = encode_params.resolution;
        j["mode"] = encode_mode;
        j["margin"] = margin;
        j["active_voxels"] = stats.active_voxels;
        j["intersected_edges"] = stats.intersected_edges;
        j["hermite_samples"] = stats.hermite_samples;
        j["clamped_dual_vertices"] = stats.clamped_dual_vertices;
        emit(j);
        return kExitOk;
    }

    if (decode->parsed()) {
        ov_grid* grid_raw = nullptr;
        check(ov_grid_read(decode_in.c_str(), &grid_raw));
        GridPtr grid(grid_raw);
        ov_mesh* mesh_raw = nullptr;
        uint64_t dropped = 0;
        check(ov_decode(grid.get(), winding_mode_of(decode_winding), &mesh_raw, &dropped));
        MeshPtr mesh(mesh_raw);
        check(ov_mesh_save_obj(mesh.get(), decode_out.c_str()));

        nlohmann::json j;
        j["command"] = "decode";
        j["in"] = decode_in;
        j["out"] = decode_out;
        j["winding"] = decode_winding;
        j["vertices"] = ov_mesh_vertex_count(mesh.get());
        j["triangles"] = ov_mesh_triangle_count(mesh.get());
        j["degenerate_dropped"] = dropped;
        emit(j);
        return kExitOk;
    }

    if (eval_cmd->parsed()) {
        ov_mesh* pred_raw = nullptr;
        check(ov_mesh_load_obj(eval_pred.c_str(), &pred_raw));
        MeshPtr pred(pred_raw);
        ov_mesh* gt_raw = nullptr;
        check(ov_mesh_load_obj(eval_gt.c_str(), &gt_raw));
        MeshPtr gt(gt_raw);

        ov_metrics_report report{};
        check(ov_evaluate(pred.get(), gt.get(), &eval_cfg, &report));

        bool csv = eval_out.size() >= 4 && eval_out.substr(eval_out.size() - 4) == ".csv";
        char* owned = nullptr;
        if (csv) {
            check(ov_report_csv(&report, 1, &owned));
        } else {
            check(ov_report_json(&report, &owned));
        }
        write_file(eval_out, take_string(owned) + (csv ? "" : "\n"));

        nlohmann::json j;
        j["command"] = "eval";
        j["pred"] = eval_pred;
        j["gt"] = eval_gt;
        j["out"] = eval_out;
        j["report"] = report_to_json(report);
        emit(j);
        return kExitOk;
    }

    if (roundtrip->parsed()) {
        rt_params.encode.direction_mode = direction_mode_of(rt_mode);
        rt_params.winding_mode = winding_mode_of(rt_winding);
        if (rt_params.encode.resolution < 8) {
            std::cerr << "error: --res must be at least 8\n";
            return kExitUsage;
        }
        char* owned = nullptr;
        check(ov_roundtrip_file(rt_in.c_str(), &rt_params, &owned));
        std::string json_text = take_string(owned);
        write_file(rt_report, json_text + "\n");

        nlohmann::json j = nlohmann::json::parse(json_text);
        j["command"] = "roundtrip";
        j["report_path"] = rt_report;
        emit(j);
        return kExitOk;
    }

    if (bench->parsed()) {
        for (uint32_t res : bench_res) {
            if (res < 8) {
                std::cerr << "error: --res values must be at least 8\n";
                return kExitUsage;
            }
        }
        char* long_csv = nullptr;
        char* pivot_csv = nullptr;
        check(ov_bench_corpus(bench_corpus_dir.c_str(), bench_res.data(), bench_res.size(),
                              &bench_qef, &bench_eval, &long_csv,
                              bench_pivot.empty() ? nullptr : &pivot_csv));
        std::string long_text = take_string(long_csv);
        write_file(bench_out, long_text);
        if (!bench_pivot.empty()) write_file(bench_pivot, take_string(pivot_csv));

        size_t rows = 0;
        for (char c : long_text) rows += c == '\n' ? 1 : 0;
        nlohmann::json j;
        j["command"] = "bench";
        j["corpus"] = bench_corpus_dir;
        j["out"] = bench_out;
        j["rows"] = rows > 0 ? rows - 1 : 0;  // minus header
        if (bench_pivot.empty()) {
            j["pivot"] = nullptr;
        } else {
            j["pivot"] = bench_pivot;
        }
        emit(j);
        return kExitOk;
    }

    return kExitUsage;
}
