#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "error.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace ov {

namespace {

void format_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, ptr);
}

constexpr BenchVariant kVariants[] = {
    {"axis", DirectionMode::ExactRay, WindingMode::AxisHardcoded},
    {"voxel-normal", DirectionMode::VoxelNormal, WindingMode::Directed},
    {"exact-ray", DirectionMode::ExactRay, WindingMode::Directed},
};

struct MetricMeans {
    double cd = 0, f_score = 0, iou = 0, rmse_u = 0, rmse_o = 0, orient = 0;
    double n_b = 0, n_c = 0, n_g = 0, tau_v = 0;
    size_t count = 0;

    void add(const MetricsReport& r) {
        cd += r.cd;
        f_score += r.f_score;
        iou += r.iou;
        rmse_u += r.rmse_u;
        rmse_o += r.rmse_o;
        orient += r.orient_correct_pct;
        n_b += static_cast<double>(r.n_b);
        n_c += static_cast<double>(r.n_c);
        n_g += static_cast<double>(r.n_g);
        tau_v += r.tau_v_pct;
        ++count;
    }

    void append_row(std::string& out) const {
        double inv = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
        for (double v : {cd, f_score, iou, rmse_u, rmse_o, orient, n_b, n_c, n_g, tau_v}) {
            out += ',';
            format_double(out, v * inv);
        }
    }
};

void append_metric_columns(std::string& out, const MetricsReport& r) {
    out += ',';
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
}

constexpr const char* kMetricColumns =
    "cd,f_score,iou,rmse_u,rmse_o,orient_correct_pct,n_b,n_c,n_g,tau_v_pct";

}  // namespace

RoundtripResult roundtrip_mesh(const Mesh& input, const RoundtripParams& params) {
    // Default margin sits the bounding box half a cell inside the first
    // lattice plane. At exactly 1/N the box extremes lie on grid corners and
    // tangential corner touches spawn unpaired quads.
    double margin = params.margin > 0.0 ? params.margin
                                        : 1.5 / static_cast<double>(params.resolution);
    if (margin < 1.0 / static_cast<double>(params.resolution)) {
        raise(Errc::invalid_argument, "margin must be at least 1/resolution");
    }
    Mesh normalized = normalize_to_unit_cube(input, margin);

    RoundtripResult out;
    FdgdGrid grid =
        encode_mesh(normalized, params.resolution, params.direction, params.qef, &out.encode);
    Mesh decoded = decode_grid(grid, params.winding, &out.decode);
    out.report = full_report(decoded, normalized, params.eval);
    return out;
}

std::span<const BenchVariant> bench_variants() { return kVariants; }

std::string BenchResult::long_csv() const {
    std::string out = "mesh,res,variant,";
    out += kMetricColumns;
    out += ",error\n";
    for (const BenchCell& cell : cells) {
        out += cell.mesh_name;
        out += ',';
        out += std::to_string(cell.resolution);
        out += ',';
        out += cell.variant;
        if (cell.report.has_value()) {
            append_metric_columns(out, *cell.report);
            out += ',';
        } else {
            out += ",,,,,,,,,,,";
            for (char c : cell.error) out += (c == ',' || c == '\n') ? ';' : c;
        }
        out += '\n';
    }

    // mean rows per (res, variant), in cell order
    std::vector<std::pair<uint32_t, std::string>> groups;
    for (const BenchCell& cell : cells) {
        std::pair<uint32_t, std::string> g{cell.resolution, cell.variant};
        if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        auto rank = [](const std::string& v) {
            for (size_t i = 0; i < std::size(kVariants); ++i) {
                if (v == kVariants[i].name) return i;
            }
            return std::size(kVariants);
        };
        return rank(a.second) < rank(b.second);
    });
    for (const auto& [res, variant] : groups) {
        MetricMeans means;
        for (const BenchCell& cell : cells) {
            if (cell.resolution == res && cell.variant == variant && cell.report.has_value()) {
                means.add(*cell.report);
            }
        }
        out += "mean,";
        out += std::to_string(res);
        out += ',';
        out += variant;
        means.append_row(out);
        out += ",\n";
    }
    return out;
}

std::string BenchResult::pivot_csv() const {
    std::string out = "res,variant,";
    out += kMetricColumns;
    out += "\n";
    for (const BenchVariant& variant : kVariants) {
        std::vector<uint32_t> resolutions;
        for (const BenchCell& cell : cells) {
            if (std::find(resolutions.begin(), resolutions.end(), cell.resolution) ==
                resolutions.end()) {
                resolutions.push_back(cell.resolution);
            }
        }
        std::sort(resolutions.begin(), resolutions.end());
        for (uint32_t res : resolutions) {
            MetricMeans means;
            for (const BenchCell& cell : cells) {
                if (cell.resolution == res && cell.variant == variant.name &&
                    cell.report.has_value()) {
                    means.add(*cell.report);
                }
            }
            out += std::to_string(res);
            out += ',';
            out += variant.name;
            means.append_row(out);
            out += '\n';
        }
    }
    return out;
}

BenchResult bench_corpus(const std::string& corpus_dir, std::span<const uint32_t> resolutions,
                         const QefParams& qef, const EvalConfig& eval) {
    std::string manifest_path = corpus_dir + "/manifest.json";
    std::ifstream in(manifest_path);
    if (!in) raise(Errc::io, "cannot open '" + manifest_path + "'");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "manifest.json: " + std::string(e.what()));
    }

    std::vector<std::pair<std::string, std::string>> meshes;  // name, path
    for (const auto& [name, entry] : manifest.items()) {
        if (!name.empty() && name[0] == '_') continue;  // metadata keys
        std::string file = entry.contains("file") ? entry["file"].get<std::string>()
                                                  : name + ".obj";
        meshes.emplace_back(name, corpus_dir + "/" + file);
    }
    std::sort(meshes.begin(), meshes.end());

    BenchResult result;
    for (const auto& [name, path] : meshes) {
        for (uint32_t res : resolutions) {
            for (const BenchVariant& variant : kVariants) {
                BenchCell cell;
                cell.mesh_name = name;
                cell.resolution = res;
                cell.variant = variant.name;
                result.cells.push_back(std::move(cell));
            }
        }
    }

    parallel_for(result.cells.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            BenchCell& cell = result.cells[i];
            const auto& mesh_entry = *std::find_if(
                meshes.begin(), meshes.end(),
                [&cell](const auto& m) { return m.first == cell.mesh_name; });
            const BenchVariant& variant = *std::find_if(
                std::begin(kVariants), std::end(kVariants),
                [&cell](const BenchVariant& v) { return cell.variant == v.name; });
            try {
                RoundtripParams params;
                params.resolution = cell.resolution;
                params.direction = variant.direction;
                params.winding = variant.winding;
                params.qef = qef;
                params.eval = eval;
                Mesh mesh = load_obj(mesh_entry.second);
                cell.report = roundtrip_mesh(mesh, params).report;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    });
    return result;
}

}  // namespace ov
