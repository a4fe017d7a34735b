#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decode.hpp"
#include "encode.hpp"
#include "metrics.hpp"

namespace ov {

struct RoundtripParams {
    uint32_t resolution = 128;
    DirectionMode direction = DirectionMode::ExactRay;
    WindingMode winding = WindingMode::Directed;
    QefParams qef;
    EvalConfig eval;
    double margin = 0.0;  // 0 -> 1/resolution
};

struct RoundtripResult {
    EncodeStats encode;
    DecodeStats decode;
    MetricsReport report;  // decoded mesh vs the normalized input
};

RoundtripResult roundtrip_mesh(const Mesh& input, const RoundtripParams& params);

// The three representation variants benchmarked against each other: the
// axis-hardcoded baseline and the two directed-edge derivations.
struct BenchVariant {
    const char* name;
    DirectionMode direction;
    WindingMode winding;
};
std::span<const BenchVariant> bench_variants();

struct BenchCell {
    std::string mesh_name;
    uint32_t resolution = 0;
    std::string variant;
    std::optional<MetricsReport> report;
    std::string error;  // per-cell failure, run continues
};

struct BenchResult {
    std::vector<BenchCell> cells;  // sorted by (mesh, res, variant order)

    // long-format rows plus per-(res, variant) mean rows under mesh "mean"
    std::string long_csv() const;
    // wide summary: one row per (res, variant), metric columns
    std::string pivot_csv() const;
};

// Runs every manifest mesh through all three variants at every resolution.
// Cells execute in parallel; output depends only on the inputs.
BenchResult bench_corpus(const std::string& corpus_dir, std::span<const uint32_t> resolutions,
                         const QefParams& qef, const EvalConfig& eval);

}  // namespace ov
