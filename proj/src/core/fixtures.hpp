#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace ov {

// Deterministic synthetic shapes with consistent outward/upward winding and
// known topology, covering closed, open, and mixed-component surfaces.
enum class FixtureShape { Sphere, Torus, PlanePatch, OpenCylinder, WavySheet, HybridScene };

struct FixtureSpec {
    FixtureShape shape = FixtureShape::Sphere;
    int segments_u = 48;       // around / along the dominant parameter
    int segments_v = 24;
    double radius = 0.4;       // primary radius / patch half-size
    double radius2 = 0.13;     // tube radius (torus), height half-extent (cylinder)
    double amplitude = 0.34;   // sheet height amplitude
    double frequency = 9.42477796076938;  // sheet angular frequency (3*pi)

    static FixtureSpec defaults(FixtureShape shape);
};

struct FixtureTopology {
    uint64_t n_c = 0;         // boundary loops
    uint64_t n_g = 0;         // genus
    uint64_t components = 0;  // connected components
};

struct Fixture {
    std::string name;
    Mesh mesh;
    FixtureTopology expected;
    // ground-truth orientation at a surface point (generator coordinates)
    std::function<Vec3(const Vec3&)> analytic_normal;
};

Fixture generate(const FixtureSpec& spec);

const std::vector<std::string>& fixture_names();
FixtureShape fixture_shape_by_name(const std::string& name);

// Writes all six fixtures as OBJ plus manifest.json mapping each name to its
// expected topology and parameters. Reruns are byte-identical. Returns the
// written file paths (manifest last).
std::vector<std::string> generate_corpus(const std::string& directory, uint64_t seed);

}  // namespace ov
