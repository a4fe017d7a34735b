#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "error.hpp"
#include "json.hpp"

namespace ov {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Vec3 kCenter{0.5, 0.5, 0.5};

void add_quad(Mesh& mesh, uint32_t p00, uint32_t p10, uint32_t p11, uint32_t p01) {
    mesh.triangles.push_back({p00, p10, p11});
    mesh.triangles.push_back({p00, p11, p01});
}

Fixture make_sphere(const FixtureSpec& s, const Vec3& center, double radius) {
    Fixture f;
    f.name = "sphere";
    f.expected = {0, 0, 1};
    int nu = s.segments_u, nv = s.segments_v;
    Mesh& m = f.mesh;

    uint32_t top = 0;
    m.vertices.push_back(center + Vec3{0, 0, radius});
    for (int v = 1; v < nv; ++v) {
        double phi = kPi * v / nv;
        for (int u = 0; u < nu; ++u) {
            double theta = 2.0 * kPi * u / nu;
            m.vertices.push_back(center + Vec3{radius * std::sin(phi) * std::cos(theta),
                                               radius * std::sin(phi) * std::sin(theta),
                                               radius * std::cos(phi)});
        }
    }
    uint32_t bottom = static_cast<uint32_t>(m.vertices.size());
    m.vertices.push_back(center + Vec3{0, 0, -radius});

    auto ring = [nu](int v, int u) { return 1 + static_cast<uint32_t>((v - 1) * nu + (u % nu)); };
    for (int u = 0; u < nu; ++u) m.triangles.push_back({top, ring(1, u), ring(1, u + 1)});
    for (int v = 1; v + 1 < nv; ++v) {
        for (int u = 0; u < nu; ++u) {
            add_quad(m, ring(v, u), ring(v + 1, u), ring(v + 1, u + 1), ring(v, u + 1));
        }
    }
    for (int u = 0; u < nu; ++u) m.triangles.push_back({ring(nv - 1, u), bottom, ring(nv - 1, u + 1)});

    f.analytic_normal = [center](const Vec3& p) { return normalized(p - center); };
    return f;
}

Fixture make_torus(const FixtureSpec& s) {
    Fixture f;
    f.name = "torus";
    f.expected = {0, 1, 1};
    int nu = s.segments_u, nv = s.segments_v;
    double R = s.radius, r = s.radius2;
    Mesh& m = f.mesh;

    for (int u = 0; u < nu; ++u) {
        double tu = 2.0 * kPi * u / nu;
        for (int v = 0; v < nv; ++v) {
            double tv = 2.0 * kPi * v / nv;
            m.vertices.push_back(kCenter + Vec3{(R + r * std::cos(tv)) * std::cos(tu),
                                                (R + r * std::cos(tv)) * std::sin(tu),
                                                r * std::sin(tv)});
        }
    }
    auto at = [nu, nv](int u, int v) {
        return static_cast<uint32_t>((u % nu) * nv + (v % nv));
    };
    for (int u = 0; u < nu; ++u) {
        for (int v = 0; v < nv; ++v) {
            add_quad(m, at(u, v), at(u + 1, v), at(u + 1, v + 1), at(u, v + 1));
        }
    }

    f.analytic_normal = [R](const Vec3& p) {
        Vec3 q = p - kCenter;
        Vec3 radial{q.x, q.y, 0.0};
        Vec3 ring = normalized(radial) * R;
        return normalized(q - ring);
    };
    return f;
}

Fixture make_plane(const FixtureSpec& s) {
    Fixture f;
    f.name = "plane";
    f.expected = {1, 0, 1};
    int n = s.segments_u;
    double half = s.radius;
    Mesh& m = f.mesh;

    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            m.vertices.push_back({0.5 - half + 2.0 * half * i / n, 0.5 - half + 2.0 * half * j / n,
                                  0.5});
        }
    }
    auto at = [n](int i, int j) { return static_cast<uint32_t>(j * (n + 1) + i); };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            add_quad(m, at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
        }
    }
    f.analytic_normal = [](const Vec3&) { return Vec3{0, 0, 1}; };
    return f;
}

Fixture make_cylinder(const FixtureSpec& s) {
    Fixture f;
    f.name = "cylinder";
    f.expected = {2, 0, 1};
    int nu = s.segments_u, nv = s.segments_v;
    double r = s.radius, hh = s.radius2;
    Mesh& m = f.mesh;

    for (int v = 0; v <= nv; ++v) {
        double z = 0.5 - hh + 2.0 * hh * v / nv;
        for (int u = 0; u < nu; ++u) {
            double theta = 2.0 * kPi * u / nu;
            m.vertices.push_back({0.5 + r * std::cos(theta), 0.5 + r * std::sin(theta), z});
        }
    }
    auto at = [nu](int v, int u) { return static_cast<uint32_t>(v * nu + (u % nu)); };
    for (int v = 0; v < nv; ++v) {
        for (int u = 0; u < nu; ++u) {
            add_quad(m, at(v, u), at(v, u + 1), at(v + 1, u + 1), at(v + 1, u));
        }
    }
    f.analytic_normal = [](const Vec3& p) { return normalized(Vec3{p.x - 0.5, p.y - 0.5, 0.0}); };
    return f;
}

// Height-field sheet z = 0.5 + A sin(w u) sin(w v). The default amplitude is
// steep on purpose: a large share of its crossings land on horizontal grid
// edges whose hardcoded winding flips half of them, which is the failure mode
// the directed decode is meant to remove.
Fixture make_wavysheet(const FixtureSpec& s, const Vec3& center, double half, double amp,
                       double freq, const char* name) {
    Fixture f;
    f.name = name;
    f.expected = {1, 0, 1};
    int n = s.segments_u;
    Mesh& m = f.mesh;

    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            double u = -half + 2.0 * half * i / n;
            double v = -half + 2.0 * half * j / n;
            m.vertices.push_back(center +
                                 Vec3{u, v, amp * std::sin(freq * u) * std::sin(freq * v)});
        }
    }
    auto at = [n](int i, int j) { return static_cast<uint32_t>(j * (n + 1) + i); };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            add_quad(m, at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
        }
    }
    f.analytic_normal = [center, amp, freq](const Vec3& p) {
        double u = p.x - center.x;
        double v = p.y - center.y;
        return normalized(Vec3{-amp * freq * std::cos(freq * u) * std::sin(freq * v),
                               -amp * freq * std::sin(freq * u) * std::cos(freq * v), 1.0});
    };
    return f;
}

Fixture make_hybrid(const FixtureSpec& s) {
    // steep sheet on the left, disjoint closed sphere on the right
    const Vec3 sheet_center{0.25, 0.5, 0.5};
    const Vec3 sphere_center{0.72, 0.5, 0.5};
    const double sphere_radius = 0.17;

    FixtureSpec sheet_spec = s;
    sheet_spec.segments_u = 64;
    Fixture sheet = make_wavysheet(sheet_spec, sheet_center, 0.2, 0.17,
                                   2.0 * s.frequency, "hybrid");

    FixtureSpec sphere_spec = s;
    sphere_spec.segments_u = 32;
    sphere_spec.segments_v = 16;
    Fixture sphere = make_sphere(sphere_spec, sphere_center, sphere_radius);

    Fixture f;
    f.name = "hybrid";
    f.expected = {1, 0, 2};
    f.mesh = std::move(sheet.mesh);
    uint32_t offset = static_cast<uint32_t>(f.mesh.vertices.size());
    for (const Vec3& v : sphere.mesh.vertices) f.mesh.vertices.push_back(v);
    for (const auto& t : sphere.mesh.triangles) {
        f.mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }

    auto sheet_normal = sheet.analytic_normal;
    f.analytic_normal = [sheet_normal, sphere_center](const Vec3& p) {
        if (norm(p - sphere_center) < 0.22) return normalized(p - sphere_center);
        return sheet_normal(p);
    };
    return f;
}

}  // namespace

FixtureSpec FixtureSpec::defaults(FixtureShape shape) {
    FixtureSpec s;
    s.shape = shape;
    switch (shape) {
        case FixtureShape::Sphere:
            s.radius = 0.4;
            break;
        case FixtureShape::Torus:
            s.radius = 0.28;
            s.radius2 = 0.13;
            break;
        case FixtureShape::PlanePatch:
            s.segments_u = 24;
            s.radius = 0.35;
            break;
        case FixtureShape::OpenCylinder:
            s.radius = 0.3;
            s.radius2 = 0.3;
            s.segments_v = 24;
            break;
        case FixtureShape::WavySheet:
            s.segments_u = 96;
            s.radius = 0.4;
            s.amplitude = 0.34;
            break;
        case FixtureShape::HybridScene:
            break;
    }
    return s;
}

Fixture generate(const FixtureSpec& spec) {
    if (spec.segments_u < 3 || spec.segments_v < 3) {
        raise(Errc::invalid_argument, "fixture tessellation needs at least 3 segments");
    }
    if (spec.radius <= 0.0 || spec.radius > 0.5 || spec.radius2 <= 0.0 || spec.radius2 > 0.5) {
        raise(Errc::invalid_argument, "fixture radii must lie in (0, 0.5]");
    }
    switch (spec.shape) {
        case FixtureShape::Sphere:
            return make_sphere(spec, kCenter, spec.radius);
        case FixtureShape::Torus:
            if (spec.radius + spec.radius2 > 0.5) {
                raise(Errc::invalid_argument, "torus exceeds the unit cube");
            }
            return make_torus(spec);
        case FixtureShape::PlanePatch:
            return make_plane(spec);
        case FixtureShape::OpenCylinder:
            return make_cylinder(spec);
        case FixtureShape::WavySheet:
            if (spec.amplitude >= 0.5) raise(Errc::invalid_argument, "sheet amplitude too large");
            return make_wavysheet(spec, kCenter, spec.radius, spec.amplitude, spec.frequency,
                                  "wavysheet");
        case FixtureShape::HybridScene:
            return make_hybrid(spec);
    }
    raise(Errc::invalid_argument, "unknown fixture shape");
}

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"sphere",   "torus",     "plane",
                                                   "cylinder", "wavysheet", "hybrid"};
    return names;
}

FixtureShape fixture_shape_by_name(const std::string& name) {
    if (name == "sphere") return FixtureShape::Sphere;
    if (name == "torus") return FixtureShape::Torus;
    if (name == "plane") return FixtureShape::PlanePatch;
    if (name == "cylinder") return FixtureShape::OpenCylinder;
    if (name == "wavysheet") return FixtureShape::WavySheet;
    if (name == "hybrid") return FixtureShape::HybridScene;
    raise(Errc::invalid_argument, "unknown fixture '" + name + "'");
}

std::vector<std::string> generate_corpus(const std::string& directory, uint64_t seed) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) raise(Errc::io, "cannot create directory '" + directory + "': " + ec.message());

    nlohmann::json manifest;
    std::vector<std::string> written;

    for (const std::string& name : fixture_names()) {
        FixtureSpec spec = FixtureSpec::defaults(fixture_shape_by_name(name));
        Fixture f = generate(spec);
        std::string path = directory + "/" + name + ".obj";
        save_obj(f.mesh, path);
        written.push_back(path);

        nlohmann::json entry;
        entry["file"] = name + ".obj";
        entry["n_c"] = f.expected.n_c;
        entry["n_g"] = f.expected.n_g;
        entry["components"] = f.expected.components;
        entry["params"] = {{"segments_u", spec.segments_u},
                           {"segments_v", spec.segments_v},
                           {"radius", spec.radius},
                           {"radius2", spec.radius2},
                           {"amplitude", spec.amplitude},
                           {"frequency", spec.frequency}};
        manifest[name] = entry;
    }
    manifest["_seed"] = seed;

    std::string manifest_path = directory + "/manifest.json";
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) raise(Errc::io, "cannot open '" + manifest_path + "' for writing");
    out << manifest.dump(2) << "\n";
    if (!out) raise(Errc::io, "write failed for '" + manifest_path + "'");
    written.push_back(manifest_path);
    return written;
}

}  // namespace ov
