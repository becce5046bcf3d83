#include "tdlab/cli/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "tdlab/core/rng.hpp"

namespace tdlab {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ScenarioParseError("scenario " + where + ": " + what);
}

// Enforces the closed key set of one object: every required key present,
// every present key known.  `where` is the dotted path used in diagnostics.
void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const char* k : required)
        if (!obj.contains(k)) fail(where, std::string("missing required field '") + k + "'");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : required) known = known || it.key() == k;
        for (const char* k : optional) known = known || it.key() == k;
        if (!known) fail(where, "unknown field '" + it.key() + "'");
    }
}

double get_number(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_number()) fail(where + "." + key, "expected a number");
    return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(where + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

Vec3 get_vec3(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number())
        fail(where + "." + key, "expected an array of three numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Mat3 get_mat3(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) fail(where + "." + key, "expected a 3x3 array of numbers");
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i) {
        const json& row = v[i];
        if (!row.is_array() || row.size() != 3) fail(where + "." + key, "expected a 3x3 array of numbers");
        for (std::size_t j = 0; j < 3; ++j) {
            if (!row[j].is_number()) fail(where + "." + key, "expected a 3x3 array of numbers");
            r(i, j) = row[j].get<double>();
        }
    }
    return r;
}

// Symmetric positive-definite check by Sylvester's criterion, with a
// scale-aware symmetry tolerance.
bool is_spd(const Mat3& m) {
    const double scale = std::max(max_abs_entry(m), 1e-300);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale) return false;
    const double d1 = m(0, 0);
    const double d2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double d3 = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                      m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                      m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    return d1 > 0.0 && d2 > 0.0 && d3 > 0.0;
}

struct ShapeSpec {
    std::string shape;
    double ref_volume = 0.0;
    bool has_mmu = false, has_meps = false;
    Mat3 m_mu, m_eps;
};

ShapeSpec parse_shape(const json& obj, const std::string& where, bool allow_custom) {
    require_keys(obj, where,
                 where == "inclusion" ? std::initializer_list<const char*>{"center", "rho", "ref_volume", "shape"}
                                      : std::initializer_list<const char*>{"ref_volume", "shape"},
                 {"m_mu", "m_eps"});
    ShapeSpec s;
    s.shape = get_string(obj, where, "shape");
    s.ref_volume = get_number(obj, where, "ref_volume");
    if (s.shape != "sphere" && s.shape != "custom")
        fail(where + ".shape", "expected \"sphere\" or \"custom\", got \"" + s.shape + "\"");
    if (s.shape == "custom" && !allow_custom)
        fail(where + ".shape", "\"custom\" is not supported here; use \"sphere\"");
    if (obj.contains("m_mu")) { s.has_mmu = true; s.m_mu = get_mat3(obj, where, "m_mu"); }
    if (obj.contains("m_eps")) { s.has_meps = true; s.m_eps = get_mat3(obj, where, "m_eps"); }
    if (s.shape == "sphere" && (s.has_mmu || s.has_meps))
        fail(where, "m_mu/m_eps may only be given for shape \"custom\"");
    if (s.shape == "custom" && !(s.has_mmu && s.has_meps))
        fail(where, "shape \"custom\" requires both m_mu and m_eps");
    return s;
}

}  // namespace

std::string content_hash(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash_label(text)));
    return buf;
}

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Convert the byte offset in the library's message to a line number.
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        fail("(line " + std::to_string(line) + ")", e.what());
    }

    require_keys(root, "(top level)",
                 {"materials", "inclusion", "trial", "boundary", "incidences", "grid", "seed"},
                 {"noise", "mc"});

    Scenario s;

    const json& jm = root["materials"];
    require_keys(jm, "materials", {"eps0", "mu0", "eps1", "mu1", "eps2", "mu2", "omega"});
    s.materials.eps0 = get_number(jm, "materials", "eps0");
    s.materials.mu0 = get_number(jm, "materials", "mu0");
    s.materials.eps1 = get_number(jm, "materials", "eps1");
    s.materials.mu1 = get_number(jm, "materials", "mu1");
    s.materials.eps2 = get_number(jm, "materials", "eps2");
    s.materials.mu2 = get_number(jm, "materials", "mu2");
    s.materials.omega = get_number(jm, "materials", "omega");
    if (s.materials.eps0 <= 0.0 || s.materials.mu0 <= 0.0 || s.materials.omega <= 0.0)
        fail("materials", "eps0, mu0 and omega must be positive");
    const double lambda = s.materials.wavelength();

    const json& ji = root["inclusion"];
    const ShapeSpec incl = parse_shape(ji, "inclusion", /*allow_custom=*/true);
    s.inclusion.center = get_vec3(ji, "inclusion", "center") * lambda;
    s.inclusion.rho = get_number(ji, "inclusion", "rho") * lambda;
    s.inclusion.ref_volume = incl.ref_volume;
    if (incl.shape == "sphere") {
        s.inclusion.m_mu = polarization_tensor_sphere(s.materials.mu1r(), incl.ref_volume);
        s.inclusion.m_eps = polarization_tensor_sphere(s.materials.eps1r(), incl.ref_volume);
    } else {
        s.inclusion.m_mu = incl.m_mu;
        s.inclusion.m_eps = incl.m_eps;
    }

    // The trial shape is scanned over the grid; its tensors carry the probe
    // material.  Custom trial tensors are a library-level feature, so the file
    // format keeps the trial spherical.
    const ShapeSpec trial = parse_shape(root["trial"], "trial", /*allow_custom=*/false);
    s.trial.ref_volume = trial.ref_volume;
    s.trial.m_mu = polarization_tensor_sphere(s.materials.mu2r(), trial.ref_volume);
    s.trial.m_eps = polarization_tensor_sphere(s.materials.eps2r(), trial.ref_volume);

    const json& jb = root["boundary"];
    require_keys(jb, "boundary", {"radius", "n_nodes"});
    s.boundary_radius = get_number(jb, "boundary", "radius") * lambda;
    s.boundary_nodes = get_uint(jb, "boundary", "n_nodes");

    const json& jinc = root["incidences"];
    require_keys(jinc, "incidences", {"n"});
    s.n_directions = get_uint(jinc, "incidences", "n");

    const json& jg = root["grid"];
    require_keys(jg, "grid", {"origin", "spacing", "dims"}, {"slice_axis"});
    s.grid.origin = get_vec3(jg, "grid", "origin") * lambda;
    s.grid.spacing = get_number(jg, "grid", "spacing") * lambda;
    {
        const json& d = jg.at("dims");
        if (!d.is_array() || d.size() != 3) fail("grid.dims", "expected an array of three positive integers");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!d[i].is_number_unsigned() || d[i].get<std::uint64_t>() == 0)
                fail("grid.dims", "expected an array of three positive integers");
            s.grid.dims[i] = d[i].get<std::uint64_t>();
        }
    }
    if (jg.contains("slice_axis")) {
        const json& v = jg.at("slice_axis");
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 2)
            fail("grid.slice_axis", "expected 0, 1 or 2");
        s.slice_axis = static_cast<int>(v.get<std::uint64_t>());
    }

    if (root.contains("noise")) {
        const json& jn = root["noise"];
        require_keys(jn, "noise", {}, {"measurement", "medium"});
        if (jn.contains("measurement")) {
            const json& jme = jn["measurement"];
            require_keys(jme, "noise.measurement", {"sigma", "filter_mode"});
            MeasurementNoiseSpec spec;
            spec.sigma = get_number(jme, "noise.measurement", "sigma");
            const std::string mode = get_string(jme, "noise.measurement", "filter_mode");
            if (mode == "half")
                spec.filter_mode = MeasurementNoiseSpec::Filter::half;
            else if (mode == "farfield")
                spec.filter_mode = MeasurementNoiseSpec::Filter::farfield;
            else
                fail("noise.measurement.filter_mode", "expected \"half\" or \"farfield\", got \"" + mode + "\"");
            s.measurement_noise = spec;
        }
        if (jn.contains("medium")) {
            const json& jmd = jn["medium"];
            require_keys(jmd, "noise.medium", {"kind", "sigma", "corr_len", "n_modes"});
            MediumNoiseConfig cfg;
            const std::string kind = get_string(jmd, "noise.medium", "kind");
            if (kind == "permeability")
                cfg.kind = MediumKind::permeability;
            else if (kind == "permittivity")
                cfg.kind = MediumKind::permittivity;
            else
                fail("noise.medium.kind", "expected \"permeability\" or \"permittivity\", got \"" + kind + "\"");
            cfg.field.sigma = get_number(jmd, "noise.medium", "sigma");
            cfg.field.corr_len = get_number(jmd, "noise.medium", "corr_len") * lambda;
            cfg.field.n_modes = get_uint(jmd, "noise.medium", "n_modes");
            s.medium_noise = cfg;
        }
    }

    if (root.contains("mc")) {
        const json& jmc = root["mc"];
        require_keys(jmc, "mc", {"n_trials"});
        s.mc_trials = get_uint(jmc, "mc", "n_trials");
    }

    {
        const json& v = root.at("seed");
        if (!v.is_number_unsigned()) fail("seed", "expected a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    }

    s.hash = content_hash(text);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read scenario file: " + path);
    return parse_scenario(buf.str());
}

double containment_margin(const Materials& mats) { return 0.5 * mats.wavelength(); }

void validate_scenario(Scenario& s) {
    auto reject = [](const std::string& what) { throw ScenarioValidationError("scenario: " + what); };

    try {
        s.materials.validate();
    } catch (const std::invalid_argument& e) {
        reject(e.what());
    }

    const double kappa = s.materials.kappa();
    const double lambda = s.materials.wavelength();

    if (s.inclusion.rho <= 0.0) reject("inclusion.rho must be positive");
    const double rk = s.inclusion.rho * kappa;
    if (rk > 0.5)
        reject("inclusion.rho * kappa = " + std::to_string(rk) +
               " exceeds 0.5; the small-inclusion expansion does not apply");
    if (rk > 0.1)
        s.warnings.push_back("inclusion.rho * kappa = " + std::to_string(rk) +
                             " is above 0.1; expansion accuracy degrades");

    if (s.inclusion.ref_volume <= 0.0 || s.trial.ref_volume <= 0.0)
        reject("ref_volume must be positive");
    if (!is_spd(s.inclusion.m_mu) || !is_spd(s.inclusion.m_eps))
        reject("inclusion polarisation tensors must be symmetric positive definite");
    if (!is_spd(s.trial.m_mu) || !is_spd(s.trial.m_eps))
        reject("trial polarisation tensors must be symmetric positive definite");

    if (s.boundary_radius <= 0.0) reject("boundary.radius must be positive");
    if (s.boundary_nodes < 4) reject("boundary.n_nodes must be at least 4");
    if (s.n_directions == 0) reject("incidences.n must be at least 1");
    if (s.grid.spacing <= 0.0) reject("grid.spacing must be positive");

    const double d0 = containment_margin(s.materials);
    if (norm(s.inclusion.center) + s.inclusion.rho + d0 > s.boundary_radius)
        reject("inclusion must lie at least half a wavelength inside the boundary sphere");
    double corner_max = 0.0;
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy)
            for (int cz = 0; cz < 2; ++cz) {
                const Vec3 p = s.grid.point(cx ? s.grid.dims[0] - 1 : 0, cy ? s.grid.dims[1] - 1 : 0,
                                            cz ? s.grid.dims[2] - 1 : 0);
                corner_max = std::max(corner_max, norm(p));
            }
    if (corner_max + d0 > s.boundary_radius)
        reject("every search-grid point must lie at least half a wavelength inside the boundary");

    if (s.grid.spacing > lambda / 8.0 * (1.0 + 1e-12))
        s.warnings.push_back("grid.spacing exceeds lambda/8; too coarse for resolution studies");
    if (s.boundary_radius < 2.0 * lambda)
        s.warnings.push_back("boundary.radius below 2 wavelengths; quadrature-identity checks are skipped");
    {
        const double kr = kappa * s.boundary_radius;
        const double dense = kr * kr;
        if (static_cast<double>(s.boundary_nodes) < dense)
            s.warnings.push_back("boundary.n_nodes below (kappa R)^2 = " + std::to_string(dense) +
                                 "; the measurement operator may be under-resolved");
    }

    if (s.measurement_noise && s.measurement_noise->sigma < 0.0)
        reject("noise.measurement.sigma must be non-negative");
    if (s.medium_noise) {
        if (s.medium_noise->field.sigma < 0.0) reject("noise.medium.sigma must be non-negative");
        if (s.medium_noise->field.corr_len <= 0.0) reject("noise.medium.corr_len must be positive");
        if (s.medium_noise->field.n_modes == 0) reject("noise.medium.n_modes must be at least 1");
        if (s.medium_noise->field.sigma > 0.2)
            s.warnings.push_back("noise.medium.sigma above 0.2 strains the weak-perturbation model");
    }

    if (s.mc_trials == 1) reject("mc.n_trials = 1 is insufficient; at least 2 trials are required");

    if (s.slice_axis > 2 || s.slice_axis < -1) reject("grid.slice_axis must be 0, 1 or 2");
}

}  // namespace tdlab
