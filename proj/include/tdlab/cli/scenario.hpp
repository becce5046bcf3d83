#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdlab/core/random_field.hpp"
#include "tdlab/forward/forward.hpp"
#include "tdlab/imaging/imaging.hpp"
#include "tdlab/scene/scene.hpp"
#include "tdlab/stability/stability.hpp"

namespace tdlab {

// Malformed input file: invalid JSON, unknown key, wrong type, or a missing
// required field.  The message names the offending field (and the line for
// syntax errors).  Maps to process exit code 2.
struct ScenarioParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Well-formed file that fails a physical admissibility check.  Maps to
// process exit code 1.
struct ScenarioValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Output-file write failure.  Maps to process exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spatially correlated medium perturbation (speckle) configuration.
struct MediumNoiseConfig {
    MediumKind kind = MediumKind::permeability;
    RandomFieldSpec field;  // sigma (relative amplitude), corr_len (absolute), n_modes
};

// A fully resolved experiment description.  Scenario files express every
// length in units of the operating wavelength so they are scale-free; all
// fields here are already converted to absolute units.
struct Scenario {
    Materials materials;
    Inclusion inclusion;
    TrialInclusion trial;

    double boundary_radius = 0.0;
    std::size_t boundary_nodes = 0;

    std::size_t n_directions = 0;  // plane-wave directions (two polarisations each)

    SearchGrid grid;
    int slice_axis = -1;  // heatmap slice normal; -1 = auto (first unit dimension)

    std::optional<MeasurementNoiseSpec> measurement_noise;
    std::optional<MediumNoiseConfig> medium_noise;
    std::size_t mc_trials = 0;  // 0 = no Monte Carlo block

    std::uint64_t seed = 0;

    std::string hash;                    // content hash of the file text
    std::vector<std::string> warnings;   // filled by validate_scenario
};

// Parses scenario text.  Unknown keys anywhere are errors; required fields:
// materials (all seven values), inclusion{center,rho,ref_volume,shape},
// trial{ref_volume,shape}, boundary{radius,n_nodes}, incidences{n},
// grid{origin,spacing,dims}, seed.  Optional: grid.slice_axis,
// inclusion.m_mu/m_eps (required iff shape is "custom"), noise{measurement,
// medium}, mc{n_trials}.  Throws ScenarioParseError.
Scenario parse_scenario(const std::string& text);

// Reads the file and parses it.  Missing/unreadable file throws IoError.
Scenario load_scenario(const std::string& path);

// Physical admissibility.  Hard failures throw ScenarioValidationError:
// non-positive material constants, rho * kappa > 0.5, non-symmetric or
// non-positive-definite polarisation tensors, scatterer or search grid
// closer than `containment_margin` to the boundary sphere.  Soft issues
// (rho * kappa > 0.1, grid spacing coarser than lambda/8, boundary radius
// below 2 lambda, medium noise amplitude straining the weak-perturbation
// regime) are appended to s.warnings.
void validate_scenario(Scenario& s);

// Minimum distance required between the scatterer (and every search-grid
// point) and the measurement boundary: half a wavelength.
double containment_margin(const Materials& mats);

// 64-bit FNV-1a of the raw file text, rendered as 16 hex digits.  Used to
// stamp output files so any result can be traced to its exact input.
std::string content_hash(const std::string& text);

}  // namespace tdlab
