#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tdlab/core/types.hpp"
#include "tdlab/greens/greens.hpp"

namespace tdlab {

// Electromagnetic parameters of the background (index 0), the true inclusion
// phase (index 1) and the trial phase used by the imaging functional (index 2),
// plus the operating angular frequency.
struct Materials {
    double eps0 = 1.0, mu0 = 1.0;
    double eps1 = 1.0, mu1 = 1.0;
    double eps2 = 1.0, mu2 = 1.0;
    double omega = 1.0;

    double kappa() const;       // omega sqrt(eps0 mu0)
    double wavelength() const;  // 2 pi / kappa
    WaveContext wave() const { return {kappa(), eps0}; }

    // Relative ratios background/phase.
    double mu1r() const { return mu0 / mu1; }
    double eps1r() const { return eps0 / eps1; }
    double mu2r() const { return mu0 / mu2; }
    double eps2r() const { return eps0 / eps2; }

    // Trial contrasts entering the imaging functional.
    double a_mu() const { return mu2r() - 1.0; }
    double a_eps() const { return eps2r() - 1.0; }

    void validate() const;  // throws std::invalid_argument on nonphysical data
};

// Imaging functional flavour: which contrast the trial inclusion carries.
enum class TrialKind { permeable, dielectric };

// Polarisation tensor of a sphere of volume |B| with material ratio
// k = (background value) / (phase value):
//   M(k) = 3 |B| / (2 k + 1) I,
// equivalently 3 mu_phase |B| / (2 mu_bg + mu_phase) I for permeability.
Mat3 polarization_tensor_sphere(double ratio, double volume);

// True scatterer: a small inclusion of radius rho centred at `center`,
// carrying phase-1 material and polarisation tensors for the reference shape
// of volume `ref_volume` (identity-multiple for spheres).
struct Inclusion {
    Vec3 center{};
    double rho = 0.0;
    double ref_volume = 4.0 * pi / 3.0;
    Mat3 m_mu = Mat3::identity();   // permeability polarisation tensor of the reference shape
    Mat3 m_eps = Mat3::identity();  // permittivity polarisation tensor
};

// Trial inclusion shape used by the imaging functional (same structure but
// phase-2 material and no centre: it is scanned over the grid).
struct TrialInclusion {
    double ref_volume = 4.0 * pi / 3.0;
    Mat3 m_mu = Mat3::identity();
    Mat3 m_eps = Mat3::identity();
};

// Returns the sphere-reference inclusion/trial tensors for the material set.
Inclusion make_sphere_inclusion(const Materials& mats, const Vec3& center, double rho);
TrialInclusion make_sphere_trial(const Materials& mats);

// Scalar constants of the sphere-reference closed forms; recomputed on demand.
struct TrialConstants {
    double c_mu = 0.0, c_eps = 0.0;            // product contrasts (mu1r-1)(mu2r-1) etc.
    double ctilde_mu = 0.0, ctilde_eps = 0.0;  // closed-form image prefactors
    double atilde_mu = 0.0, atilde_eps = 0.0;  // noise-amplification constants
    double b_mu = 0.0, b_eps = 0.0;            // speckle prefactors
};
TrialConstants trial_constants(const Materials& mats, double ref_volume_incl,
                               double ref_volume_trial);

// One plane-wave illumination: propagation direction theta (unit) and
// transverse polarisation pol (unit, orthogonal to theta).
struct Incidence {
    Vec3 theta{};
    Vec3 pol{};
};

// 2n illuminations from n Fibonacci directions with both transverse
// polarisations per direction, ordered (dir0 pol1, dir0 pol2, dir1 pol1, ...).
struct IncidenceSet {
    std::vector<Incidence> items;

    std::size_t size() const { return items.size(); }
    std::size_t n_directions() const { return items.size() / 2; }

    static IncidenceSet fibonacci(std::size_t n_directions);
};

// Incident plane wave H0(x) = pol e^{i kappa theta . x} and its curl
// i kappa (theta x pol) e^{i kappa theta . x}.
struct IncidentField {
    Vec3C field;
    Vec3C curl;
};
IncidentField incident_field(const Incidence& inc, double kappa, const Vec3& x);

// Direction-set identity (scalar): (1/n) sum_j e^{i kappa theta_j . d}
// approaches j0(kappa |d|) as the direction set refines.
struct DirectionIdentityScalar {
    Complex average;
    double prediction;
    double error;  // |average - prediction|
};
DirectionIdentityScalar direction_identity_scalar(const IncidenceSet& set, double kappa,
                                                  const Vec3& d);

// Direction-set identity (matrix): the polarisation average
//   (1/n) sum_j sum_l  p_jl p_jl^T e^{i kappa theta_j . d}
// with p = pol (use_curl_axis = false) or p = theta x pol (true) approaches
// -(4 pi / (kappa eps0)) Im G(d, 0) in either case.
struct DirectionIdentityMatrix {
    Mat3C average;
    Mat3 prediction;
    double max_entry_error;
};
DirectionIdentityMatrix direction_identity_matrix(const IncidenceSet& set, const WaveContext& ctx,
                                                  const Vec3& d, bool use_curl_axis);

}  // namespace tdlab
