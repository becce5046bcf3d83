#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tdlab/core/random_field.hpp"
#include "tdlab/core/sphere.hpp"
#include "tdlab/core/types.hpp"
#include "tdlab/forward/forward.hpp"
#include "tdlab/imaging/imaging.hpp"
#include "tdlab/scene/scene.hpp"

namespace tdlab {

// ---------------------------------------------------------------------------
// Measurement-noise statistics of the back-propagated fields
// ---------------------------------------------------------------------------

// In both filter modes the back-propagated noise field is a fixed linear map
// of the complex noise vector.  Its covariance therefore has the exact
// discrete form  sigma^2 sum_j (1/w_j) B_j(z) conj(B_j(z'))^T, which is
// computed here without sampling; the Monte Carlo estimator below exercises
// the full random pipeline against the same prediction.
//
// Dense-mesh, large-radius limit of both:
//   E[U(z) conj(U(z'))^T]         -> -(sigma^2 / (4 kappa eps0)) Im G(z, z')
//   E[curlU(z) conj(curlU(z'))^T] -> -(sigma^2 kappa / (4 eps0)) Im G(z, z')

struct NoiseCovariancePair {
    Mat3C field;  // covariance of the back-propagated field at (z, z')
    Mat3C curl;   // covariance of its curl
};

NoiseCovariancePair exact_noise_covariance(const SphereMesh& mesh, const WaveContext& ctx,
                                           const MeasurementNoiseSpec& spec, const Vec3& z,
                                           const Vec3& zp, unsigned threads = 1);

struct CovarianceEstimate {
    Mat3C mean;
    Mat3 stderr_re;  // entrywise standard error of the real part
    Mat3 stderr_im;
};

struct NoiseCovarianceMC {
    CovarianceEstimate field;
    CovarianceEstimate curl;
    Mat3 predicted_field;  // regular closed-form limits
    Mat3 predicted_curl;
    std::size_t n_trials = 0;
};

NoiseCovarianceMC mc_noise_covariance(const SphereMesh& mesh, const WaveContext& ctx,
                                      const MeasurementNoiseSpec& spec, const Vec3& z,
                                      const Vec3& zp, std::size_t n_trials, std::uint64_t seed,
                                      unsigned threads = 1);

// Closed-form covariance of the multi-illumination map corrupted by
// measurement noise, for n illumination directions:
//   Cov(z, z') = (pi a^2 sigma^2 kappa^2 / (2 n eps0^2)) (Im G M) : (M Im G)
// with the contrast a and trial tensor M of the selected kind and
// Im G = Im G(z, z').
double td_cov_prediction(TrialKind kind, const Vec3& z, const Vec3& zp, const Materials& mats,
                         const TrialInclusion& trial, double sigma, std::size_t n_directions);

// ---------------------------------------------------------------------------
// Signal-to-noise of the peak under measurement noise
// ---------------------------------------------------------------------------

struct SnrPoint {
    double mean = 0.0;    // empirical mean of the map value at the true centre
    double stddev = 0.0;  // empirical standard deviation over trials
    double snr = 0.0;     // mean / stddev
    std::size_t n_trials = 0;
};

SnrPoint mc_snr(const SphereMesh& mesh, const Materials& mats, const Inclusion& inclusion,
                const TrialInclusion& trial, std::size_t n_directions, double sigma,
                MeasurementNoiseSpec::Filter filter, std::size_t n_trials, std::uint64_t seed,
                unsigned threads = 1);

// Empirical scaling of the peak SNR when the illumination count, the
// inclusion radius, or the noise level changes; ratios are relative to the
// base configuration (expected: 2, 8, 1/2 in the dense limit).
struct SnrScalingReport {
    SnrPoint base, incidences_x4, rho_x2, sigma_x2;
    double ratio_incidences = 0.0;
    double ratio_rho = 0.0;
    double ratio_sigma = 0.0;
};

SnrScalingReport snr_scaling(const SphereMesh& mesh, const Materials& mats,
                             const Inclusion& inclusion, const TrialInclusion& trial,
                             std::size_t n_directions, double sigma,
                             MeasurementNoiseSpec::Filter filter, std::size_t n_trials,
                             std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Medium-noise (speckle) statistics
// ---------------------------------------------------------------------------

// Which background coefficient fluctuates.
enum class MediumKind { permeability, permittivity };

// The four quadratic kernels of the speckle covariance analysis.  The first
// pair arises from permeability fluctuations probed with a permeable or
// dielectric trial; the second pair from permittivity fluctuations.
enum class SpeckleKernel { q_gamma, q_gamma_tilde, q_alpha, q_alpha_tilde };

// Kernel selected by the (medium, trial) pairing of a study.
SpeckleKernel speckle_kernel_for(MediumKind medium, TrialKind trial);

// Volume quadrature over a ball: tensor product of a radial Gauss-Legendre
// rule and a Fibonacci angular rule per shell, with a smooth taper that
// vanishes at the boundary (fields and predictions are both multiplied by
// the taper, so the two sides of any comparison see the same windowing).
struct VolumeMesh {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<double> taper;

    std::size_t size() const { return nodes.size(); }

    static VolumeMesh ball(const Vec3& center, double radius, std::size_t n_radial,
                           std::size_t n_angular, double taper_width);
};

// Quadratic kernel evaluated with tensor argument A (must be symmetric):
//   q_gamma:        (Im G(y,z))     : A Im G(y,z)
//   q_gamma_tilde:  (curl_z Im G)   : A curl_z Im G
//   q_alpha:        (curl_y Im G) A : curl_y Im G
//   q_alpha_tilde:  (Im G(y,z)) A   : Im G(y,z)
// All four are regular for every separation including y = z.
double speckle_kernel(SpeckleKernel kind, const Mat3& a, const WaveContext& ctx, const Vec3& y,
                      const Vec3& z);

// Scalar prefactor multiplying the kernel integral in the linearised speckle
// perturbation of the map: -4 pi kappa^2 a_mu / eps0^2 and friends.
double speckle_prefactor(MediumKind medium, TrialKind trial, const Materials& mats);

// Linearised speckle perturbation of the map at z for one medium realisation
// given by `field` sampled on the volume mesh:
//   s(z) = prefactor * sum_k w_k chi_k field_k K(y_k, z).
double speckle_sample(MediumKind medium, TrialKind trial, const Mat3& trial_tensor,
                      const Materials& mats, const VolumeMesh& mesh,
                      std::span<const double> field, const Vec3& z);

// Nested-quadrature prediction of Cov[s(z), s(z')] for a medium field with
// squared-exponential covariance (RandomFieldSpec's sigma and corr_len).
double speckle_cov_prediction(MediumKind medium, TrialKind trial, const Mat3& trial_tensor,
                              const Materials& mats, const VolumeMesh& mesh,
                              const RandomFieldSpec& field_spec, const Vec3& z, const Vec3& zp,
                              unsigned threads = 1);

struct SpeckleCovarianceReport {
    double predicted = 0.0;
    double empirical = 0.0;
    double stderr_empirical = 0.0;
    std::size_t n_realizations = 0;
};

// Empirical covariance of s(z), s(z') over fresh-mode field realisations
// against the nested-quadrature prediction.
SpeckleCovarianceReport speckle_covariance(MediumKind medium, TrialKind trial,
                                           const Mat3& trial_tensor, const Materials& mats,
                                           const VolumeMesh& mesh,
                                           const RandomFieldSpec& field_spec, const Vec3& z,
                                           const Vec3& zp, std::size_t n_realizations,
                                           std::uint64_t seed, unsigned threads = 1);

// First Born back-propagation of the medium perturbation for one
// illumination:
//   permeability:  U(z) = -(kappa/eps0) int chi f(y) Im G(y,z) conj(H0(y)) dy
//   permittivity:  U(z) = -(1/(eps0 kappa)) int chi f(y)
//                          (curl_y Im G(y,z))^T conj(curl H0(y)) dy
Vec3C born_speckle_backprop(MediumKind medium, const WaveContext& ctx, const VolumeMesh& mesh,
                            std::span<const double> field, const Incidence& inc, const Vec3& z);

}  // namespace tdlab
