#pragma once

#include <cstdint>
#include <vector>

#include "tdlab/core/sphere.hpp"
#include "tdlab/core/types.hpp"
#include "tdlab/scene/scene.hpp"

namespace tdlab {

// Tangential boundary data on the measurement sphere: one complex 3-vector
// per (incidence, node).  values[q][i] is the filtered datum of illumination
// q at mesh node i.
struct BoundaryData {
    SphereMesh mesh;
    IncidenceSet incidences;
    std::vector<std::vector<Vec3C>> values;

    std::size_t n_incidences() const { return values.size(); }
};

// Leading-order scattered-field data produced by the true inclusion under
// every illumination in the set:
//   F_q(y) = rho^3 kappa^2 (mu1r - 1) / eps0 [G(z,y) x nu] M_mu H0_q(z)
//          + rho^3 (eps1r - 1) / eps0 [C(y,z) x nu] M_eps (curl H0_q)(z),
// with z the inclusion centre and nu the outward normal at y.
//
// perturbation_scale > 0 adds a deterministic smooth tangential term of size
// scale * rho^4 (a next-order robustness probe; off by default).
BoundaryData synthesize_boundary_data(const SphereMesh& mesh, const IncidenceSet& incidences,
                                      const Materials& mats, const Inclusion& inclusion,
                                      unsigned threads = 1, double perturbation_scale = 0.0,
                                      std::uint64_t perturbation_seed = 0);

// Additive measurement-noise model on the filtered data.
struct MeasurementNoiseSpec {
    enum class Filter { half, farfield };
    double sigma = 0.0;
    Filter filter_mode = Filter::half;
};

// Draws one noise realisation and adds its filtered version to the data:
//   half:      data_i += (1/2) (eta_i x nu_i)
//   farfield:  additionally subtracts the boundary-layer correction
//              (i kappa / eps0) [sum_{j != i} w_j G(y_j, y_i) eta_j] x nu_i.
// eta_i has independent circular complex components of variance
// sigma^2 / w_i (the mesh-scaled white-noise convention).  Each illumination
// uses an independent sub-stream of (seed, trial), so results do not depend
// on the thread count.  The farfield mode costs O(n_nodes^2) per
// illumination.
void add_measurement_noise(BoundaryData& data, const MeasurementNoiseSpec& spec,
                           const WaveContext& ctx, std::uint64_t seed, std::uint64_t trial = 0,
                           unsigned threads = 1);

// The raw noise realisation for one illumination index, as used by
// add_measurement_noise (exposed for covariance analysis in tests).
std::vector<Vec3C> draw_noise(const SphereMesh& mesh, double sigma, std::uint64_t seed,
                              std::uint64_t trial, std::size_t incidence_index);

}  // namespace tdlab
