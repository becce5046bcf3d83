#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdlab/core/types.hpp"
#include "tdlab/forward/forward.hpp"
#include "tdlab/scene/scene.hpp"

namespace tdlab {

// Regular axis-aligned evaluation grid.  Flat indexing runs x fastest, then
// y, then z: flat = (iz * ny + iy) * nx + ix.
struct SearchGrid {
    Vec3 origin{};
    double spacing = 1.0;
    std::array<std::size_t, 3> dims{1, 1, 1};

    std::size_t size() const { return dims[0] * dims[1] * dims[2]; }

    Vec3 point(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return origin + Vec3{spacing * static_cast<double>(ix), spacing * static_cast<double>(iy),
                             spacing * static_cast<double>(iz)};
    }

    std::array<std::size_t, 3> unflatten(std::size_t flat) const {
        const std::size_t ix = flat % dims[0];
        const std::size_t iy = (flat / dims[0]) % dims[1];
        const std::size_t iz = flat / (dims[0] * dims[1]);
        return {ix, iy, iz};
    }

    Vec3 point(std::size_t flat) const {
        const auto [ix, iy, iz] = unflatten(flat);
        return point(ix, iy, iz);
    }
};

struct ImagingMap {
    SearchGrid grid;
    std::vector<double> values;
};

// Back-propagated field of one illumination's boundary data:
//   U(z)      = -(1/eps0) sum_i w_i G(y_i, z) (nu_i x conj(F_i))
//   curl U(z) = -(1/eps0) sum_i w_i C(z, y_i) (nu_i x conj(F_i))
struct BackPropagated {
    Vec3C field;
    Vec3C curl;
};
BackPropagated backpropagate(const SphereMesh& mesh, const std::vector<Vec3C>& values,
                             const WaveContext& ctx, const Vec3& z);

// Pointwise imaging functional for one illumination:
//   td(z) = -Re{ kappa^2 a_mu U(z) . M_mu H0(z) + a_eps curlU(z) . M_eps curlH0(z) }
// with bilinear dots and the trial contrasts a_mu, a_eps from the materials.
double td_single(const BoundaryData& data, std::size_t incidence_index, const Vec3& z,
                 const Materials& mats, const TrialInclusion& trial);

// Multi-illumination map from arbitrary boundary data: the sum of td_single
// over all illuminations divided by the number of directions.
ImagingMap td_multi(const BoundaryData& data, const SearchGrid& grid, const Materials& mats,
                    const TrialInclusion& trial, unsigned threads = 1);

// Same value at a single point.
double td_multi_point(const BoundaryData& data, const Vec3& z, const Materials& mats,
                      const TrialInclusion& trial);

// Fast evaluator for noise-free leading-order data.  Algebraically identical
// to synthesize_boundary_data followed by td_multi, but factors the
// illumination-independent node sums so the cost per grid point does not
// scale with the illumination count times the mesh size.
class SyntheticImager {
public:
    SyntheticImager(const SphereMesh& mesh, const IncidenceSet& incidences, const Materials& mats,
                    const Inclusion& inclusion, const TrialInclusion& trial);

    double evaluate(const Vec3& z) const;
    ImagingMap map(const SearchGrid& grid, unsigned threads = 1) const;

private:
    const SphereMesh& mesh_;
    const IncidenceSet& incidences_;
    WaveContext ctx_;
    Vec3 center_;
    double kappa_;
    double a_mu_, a_eps_;
    Mat3 trial_m_mu_, trial_m_eps_;
    std::vector<Mat3C> b1_, b2_;  // per-node factors absorbing weight, normal and source kernels
};

// Closed-form prediction of the multi-illumination map in the limit of a
// dense direction set:
//   td(z) = (4 pi rho^3 kappa^2 C / eps0^2) (Im G M_D) : (M_S Im G),
// where C is the product of the inclusion and trial contrasts of the selected
// kind and Im G = Im G(z, z_D).
double td_closed_form(TrialKind kind, const Vec3& z, const Materials& mats,
                      const Inclusion& inclusion, const TrialInclusion& trial);

// A map with no structure (constant values) has no meaningful peak.
struct DegenerateMapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Peak statistics of a map: argmax location and value, distance to the true
// centre, full width at half maximum along the first two extended grid axes,
// and the largest relative value outside 0.6 wavelengths of the peak.
struct PeakMetrics {
    Vec3 argmax{};
    double peak_value = 0.0;
    double localization_error = 0.0;
    std::array<double, 2> fwhm{0.0, 0.0};
    double sidelobe_ratio = 0.0;
};
PeakMetrics peak_metrics(const ImagingMap& map, double kappa, const Vec3& z_true);

}  // namespace tdlab
