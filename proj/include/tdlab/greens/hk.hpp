#pragma once

#include <cstddef>

#include "tdlab/core/types.hpp"
#include "tdlab/greens/greens.hpp"

namespace tdlab {

// Surface-integral identities on a large origin-centred sphere of radius R:
// each variant integrates a product of conjugated and plain kernels over the
// surface and is compared against a closed regular prediction.
//
//   plain       int conj(G(x,w))^T G(y,w) dS(w)                 -> -(eps0/kappa) Im G(x,y)
//   tangential  int conj(G(x,w) x nu)^T (G(y,w) x nu) dS(w)     -> -(eps0/kappa) Im G(x,y)
//   curl        int conj(C(w,x) x nu)^T (C(w,y) x nu) dS(w)     -> -kappa eps0  Im G(x,y)
//
// The agreement improves like O(1/(kappa R)) as the radius grows.
enum class HkVariant { plain, tangential, curl };

struct HkResult {
    Mat3C quadrature;       // surface quadrature value
    Mat3 prediction;        // closed-form limit
    double residual_norm;   // |quadrature - prediction|_F
    double prediction_norm; // |prediction|_F
    std::size_t n_nodes;
};

// Default node count for a given radius: max(2000, 40 (kappa R)^2), enough to
// resolve the surface oscillation at the quadrature level needed here.
std::size_t hk_auto_nodes(const WaveContext& ctx, double radius);

// Evaluates one variant with a Fibonacci surface rule.  Probe points must lie
// within radius/2 of the origin; n_nodes = 0 selects hk_auto_nodes.  The
// reduction order is fixed, so results are bit-identical for any thread count.
HkResult hk_residual(const WaveContext& ctx, HkVariant variant, double radius, const Vec3& x,
                     const Vec3& y, std::size_t n_nodes = 0, unsigned threads = 1);

}  // namespace tdlab
