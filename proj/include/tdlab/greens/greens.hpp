#pragma once

#include <stdexcept>

#include "tdlab/core/types.hpp"

namespace tdlab {

// Thrown when a kernel is evaluated closer to its singularity than the
// context's exclusion radius allows.
struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};

// Background-medium wave parameters shared by every kernel evaluation.
struct WaveContext {
    double kappa = 1.0;  // background wavenumber
    double eps0 = 1.0;   // background permittivity

    double wavelength() const { return 2.0 * pi / kappa; }

    // Minimal source-observer separation for the singular kernels.
    double r_min() const { return 1e-6 * wavelength(); }
};

// Outgoing Helmholtz fundamental solution g(x, y) = e^{i kappa r} / (4 pi r).
Complex scalar_green(const WaveContext& ctx, const Vec3& x, const Vec3& y);

// Gradient with respect to x of the scalar kernel.
Vec3C grad_scalar_green(const WaveContext& ctx, const Vec3& x, const Vec3& y);

// Magnetic dyadic kernel
//   G(x, y) = -eps0 g(r) [ (1 + i/(kr) - 1/(kr)^2) I
//                          - (1 + 3i/(kr) - 3/(kr)^2) rhat rhat^T ],
// symmetric in its arguments.
Mat3C dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y);

// Column-wise curl with respect to x of the dyadic kernel,
//   C(x, y) = -eps0 [grad_x g]_x ,
// an antisymmetric matrix with C(x, y) = C(y, x)^T.
Mat3C curl_dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y);

// Imaginary part of the dyadic kernel in closed regular form,
//   Im G(x, y) = -(eps0 kappa / 4 pi) [ (2/3) j0(kr) I
//                                       + j2(kr) (rhat rhat^T - I/3) ],
// finite for all separations including r = 0 where it equals
// -(eps0 kappa / 6 pi) I.
Mat3 im_dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y);

// Imaginary part of the curl kernel in closed regular form,
//   Im C(x, y) = eps0 kappa^2 j1(kr) / (4 pi) [rhat]_x ,
// finite for all separations (zero matrix at r = 0).
Mat3 im_curl_dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y);

}  // namespace tdlab
