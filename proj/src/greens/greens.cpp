#include "tdlab/greens/greens.hpp"

#include <cmath>

#include "tdlab/core/bessel.hpp"

namespace tdlab {

namespace {

double checked_distance(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const double r = norm(x - y);
    if (r < ctx.r_min())
        throw SingularityError("kernel evaluated within the singular exclusion radius");
    return r;
}

}  // namespace

Complex scalar_green(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const double r = checked_distance(ctx, x, y);
    return std::exp(iu * (ctx.kappa * r)) / (4.0 * pi * r);
}

Vec3C grad_scalar_green(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const double r = checked_distance(ctx, x, y);
    const Vec3 rhat = (x - y) / r;
    const Complex g = std::exp(iu * (ctx.kappa * r)) / (4.0 * pi * r);
    const Complex factor = g * (iu * ctx.kappa - 1.0 / r);
    return factor * Vec3C(rhat);
}

Mat3C dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const double r = checked_distance(ctx, x, y);
    const Vec3 rhat = (x - y) / r;
    const double kr = ctx.kappa * r;
    const Complex g = std::exp(iu * kr) / (4.0 * pi * r);
    const Complex ci = 1.0 + iu / kr - 1.0 / (kr * kr);
    const Complex cr = 1.0 + 3.0 * iu / kr - 3.0 / (kr * kr);
    Mat3C out;
    const Mat3 rr = outer(rhat, rhat);
    const Complex s = -ctx.eps0 * g;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double id = (i == j) ? 1.0 : 0.0;
            out(i, j) = s * (ci * id - cr * rr(i, j));
        }
    return out;
}

Mat3C curl_dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const Vec3C dg = grad_scalar_green(ctx, x, y);
    // -eps0 [grad g]_x expanded entrywise.
    Mat3C out;
    const Complex e = ctx.eps0;
    out(0, 1) = e * dg.z;
    out(0, 2) = -e * dg.y;
    out(1, 0) = -e * dg.z;
    out(1, 2) = e * dg.x;
    out(2, 0) = e * dg.y;
    out(2, 1) = -e * dg.x;
    return out;
}

Mat3 im_dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const Vec3 d = x - y;
    const double r = norm(d);
    const double scale = -ctx.eps0 * ctx.kappa / (4.0 * pi);
    if (r == 0.0) return (scale * 2.0 / 3.0) * Mat3::identity();
    const double kr = ctx.kappa * r;
    const Vec3 rhat = d / r;
    const double j0 = sph_bessel_j0(kr);
    const double j2 = sph_bessel_j2(kr);
    const Mat3 rr = outer(rhat, rhat);
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double id = (i == j) ? 1.0 : 0.0;
            out(i, j) = scale * ((2.0 / 3.0) * j0 * id + j2 * (rr(i, j) - id / 3.0));
        }
    return out;
}

Mat3 im_curl_dyadic_green(const WaveContext& ctx, const Vec3& x, const Vec3& y) {
    const Vec3 d = x - y;
    const double r = norm(d);
    if (r == 0.0) return Mat3::zero();
    const double kr = ctx.kappa * r;
    const double scale = ctx.eps0 * ctx.kappa * ctx.kappa * sph_bessel_j1(kr) / (4.0 * pi);
    return scale * cross_matrix(d / r);
}

}  // namespace tdlab
