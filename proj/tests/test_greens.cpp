#include <doctest.h>

#include <cmath>

#include "tdlab/core/bessel.hpp"
#include "tdlab/core/rng.hpp"
#include "tdlab/greens/greens.hpp"
#include "tdlab/greens/hk.hpp"

using namespace tdlab;

namespace {

Vec3 axis(int i) { return {i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0, i == 2 ? 1.0 : 0.0}; }

// Central finite-difference Hessian of the scalar kernel with respect to x.
Mat3C fd_hessian_scalar(const WaveContext& ctx, const Vec3& x, const Vec3& y, double h) {
    Mat3C out;
    for (int i = 0; i < 3; ++i) {
        const Vec3 ei = axis(i);
        out(i, i) = (scalar_green(ctx, x + h * ei, y) - 2.0 * scalar_green(ctx, x, y) +
                     scalar_green(ctx, x - h * ei, y)) /
                    (h * h);
        for (int j = i + 1; j < 3; ++j) {
            const Vec3 ej = axis(j);
            const Complex v = (scalar_green(ctx, x + h * ei + h * ej, y) -
                               scalar_green(ctx, x + h * ei - h * ej, y) -
                               scalar_green(ctx, x - h * ei + h * ej, y) +
                               scalar_green(ctx, x - h * ei - h * ej, y)) /
                              (4.0 * h * h);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

// Column-wise finite-difference curl with respect to x of the dyadic kernel.
Mat3C fd_curl_dyadic(const WaveContext& ctx, const Vec3& x, const Vec3& y, double h) {
    // (curl F)_p = eps_{pqr} d_q F_r; apply to each column of G.
    Mat3C dG[3];  // dG[q] = dG/dx_q
    for (int q = 0; q < 3; ++q) {
        const Vec3 eq = axis(q);
        const Mat3C plus = dyadic_green(ctx, x + h * eq, y);
        const Mat3C minus = dyadic_green(ctx, x - h * eq, y);
        dG[q] = (plus - minus) * Complex(1.0 / (2.0 * h));
    }
    Mat3C out;
    for (int col = 0; col < 3; ++col) {
        out(0, col) = dG[1](2, col) - dG[2](1, col);
        out(1, col) = dG[2](0, col) - dG[0](2, col);
        out(2, col) = dG[0](1, col) - dG[1](0, col);
    }
    return out;
}

}  // namespace

TEST_CASE("scalar kernel satisfies the Helmholtz equation away from the source") {
    const WaveContext ctx{1.3, 1.0};
    const Vec3 y{0.2, -0.1, 0.4};
    const Vec3 xs[] = {{1.0, 0.3, -0.2}, {-0.5, 1.4, 0.7}, {2.0, -2.0, 1.0}};
    for (const Vec3& x : xs) {
        const double h = 1e-4;
        const Mat3C hess = fd_hessian_scalar(ctx, x, y, h);
        const Complex lap = hess(0, 0) + hess(1, 1) + hess(2, 2);
        const Complex g = scalar_green(ctx, x, y);
        const Complex residual = lap + ctx.kappa * ctx.kappa * g;
        CHECK(std::abs(residual) < 1e-6 * std::abs(g) * ctx.kappa * ctx.kappa);
    }
}

TEST_CASE("gradient of scalar kernel matches finite differences") {
    const WaveContext ctx{2.1, 1.7};
    const Vec3 y{0.0, 0.5, -0.3};
    const Vec3 x{0.9, -0.6, 0.8};
    const double h = 1e-5;
    const Vec3C grad = grad_scalar_green(ctx, x, y);
    for (int i = 0; i < 3; ++i) {
        const Vec3 ei = axis(i);
        const Complex fd =
            (scalar_green(ctx, x + h * ei, y) - scalar_green(ctx, x - h * ei, y)) / (2.0 * h);
        CHECK(std::abs(grad[i] - fd) < 1e-7 * std::abs(grad[i]) + 1e-12);
    }
}

TEST_CASE("dyadic kernel equals -eps0 (I + hess/kappa^2) applied to the scalar kernel") {
    const WaveContext ctx{1.7, 2.3};
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        const Vec3 y{rng.normal(), rng.normal(), rng.normal()};
        Vec3 x{rng.normal(), rng.normal(), rng.normal()};
        if (norm(x - y) < 0.5) x += Vec3{1.0, 1.0, 1.0};
        const double h = 1e-4;
        const Mat3C hess = fd_hessian_scalar(ctx, x, y, h);
        const Complex g = scalar_green(ctx, x, y);
        Mat3C expected;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double id = (i == j) ? 1.0 : 0.0;
                expected(i, j) = -ctx.eps0 * (id * g + hess(i, j) / (ctx.kappa * ctx.kappa));
            }
        const Mat3C got = dyadic_green(ctx, x, y);
        const double scale = frobenius_norm(got);
        CHECK(frobenius_norm(got - expected) < 1e-5 * scale);
    }
}

TEST_CASE("dyadic kernel symmetries") {
    const WaveContext ctx{1.0, 1.0};
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        const Vec3 x{2.0 + rng.uniform01(), rng.normal(), rng.normal()};
        const Vec3 y{-1.0 - rng.uniform01(), rng.normal(), rng.normal()};
        const Mat3C gxy = dyadic_green(ctx, x, y);
        const Mat3C gyx = dyadic_green(ctx, y, x);
        CHECK(max_abs_entry(gxy - gyx) < 1e-13 * frobenius_norm(gxy));
        CHECK(max_abs_entry(gxy - transpose(gxy)) < 1e-13 * frobenius_norm(gxy));
    }
}

TEST_CASE("curl kernel matches column-wise finite-difference curl") {
    const WaveContext ctx{1.9, 1.4};
    const Vec3 y{0.1, 0.2, -0.1};
    const Vec3 xs[] = {{1.5, 0.0, 0.3}, {-0.8, 1.1, -0.9}, {0.4, -1.7, 1.2}};
    for (const Vec3& x : xs) {
        const Mat3C fd = fd_curl_dyadic(ctx, x, y, 1e-5);
        const Mat3C got = curl_dyadic_green(ctx, x, y);
        CHECK(frobenius_norm(got - fd) < 1e-5 * frobenius_norm(got));
    }
}

TEST_CASE("curl kernel antisymmetry and argument-swap transpose") {
    const WaveContext ctx{1.0, 1.0};
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        const Vec3 x{2.0 + rng.uniform01(), rng.normal(), rng.normal()};
        const Vec3 y{-1.0 - rng.uniform01(), rng.normal(), rng.normal()};
        const Mat3C c = curl_dyadic_green(ctx, x, y);
        CHECK(max_abs_entry(c + transpose(c)) < 1e-13 * frobenius_norm(c));
        const Mat3C cswap = curl_dyadic_green(ctx, y, x);
        CHECK(max_abs_entry(c - transpose(cswap)) < 1e-13 * frobenius_norm(c));
    }
}

TEST_CASE("regular imaginary parts agree with Im of the singular kernels") {
    const WaveContext ctx{1.2, 1.8};
    Rng rng(8);
    for (int t = 0; t < 40; ++t) {
        // Separations from 0.05 to ~10 wavenumber units.
        const double r = 0.05 / ctx.kappa * std::pow(200.0, rng.uniform01());
        Vec3 d{rng.normal(), rng.normal(), rng.normal()};
        d = (r / norm(d)) * d;
        const Vec3 y{0.3, -0.2, 0.1};
        const Vec3 x = y + d;
        const Mat3 im_g = im_dyadic_green(ctx, x, y);
        const Mat3 im_g_ref = imag(dyadic_green(ctx, x, y));
        const double scale_g = ctx.eps0 * ctx.kappa;
        CHECK(max_abs_entry(im_g - im_g_ref) < 1e-10 * scale_g);
        const Mat3 im_c = im_curl_dyadic_green(ctx, x, y);
        const Mat3 im_c_ref = imag(curl_dyadic_green(ctx, x, y));
        const double scale_c = ctx.eps0 * ctx.kappa * ctx.kappa;
        CHECK(max_abs_entry(im_c - im_c_ref) < 1e-10 * scale_c);
    }
}

TEST_CASE("imaginary parts: coincidence limits and norm formulas") {
    const WaveContext ctx{2.4, 1.3};
    const Vec3 z{0.7, -0.4, 0.2};
    // Im G(z, z) = -(eps0 kappa / 6 pi) I.
    const Mat3 at_zero = im_dyadic_green(ctx, z, z);
    const Mat3 expected = (-ctx.eps0 * ctx.kappa / (6.0 * pi)) * Mat3::identity();
    CHECK(max_abs_entry(at_zero - expected) < 1e-15 * ctx.eps0 * ctx.kappa);
    CHECK(max_abs_entry(im_curl_dyadic_green(ctx, z, z)) == 0.0);
    // Frobenius norms against the j0/j2 envelope.
    for (double r : {0.3, 0.9, 2.7}) {
        const Vec3 x = z + Vec3{r, 0.0, 0.0};
        const double kr = ctx.kappa * r;
        const double a = ctx.eps0 * ctx.kappa / (4.0 * pi);
        const double j0 = sph_bessel_j0(kr), j2 = sph_bessel_j2(kr);
        const double expected_sq = a * a * ((4.0 / 3.0) * j0 * j0 + (2.0 / 3.0) * j2 * j2);
        const double got = frobenius_norm(im_dyadic_green(ctx, x, z));
        CHECK(got * got == doctest::Approx(expected_sq).epsilon(1e-12));
        const double b = ctx.eps0 * ctx.kappa * ctx.kappa * sph_bessel_j1(kr) / (4.0 * pi);
        const double got_c = frobenius_norm(im_curl_dyadic_green(ctx, x, z));
        CHECK(got_c * got_c == doctest::Approx(2.0 * b * b).epsilon(1e-12));
    }
}

TEST_CASE("singular kernels reject evaluations inside the exclusion radius") {
    const WaveContext ctx{1.0, 1.0};
    const Vec3 x{0.0, 0.0, 0.0};
    const Vec3 y{0.0, 0.0, 0.5 * ctx.r_min()};
    CHECK_THROWS_AS(scalar_green(ctx, x, y), SingularityError);
    CHECK_THROWS_AS(grad_scalar_green(ctx, x, y), SingularityError);
    CHECK_THROWS_AS(dyadic_green(ctx, x, y), SingularityError);
    CHECK_THROWS_AS(curl_dyadic_green(ctx, x, y), SingularityError);
    // The regular imaginary parts are fine everywhere.
    CHECK(std::isfinite(im_dyadic_green(ctx, x, y)(0, 0)));
    CHECK(std::isfinite(im_curl_dyadic_green(ctx, x, y)(0, 0)));
}

TEST_CASE("surface identities converge to the regular predictions") {
    const WaveContext ctx{1.0, 1.0};
    const double lambda = ctx.wavelength();
    const Vec3 x{0.31 * lambda, -0.12 * lambda, 0.05 * lambda};
    const Vec3 y{-0.14 * lambda, 0.22 * lambda, -0.08 * lambda};
    for (HkVariant v : {HkVariant::plain, HkVariant::tangential, HkVariant::curl}) {
        const HkResult near = hk_residual(ctx, v, 6.0 * lambda, x, y, 0, 4);
        const HkResult far = hk_residual(ctx, v, 12.0 * lambda, x, y, 0, 4);
        CHECK(near.prediction_norm > 0.0);
        CHECK(near.residual_norm < 0.12 * near.prediction_norm);
        CHECK(far.residual_norm < 0.06 * far.prediction_norm);
        // First-order decay in 1/R: doubling the radius roughly halves it.
        const double ratio = far.residual_norm / near.residual_norm;
        CHECK(ratio > 0.2);
        CHECK(ratio < 0.8);
    }
}

TEST_CASE("surface quadrature is deterministic across thread counts") {
    const WaveContext ctx{1.0, 1.0};
    const double lambda = ctx.wavelength();
    const Vec3 x{0.2 * lambda, 0.0, 0.1 * lambda};
    const Vec3 y{-0.1 * lambda, 0.15 * lambda, 0.0};
    const HkResult a = hk_residual(ctx, HkVariant::tangential, 5.0 * lambda, x, y, 30000, 1);
    const HkResult b = hk_residual(ctx, HkVariant::tangential, 5.0 * lambda, x, y, 30000, 8);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(a.quadrature(i, j).real() == b.quadrature(i, j).real());
            CHECK(a.quadrature(i, j).imag() == b.quadrature(i, j).imag());
        }
}

TEST_CASE("surface identity preconditions") {
    const WaveContext ctx{1.0, 1.0};
    const double lambda = ctx.wavelength();
    CHECK_THROWS_AS(
        hk_residual(ctx, HkVariant::plain, lambda, {0.6 * lambda, 0, 0}, {0, 0, 0}),
        std::invalid_argument);
    CHECK_THROWS_AS(hk_residual(ctx, HkVariant::plain, -1.0, {0, 0, 0}, {0, 0, 0}),
                    std::invalid_argument);
}
