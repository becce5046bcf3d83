#pragma once

namespace tdlab {

// Spherical Bessel functions of the first kind, orders 0..2, for real
// arguments.  Closed trigonometric forms with a Taylor-series branch near the
// origin so that values and the j1(x)/x, j2(x)/x^2 limits stay accurate where
// the closed forms lose digits to cancellation.

double sph_bessel_j0(double x);
double sph_bessel_j1(double x);
double sph_bessel_j2(double x);

}  // namespace tdlab
