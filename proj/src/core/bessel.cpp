#include "tdlab/core/bessel.hpp"

#include <cmath>

namespace tdlab {

namespace {

// Below this point the closed trigonometric forms subtract nearly equal
// O(1/x^n) terms and lose up to n digits; the alternating power series has
// rapidly shrinking terms there and converges to full precision in about a
// dozen iterations.
constexpr double series_threshold = 1.0;

// j_n(x) = x^n sum_k (-x^2/2)^k / (k! (2n+2k+1)!!), evaluated with a running
// term until it stops contributing.
double series_jn(int n, double x) {
    double term = 1.0;
    for (int m = 3; m <= 2 * n + 1; m += 2) term /= static_cast<double>(m);
    for (int p = 0; p < n; ++p) term *= x;
    double sum = term;
    const double mx2h = -0.5 * x * x;
    for (int k = 1; k < 40; ++k) {
        term *= mx2h / (static_cast<double>(k) * static_cast<double>(2 * n + 2 * k + 1));
        const double next = sum + term;
        if (next == sum) break;
        sum = next;
    }
    return sum;
}

}  // namespace

double sph_bessel_j0(double x) {
    if (std::fabs(x) < series_threshold) return series_jn(0, x);
    return std::sin(x) / x;
}

double sph_bessel_j1(double x) {
    if (std::fabs(x) < series_threshold) return series_jn(1, x);
    return std::sin(x) / (x * x) - std::cos(x) / x;
}

double sph_bessel_j2(double x) {
    if (std::fabs(x) < series_threshold) return series_jn(2, x);
    const double x2 = x * x;
    return (3.0 / x2 - 1.0) * std::sin(x) / x - 3.0 * std::cos(x) / x2;
}

}  // namespace tdlab
