#pragma once

// Small fixed-size real/complex vector and matrix types used throughout the
// library.  All products are bilinear: dot(a, b) and contract(A, B) never
// conjugate an argument.  Callers that need a sesquilinear pairing conjugate
// explicitly at the call site, which keeps every formula in the source visually
// identical to its derivation.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace tdlab {

using Complex = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr Complex iu{0.0, 1.0};

// ---------------------------------------------------------------------------
// Vec3 (real)
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 unit(const Vec3& v) { return v / norm(v); }

// ---------------------------------------------------------------------------
// Vec3C (complex)
// ---------------------------------------------------------------------------

struct Vec3C {
    Complex x{}, y{}, z{};

    Vec3C() = default;
    Vec3C(Complex a, Complex b, Complex c) : x(a), y(b), z(c) {}
    explicit Vec3C(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

    Complex operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3C operator+(const Vec3C& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3C operator-(const Vec3C& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3C operator-() const { return {-x, -y, -z}; }
    Vec3C operator*(Complex s) const { return {x * s, y * s, z * s}; }
    Vec3C& operator+=(const Vec3C& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3C& operator-=(const Vec3C& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline Vec3C operator*(Complex s, const Vec3C& v) { return v * s; }
inline Vec3C operator*(double s, const Vec3C& v) { return v * Complex(s); }

// Bilinear: no conjugation of either argument.
inline Complex dot(const Vec3C& a, const Vec3C& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Complex dot(const Vec3C& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Complex dot(const Vec3& a, const Vec3C& b) { return b.x * a.x + b.y * a.y + b.z * a.z; }

inline Vec3C cross(const Vec3C& a, const Vec3C& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3C cross(const Vec3C& a, const Vec3& b) { return cross(a, Vec3C(b)); }
inline Vec3C cross(const Vec3& a, const Vec3C& b) { return cross(Vec3C(a), b); }

inline Vec3C conj(const Vec3C& v) { return {std::conj(v.x), std::conj(v.y), std::conj(v.z)}; }
inline Vec3 real(const Vec3C& v) { return {v.x.real(), v.y.real(), v.z.real()}; }
inline Vec3 imag(const Vec3C& v) { return {v.x.imag(), v.y.imag(), v.z.imag()}; }

inline double norm(const Vec3C& v) {
    return std::sqrt(std::norm(v.x) + std::norm(v.y) + std::norm(v.z));
}

// ---------------------------------------------------------------------------
// Mat3 (real, row-major)
// ---------------------------------------------------------------------------

struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    double& operator()(std::size_t i, std::size_t j) { return m[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return m[i][j]; }

    static constexpr Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
        return *this;
    }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Vec3C operator*(const Mat3& a, const Vec3C& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

// Full contraction A : B = sum_ij A_ij B_ij (bilinear).
inline double contract(const Mat3& a, const Mat3& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a(i, j) * b(i, j);
    return s;
}

inline double frobenius_norm(const Mat3& a) { return std::sqrt(contract(a, a)); }

// [v]_x, the matrix with [v]_x w = v x w.
inline Mat3 cross_matrix(const Vec3& v) {
    Mat3 r;
    r(0, 1) = -v.z; r(0, 2) = v.y;
    r(1, 0) = v.z;  r(1, 2) = -v.x;
    r(2, 0) = -v.y; r(2, 1) = v.x;
    return r;
}

// A x nu, the matrix with (A x nu) p = (A p) x nu; equals -[nu]_x A.
inline Mat3 mat_cross(const Mat3& a, const Vec3& nu) {
    return (cross_matrix(nu) * a) * -1.0;
}

// ---------------------------------------------------------------------------
// Mat3C (complex, row-major)
// ---------------------------------------------------------------------------

struct Mat3C {
    std::array<std::array<Complex, 3>, 3> m{};

    Mat3C() = default;
    explicit Mat3C(const Mat3& a) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = a(i, j);
    }

    Complex& operator()(std::size_t i, std::size_t j) { return m[i][j]; }
    Complex operator()(std::size_t i, std::size_t j) const { return m[i][j]; }

    static Mat3C identity() {
        Mat3C r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }

    Mat3C operator+(const Mat3C& o) const {
        Mat3C r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
    Mat3C operator-(const Mat3C& o) const {
        Mat3C r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }
    Mat3C operator*(Complex s) const {
        Mat3C r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
    Mat3C& operator+=(const Mat3C& o) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
        return *this;
    }
    Mat3C& operator-=(const Mat3C& o) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] -= o.m[i][j];
        return *this;
    }
};

inline Mat3C operator*(Complex s, const Mat3C& a) { return a * s; }
inline Mat3C operator*(const Mat3C& a, double s) { return a * Complex(s); }

inline Vec3C operator*(const Mat3C& a, const Vec3C& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}
inline Vec3C operator*(const Mat3C& a, const Vec3& v) { return a * Vec3C(v); }

inline Mat3C operator*(const Mat3C& a, const Mat3C& b) {
    Mat3C r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Complex s{};
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}
inline Mat3C operator*(const Mat3& a, const Mat3C& b) { return Mat3C(a) * b; }
inline Mat3C operator*(const Mat3C& a, const Mat3& b) { return a * Mat3C(b); }

inline Mat3C transpose(const Mat3C& a) {
    Mat3C r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

inline Mat3C conj(const Mat3C& a) {
    Mat3C r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = std::conj(a(i, j));
    return r;
}

inline Mat3C adjoint(const Mat3C& a) { return conj(transpose(a)); }

inline Mat3 real(const Mat3C& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(i, j).real();
    return r;
}

inline Mat3 imag(const Mat3C& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(i, j).imag();
    return r;
}

inline Mat3C outer(const Vec3C& a, const Vec3C& b) {
    Mat3C r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

// Full contraction A : B = sum_ij A_ij B_ij (bilinear, no conjugation).
inline Complex contract(const Mat3C& a, const Mat3C& b) {
    Complex s{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a(i, j) * b(i, j);
    return s;
}
inline Complex contract(const Mat3& a, const Mat3C& b) { return contract(Mat3C(a), b); }
inline Complex contract(const Mat3C& a, const Mat3& b) { return contract(a, Mat3C(b)); }

inline double frobenius_norm(const Mat3C& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

inline Mat3C mat_cross(const Mat3C& a, const Vec3& nu) {
    return Mat3C(cross_matrix(nu)) * a * Complex(-1.0);
}

inline double max_abs_entry(const Mat3C& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s = std::max(s, std::abs(a(i, j)));
    return s;
}

inline double max_abs_entry(const Mat3& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s = std::max(s, std::abs(a(i, j)));
    return s;
}

}  // namespace tdlab
