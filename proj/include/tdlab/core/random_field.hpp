#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tdlab/core/types.hpp"

namespace tdlab {

// Stationary Gaussian random field with covariance
//   E[f(x) f(y)] = sigma^2 exp(-|x - y|^2 / (2 ell^2)),
// realised by random Fourier features:
//   f(x) = sigma sqrt(2/M) sum_m cos(k_m . x + phi_m),
// with k_m ~ N(0, ell^-2 I3) and phi_m ~ U[0, 2 pi).  The covariance identity
// is exact in expectation over the modes for any M; a single realisation is
// only approximately Gaussian, so independent realisations must draw fresh
// modes (pass a fresh seed each time).
struct RandomFieldSpec {
    double sigma = 0.0;
    double corr_len = 1.0;
    std::size_t n_modes = 128;
};

class RandomField {
public:
    RandomField(const RandomFieldSpec& spec, std::uint64_t seed);

    double operator()(const Vec3& x) const;

    std::vector<double> sample(std::span<const Vec3> points) const;

private:
    double amplitude_;
    std::vector<Vec3> wavevectors_;
    std::vector<double> phases_;
};

}  // namespace tdlab
