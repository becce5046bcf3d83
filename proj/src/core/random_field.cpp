#include "tdlab/core/random_field.hpp"

#include <cmath>
#include <stdexcept>

#include "tdlab/core/rng.hpp"

namespace tdlab {

RandomField::RandomField(const RandomFieldSpec& spec, std::uint64_t seed) {
    if (spec.n_modes == 0) throw std::invalid_argument("RandomField: n_modes must be positive");
    if (!(spec.corr_len > 0.0)) throw std::invalid_argument("RandomField: corr_len must be positive");
    if (spec.sigma < 0.0) throw std::invalid_argument("RandomField: sigma must be non-negative");
    amplitude_ = spec.sigma * std::sqrt(2.0 / static_cast<double>(spec.n_modes));
    Rng rng = make_stream(seed, "random-field-modes");
    const double inv_ell = 1.0 / spec.corr_len;
    wavevectors_.reserve(spec.n_modes);
    phases_.reserve(spec.n_modes);
    for (std::size_t m = 0; m < spec.n_modes; ++m) {
        wavevectors_.push_back(
            {inv_ell * rng.normal(), inv_ell * rng.normal(), inv_ell * rng.normal()});
        phases_.push_back(2.0 * pi * rng.uniform01());
    }
}

double RandomField::operator()(const Vec3& x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < wavevectors_.size(); ++m)
        s += std::cos(dot(wavevectors_[m], x) + phases_[m]);
    return amplitude_ * s;
}

std::vector<double> RandomField::sample(std::span<const Vec3> points) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const Vec3& p : points) out.push_back((*this)(p));
    return out;
}

}  // namespace tdlab
