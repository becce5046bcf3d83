#include "tdlab/scene/scene.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tdlab/core/bessel.hpp"
#include "tdlab/core/sphere.hpp"

namespace tdlab {

double Materials::kappa() const { return omega * std::sqrt(eps0 * mu0); }

double Materials::wavelength() const { return 2.0 * pi / kappa(); }

void Materials::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("Materials: ") + name +
                                                    " must be positive");
    };
    positive(eps0, "eps0");
    positive(mu0, "mu0");
    positive(eps1, "eps1");
    positive(mu1, "mu1");
    positive(eps2, "eps2");
    positive(mu2, "mu2");
    positive(omega, "omega");
}

Mat3 polarization_tensor_sphere(double ratio, double volume) {
    if (!(ratio > 0.0)) throw std::invalid_argument("polarization_tensor_sphere: ratio must be positive");
    if (!(volume > 0.0)) throw std::invalid_argument("polarization_tensor_sphere: volume must be positive");
    return (3.0 * volume / (2.0 * ratio + 1.0)) * Mat3::identity();
}

Inclusion make_sphere_inclusion(const Materials& mats, const Vec3& center, double rho) {
    Inclusion inc;
    inc.center = center;
    inc.rho = rho;
    inc.ref_volume = 4.0 * pi / 3.0;
    inc.m_mu = polarization_tensor_sphere(mats.mu1r(), inc.ref_volume);
    inc.m_eps = polarization_tensor_sphere(mats.eps1r(), inc.ref_volume);
    return inc;
}

TrialInclusion make_sphere_trial(const Materials& mats) {
    TrialInclusion trial;
    trial.ref_volume = 4.0 * pi / 3.0;
    trial.m_mu = polarization_tensor_sphere(mats.mu2r(), trial.ref_volume);
    trial.m_eps = polarization_tensor_sphere(mats.eps2r(), trial.ref_volume);
    return trial;
}

TrialConstants trial_constants(const Materials& m, double ref_volume_incl,
                               double ref_volume_trial) {
    TrialConstants c;
    c.c_mu = (m.mu1r() - 1.0) * (m.mu2r() - 1.0);
    c.c_eps = (m.eps1r() - 1.0) * (m.eps2r() - 1.0);
    const double e2 = m.eps0 * m.eps0;
    c.ctilde_mu = 36.0 * pi * m.mu1 * m.mu2 * c.c_mu * ref_volume_incl * ref_volume_trial /
                  (e2 * (2.0 * m.mu0 + m.mu1) * (2.0 * m.mu0 + m.mu2));
    c.ctilde_eps = 36.0 * pi * m.eps1 * m.eps2 * c.c_eps * ref_volume_incl * ref_volume_trial /
                   (e2 * (2.0 * m.eps0 + m.eps1) * (2.0 * m.eps0 + m.eps2));
    c.atilde_mu =
        3.0 * std::sqrt(pi) * (m.mu0 - m.mu2) * ref_volume_trial / (m.eps0 * (2.0 * m.mu0 + m.mu2));
    c.atilde_eps = 3.0 * std::sqrt(pi) * (m.eps0 - m.eps2) * ref_volume_trial /
                   (m.eps0 * (2.0 * m.eps0 + m.eps2));
    c.b_mu = 12.0 * pi * (m.mu0 - m.mu2) * ref_volume_trial / (e2 * (2.0 * m.mu0 + m.mu2));
    c.b_eps = 12.0 * pi * (m.eps0 - m.eps2) * ref_volume_trial / (e2 * (2.0 * m.eps0 + m.eps2));
    return c;
}

IncidenceSet IncidenceSet::fibonacci(std::size_t n_directions) {
    if (n_directions == 0)
        throw std::invalid_argument("IncidenceSet: n_directions must be positive");
    IncidenceSet set;
    set.items.reserve(2 * n_directions);
    for (const Vec3& theta : fibonacci_directions(n_directions)) {
        const auto [t1, t2] = orthonormal_triad(theta);
        set.items.push_back({theta, t1});
        set.items.push_back({theta, t2});
    }
    return set;
}

IncidentField incident_field(const Incidence& inc, double kappa, const Vec3& x) {
    if (std::fabs(norm(inc.theta) - 1.0) > 1e-9 || std::fabs(norm(inc.pol) - 1.0) > 1e-9 ||
        std::fabs(dot(inc.theta, inc.pol)) > 1e-9)
        throw std::invalid_argument(
            "incident_field: direction/polarization must be orthonormal unit vectors");
    const Complex phase = std::exp(iu * (kappa * dot(inc.theta, x)));
    IncidentField f;
    f.field = phase * Vec3C(inc.pol);
    f.curl = (iu * kappa * phase) * Vec3C(cross(inc.theta, inc.pol));
    return f;
}

DirectionIdentityScalar direction_identity_scalar(const IncidenceSet& set, double kappa,
                                                  const Vec3& d) {
    const std::size_t n = set.n_directions();
    Complex acc{};
    for (std::size_t j = 0; j < n; ++j)
        acc += std::exp(iu * (kappa * dot(set.items[2 * j].theta, d)));
    DirectionIdentityScalar out;
    out.average = acc / static_cast<double>(n);
    out.prediction = sph_bessel_j0(kappa * norm(d));
    out.error = std::abs(out.average - out.prediction);
    return out;
}

DirectionIdentityMatrix direction_identity_matrix(const IncidenceSet& set, const WaveContext& ctx,
                                                  const Vec3& d, bool use_curl_axis) {
    const std::size_t n = set.n_directions();
    Mat3C acc;
    for (const Incidence& inc : set.items) {
        const Vec3 p = use_curl_axis ? cross(inc.theta, inc.pol) : inc.pol;
        const Complex phase = std::exp(iu * (ctx.kappa * dot(inc.theta, d)));
        acc += Mat3C(outer(p, p)) * phase;
    }
    DirectionIdentityMatrix out;
    out.average = acc * Complex(1.0 / static_cast<double>(n));
    out.prediction = (-4.0 * pi / (ctx.kappa * ctx.eps0)) * im_dyadic_green(ctx, d, Vec3{});
    out.max_entry_error = max_abs_entry(out.average - Mat3C(out.prediction));
    return out;
}

}  // namespace tdlab
