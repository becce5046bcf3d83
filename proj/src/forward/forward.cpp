#include "tdlab/forward/forward.hpp"

#include <cmath>
#include <stdexcept>

#include "tdlab/core/parallel.hpp"
#include "tdlab/core/rng.hpp"
#include "tdlab/greens/greens.hpp"

namespace tdlab {

BoundaryData synthesize_boundary_data(const SphereMesh& mesh, const IncidenceSet& incidences,
                                      const Materials& mats, const Inclusion& inclusion,
                                      unsigned threads, double perturbation_scale,
                                      std::uint64_t perturbation_seed) {
    mats.validate();
    const WaveContext ctx = mats.wave();
    const Vec3 z = inclusion.center;
    if (norm(z - mesh.center) >= mesh.radius)
        throw std::invalid_argument("synthesize_boundary_data: inclusion must lie inside the mesh");

    const double rho3 = inclusion.rho * inclusion.rho * inclusion.rho;
    const double c_mu = rho3 * ctx.kappa * ctx.kappa * (mats.mu1r() - 1.0) / mats.eps0;
    const double c_eps = rho3 * (mats.eps1r() - 1.0) / mats.eps0;

    // Node-dependent factors are shared by all illuminations: precompute
    //   A_i = c_mu  [G(z, y_i) x nu_i] M_mu
    //   B_i = c_eps [C(y_i, z) x nu_i] M_eps
    const std::size_t nn = mesh.size();
    std::vector<Mat3C> a(nn), b(nn);
    parallel_for(nn, threads, [&](std::size_t i) {
        const Vec3& y = mesh.nodes[i];
        const Vec3& nu = mesh.normals[i];
        a[i] = mat_cross(dyadic_green(ctx, z, y), nu) * inclusion.m_mu * Complex(c_mu);
        b[i] = mat_cross(curl_dyadic_green(ctx, y, z), nu) * inclusion.m_eps * Complex(c_eps);
    });

    BoundaryData data;
    data.mesh = mesh;
    data.incidences = incidences;
    data.values.assign(incidences.size(), {});
    parallel_for(incidences.size(), threads, [&](std::size_t q) {
        const IncidentField f0 = incident_field(incidences.items[q], ctx.kappa, z);
        auto& row = data.values[q];
        row.resize(nn);
        for (std::size_t i = 0; i < nn; ++i) row[i] = a[i] * f0.field + b[i] * f0.curl;
    });

    if (perturbation_scale != 0.0) {
        // Next-order robustness probe: a smooth deterministic tangential field of
        // magnitude scale * rho^4, drawn once per illumination from its own stream.
        const double rho4 = rho3 * inclusion.rho;
        parallel_for(incidences.size(), threads, [&](std::size_t q) {
            Rng rng = make_stream(perturbation_seed, "forward-perturbation", q);
            constexpr int n_modes = 4;
            Vec3 kvec[n_modes], amp_re[n_modes], amp_im[n_modes];
            for (int m = 0; m < n_modes; ++m) {
                kvec[m] = ctx.kappa * Vec3{rng.normal(), rng.normal(), rng.normal()};
                amp_re[m] = {rng.normal(), rng.normal(), rng.normal()};
                amp_im[m] = {rng.normal(), rng.normal(), rng.normal()};
            }
            auto& row = data.values[q];
            for (std::size_t i = 0; i < nn; ++i) {
                const Vec3& y = mesh.nodes[i];
                Vec3C v{};
                for (int m = 0; m < n_modes; ++m) {
                    const Complex phase = std::exp(iu * dot(kvec[m], y));
                    v += phase * Vec3C{Complex(amp_re[m].x, amp_im[m].x),
                                       Complex(amp_re[m].y, amp_im[m].y),
                                       Complex(amp_re[m].z, amp_im[m].z)};
                }
                // Tangential part only, matching the structure of admissible data.
                const Vec3& nu = mesh.normals[i];
                row[i] += (perturbation_scale * rho4) * cross(cross(nu, v), nu);
            }
        });
    }
    return data;
}

std::vector<Vec3C> draw_noise(const SphereMesh& mesh, double sigma, std::uint64_t seed,
                              std::uint64_t trial, std::size_t incidence_index) {
    // One stream per (trial, illumination): the stream index packs both so
    // that neither loop order nor threading changes the draws.
    Rng rng = make_stream(seed, "measurement-noise", (trial << 20) ^ incidence_index);
    std::vector<Vec3C> eta(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const double var = sigma * sigma / mesh.weights[i];
        eta[i] = {rng.circular_normal(var), rng.circular_normal(var), rng.circular_normal(var)};
    }
    return eta;
}

void add_measurement_noise(BoundaryData& data, const MeasurementNoiseSpec& spec,
                           const WaveContext& ctx, std::uint64_t seed, std::uint64_t trial,
                           unsigned threads) {
    if (spec.sigma < 0.0)
        throw std::invalid_argument("add_measurement_noise: sigma must be non-negative");
    if (spec.sigma == 0.0) return;
    const SphereMesh& mesh = data.mesh;
    const std::size_t nn = mesh.size();
    parallel_for(data.values.size(), threads, [&](std::size_t q) {
        const std::vector<Vec3C> eta = draw_noise(mesh, spec.sigma, seed, trial, q);
        auto& row = data.values[q];
        for (std::size_t i = 0; i < nn; ++i) row[i] += 0.5 * cross(eta[i], mesh.normals[i]);
        if (spec.filter_mode == MeasurementNoiseSpec::Filter::farfield) {
            for (std::size_t i = 0; i < nn; ++i) {
                Vec3C layer{};
                for (std::size_t j = 0; j < nn; ++j) {
                    if (j == i) continue;
                    layer += mesh.weights[j] * (dyadic_green(ctx, mesh.nodes[j], mesh.nodes[i]) * eta[j]);
                }
                row[i] -= (iu * ctx.kappa / ctx.eps0) * cross(layer, mesh.normals[i]);
            }
        }
    });
}

}  // namespace tdlab
