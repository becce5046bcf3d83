#include "tdlab/imaging/imaging.hpp"

#include <cmath>
#include <stdexcept>

#include "tdlab/core/parallel.hpp"
#include "tdlab/greens/greens.hpp"

namespace tdlab {

BackPropagated backpropagate(const SphereMesh& mesh, const std::vector<Vec3C>& values,
                             const WaveContext& ctx, const Vec3& z) {
    if (values.size() != mesh.size())
        throw std::invalid_argument("backpropagate: data size does not match mesh");
    Vec3C u{}, cu{};
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const Vec3C tangential = mesh.weights[i] * cross(Vec3C(mesh.normals[i]), conj(values[i]));
        u += dyadic_green(ctx, mesh.nodes[i], z) * tangential;
        cu += curl_dyadic_green(ctx, z, mesh.nodes[i]) * tangential;
    }
    const double s = -1.0 / ctx.eps0;
    return {s * u, s * cu};
}

namespace {

double td_from_fields(const BackPropagated& bp, const IncidentField& f0, double kappa, double a_mu,
                      double a_eps, const Mat3& m_mu, const Mat3& m_eps) {
    const Complex term_mu = kappa * kappa * a_mu * dot(bp.field, m_mu * f0.field);
    const Complex term_eps = a_eps * dot(bp.curl, m_eps * f0.curl);
    return -(term_mu + term_eps).real();
}

}  // namespace

double td_single(const BoundaryData& data, std::size_t incidence_index, const Vec3& z,
                 const Materials& mats, const TrialInclusion& trial) {
    const WaveContext ctx = mats.wave();
    const BackPropagated bp = backpropagate(data.mesh, data.values.at(incidence_index), ctx, z);
    const IncidentField f0 = incident_field(data.incidences.items.at(incidence_index), ctx.kappa, z);
    return td_from_fields(bp, f0, ctx.kappa, mats.a_mu(), mats.a_eps(), trial.m_mu, trial.m_eps);
}

namespace {

double td_multi_at(const BoundaryData& data, const Vec3& z, const Materials& mats,
                   const TrialInclusion& trial, const WaveContext& ctx) {
    const SphereMesh& mesh = data.mesh;
    const std::size_t nn = mesh.size();
    const std::size_t nq = data.n_incidences();
    // Evaluate both kernels once per node, then accumulate every
    // illumination's back-propagated fields in the same pass.
    std::vector<Vec3C> u(nq), cu(nq);
    for (std::size_t i = 0; i < nn; ++i) {
        const Mat3C g = dyadic_green(ctx, mesh.nodes[i], z);
        const Mat3C c = curl_dyadic_green(ctx, z, mesh.nodes[i]);
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3C tangential =
                mesh.weights[i] * cross(Vec3C(mesh.normals[i]), conj(data.values[q][i]));
            u[q] += g * tangential;
            cu[q] += c * tangential;
        }
    }
    const double s = -1.0 / ctx.eps0;
    double acc = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
        const IncidentField f0 = incident_field(data.incidences.items[q], ctx.kappa, z);
        acc += td_from_fields({s * u[q], s * cu[q]}, f0, ctx.kappa, mats.a_mu(), mats.a_eps(),
                              trial.m_mu, trial.m_eps);
    }
    return acc / static_cast<double>(data.incidences.n_directions());
}

}  // namespace

double td_multi_point(const BoundaryData& data, const Vec3& z, const Materials& mats,
                      const TrialInclusion& trial) {
    return td_multi_at(data, z, mats, trial, mats.wave());
}

ImagingMap td_multi(const BoundaryData& data, const SearchGrid& grid, const Materials& mats,
                    const TrialInclusion& trial, unsigned threads) {
    ImagingMap map;
    map.grid = grid;
    map.values.assign(grid.size(), 0.0);
    const WaveContext ctx = mats.wave();
    parallel_for(grid.size(), threads, [&](std::size_t flat) {
        map.values[flat] = td_multi_at(data, grid.point(flat), mats, trial, ctx);
    });
    return map;
}

SyntheticImager::SyntheticImager(const SphereMesh& mesh, const IncidenceSet& incidences,
                                 const Materials& mats, const Inclusion& inclusion,
                                 const TrialInclusion& trial)
    : mesh_(mesh), incidences_(incidences), ctx_(mats.wave()), center_(inclusion.center) {
    mats.validate();
    kappa_ = ctx_.kappa;
    a_mu_ = mats.a_mu();
    a_eps_ = mats.a_eps();
    trial_m_mu_ = trial.m_mu;
    trial_m_eps_ = trial.m_eps;

    const double rho3 = inclusion.rho * inclusion.rho * inclusion.rho;
    const Complex c_mu = rho3 * kappa_ * kappa_ * (mats.mu1r() - 1.0) / mats.eps0;
    const Complex c_eps = rho3 * (mats.eps1r() - 1.0) / mats.eps0;

    const std::size_t nn = mesh.size();
    b1_.resize(nn);
    b2_.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        const Vec3& y = mesh.nodes[i];
        const Vec3& nu = mesh.normals[i];
        const Mat3C g1 = mat_cross(dyadic_green(ctx_, center_, y), nu) * inclusion.m_mu * c_mu;
        const Mat3C g2 = mat_cross(curl_dyadic_green(ctx_, y, center_), nu) * inclusion.m_eps * c_eps;
        const Mat3C nx{cross_matrix(nu)};
        b1_[i] = nx * conj(g1) * Complex(mesh.weights[i]);
        b2_[i] = nx * conj(g2) * Complex(mesh.weights[i]);
    }
}

double SyntheticImager::evaluate(const Vec3& z) const {
    // Node sums shared by every illumination.
    Mat3C p, q, pc, qc;
    for (std::size_t i = 0; i < mesh_.size(); ++i) {
        const Mat3C g = dyadic_green(ctx_, mesh_.nodes[i], z);
        const Mat3C c = curl_dyadic_green(ctx_, z, mesh_.nodes[i]);
        p += g * b1_[i];
        q += g * b2_[i];
        pc += c * b1_[i];
        qc += c * b2_[i];
    }
    const Complex s(-1.0 / ctx_.eps0);
    p = p * s;
    q = q * s;
    pc = pc * s;
    qc = qc * s;

    double acc = 0.0;
    const Vec3 dz = z - center_;
    for (const Incidence& inc : incidences_.items) {
        const Vec3C pol{inc.pol};
        const Vec3C axis{cross(inc.theta, inc.pol)};
        const Complex phase = std::exp(iu * (kappa_ * dot(inc.theta, dz)));
        // conj(curl H0(z_D)) carries -i kappa relative to conj(H0(z_D)).
        const Vec3C w1 = p * pol - (iu * kappa_) * (q * axis);
        const Vec3C w2 = pc * pol - (iu * kappa_) * (qc * axis);
        const Vec3 u = (kappa_ * kappa_ * a_mu_) * (trial_m_mu_ * inc.pol);
        const Vec3C v = (iu * kappa_ * a_eps_) * Vec3C(trial_m_eps_ * cross(inc.theta, inc.pol));
        acc += -(phase * (dot(w1, u) + dot(w2, v))).real();
    }
    return acc / static_cast<double>(incidences_.n_directions());
}

ImagingMap SyntheticImager::map(const SearchGrid& grid, unsigned threads) const {
    ImagingMap out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);
    parallel_for(grid.size(), threads,
                 [&](std::size_t flat) { out.values[flat] = evaluate(grid.point(flat)); });
    return out;
}

double td_closed_form(TrialKind kind, const Vec3& z, const Materials& mats,
                      const Inclusion& inclusion, const TrialInclusion& trial) {
    const WaveContext ctx = mats.wave();
    const Mat3 img = im_dyadic_green(ctx, z, inclusion.center);
    const double rho3 = inclusion.rho * inclusion.rho * inclusion.rho;
    const double kappa2 = ctx.kappa * ctx.kappa;
    double contrast;
    Mat3 m_d, m_s;
    if (kind == TrialKind::permeable) {
        contrast = (mats.mu1r() - 1.0) * (mats.mu2r() - 1.0);
        m_d = inclusion.m_mu;
        m_s = trial.m_mu;
    } else {
        contrast = (mats.eps1r() - 1.0) * (mats.eps2r() - 1.0);
        m_d = inclusion.m_eps;
        m_s = trial.m_eps;
    }
    const double pref = 4.0 * pi * rho3 * kappa2 * contrast / (mats.eps0 * mats.eps0);
    return pref * contract(img * m_d, m_s * img);
}

PeakMetrics peak_metrics(const ImagingMap& map, double kappa, const Vec3& z_true) {
    const SearchGrid& grid = map.grid;
    if (map.values.empty()) throw std::invalid_argument("peak_metrics: empty map");
    std::size_t best = 0, worst = 0;
    for (std::size_t i = 1; i < map.values.size(); ++i) {
        if (map.values[i] > map.values[best]) best = i;
        if (map.values[i] < map.values[worst]) worst = i;
    }
    if (map.values[best] == map.values[worst])
        throw DegenerateMapError("peak_metrics: map is constant");

    PeakMetrics pm;
    pm.argmax = grid.point(best);
    pm.peak_value = map.values[best];
    pm.localization_error = norm(pm.argmax - z_true);

    // Full width at half maximum along the first two extended axes.
    const auto idx = grid.unflatten(best);
    const double half = 0.5 * pm.peak_value;
    int slot = 0;
    for (int axis = 0; axis < 3 && slot < 2; ++axis) {
        if (grid.dims[axis] <= 1) continue;
        auto value_at = [&](std::size_t k) {
            auto j = idx;
            j[axis] = k;
            return map.values[(j[2] * grid.dims[1] + j[1]) * grid.dims[0] + j[0]];
        };
        auto half_width = [&](int dir) {
            double prev = pm.peak_value;
            std::size_t steps = 0;
            for (std::size_t k = idx[axis];;) {
                if (dir > 0 ? (k + 1 >= grid.dims[axis]) : (k == 0)) break;
                k = dir > 0 ? k + 1 : k - 1;
                ++steps;
                const double v = value_at(k);
                if (v < half) {
                    const double t = (prev - half) / (prev - v);
                    return (static_cast<double>(steps - 1) + t) * grid.spacing;
                }
                prev = v;
            }
            return static_cast<double>(steps) * grid.spacing;  // ran off the grid
        };
        pm.fwhm[slot++] = half_width(+1) + half_width(-1);
    }

    // Largest relative map value outside the main lobe.
    const double exclusion = 0.6 * (2.0 * pi / kappa);
    double side = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        if (norm(grid.point(i) - pm.argmax) <= exclusion) continue;
        any = true;
        side = std::max(side, map.values[i] / pm.peak_value);
    }
    pm.sidelobe_ratio = any ? side : 0.0;
    return pm;
}

}  // namespace tdlab
