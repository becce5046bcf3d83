#include "tdlab/stability/stability.hpp"

#include <cmath>
#include <stdexcept>

#include "tdlab/core/parallel.hpp"
#include "tdlab/core/rng.hpp"
#include "tdlab/greens/greens.hpp"

namespace tdlab {

namespace {

// Per-node linear maps taking the conjugated noise vector to the
// back-propagated field and curl at z.
struct TransferMatrices {
    std::vector<Mat3C> field;
    std::vector<Mat3C> curl;
};

TransferMatrices noise_transfer(const SphereMesh& mesh, const WaveContext& ctx,
                                MeasurementNoiseSpec::Filter filter, const Vec3& z,
                                unsigned threads) {
    const std::size_t nn = mesh.size();
    TransferMatrices tm;
    tm.field.resize(nn);
    tm.curl.resize(nn);
    parallel_for(nn, threads, [&](std::size_t j) {
        const Mat3 proj = Mat3::identity() - outer(mesh.normals[j], mesh.normals[j]);
        const Complex base(-mesh.weights[j] / (2.0 * ctx.eps0));
        tm.field[j] = dyadic_green(ctx, mesh.nodes[j], z) * proj * base;
        tm.curl[j] = curl_dyadic_green(ctx, z, mesh.nodes[j]) * proj * base;
    });
    if (filter == MeasurementNoiseSpec::Filter::farfield) {
        // Boundary-layer correction: the filtered datum at node m gains
        //   -(i kappa/eps0) [sum_{j != m} w_j G(y_j, y_m) eta_j] x nu_m,
        // which back-propagates to an extra linear map per source node j.
        std::vector<Mat3C> gm(nn), cm(nn);
        for (std::size_t m = 0; m < nn; ++m) {
            const Mat3 proj = Mat3::identity() - outer(mesh.normals[m], mesh.normals[m]);
            const Complex wm(mesh.weights[m]);
            gm[m] = dyadic_green(ctx, mesh.nodes[m], z) * proj * wm;
            cm[m] = curl_dyadic_green(ctx, z, mesh.nodes[m]) * proj * wm;
        }
        parallel_for(nn, threads, [&](std::size_t j) {
            Mat3C extra_f, extra_c;
            for (std::size_t m = 0; m < nn; ++m) {
                if (m == j) continue;
                const Mat3C link = conj(dyadic_green(ctx, mesh.nodes[j], mesh.nodes[m]));
                extra_f += gm[m] * link;
                extra_c += cm[m] * link;
            }
            const Complex s = -iu * ctx.kappa / (ctx.eps0 * ctx.eps0) * mesh.weights[j];
            tm.field[j] += extra_f * s;
            tm.curl[j] += extra_c * s;
        });
    }
    return tm;
}

Mat3 limit_prediction_field(const WaveContext& ctx, double sigma, const Vec3& z, const Vec3& zp) {
    return (-sigma * sigma / (4.0 * ctx.kappa * ctx.eps0)) * im_dyadic_green(ctx, z, zp);
}

Mat3 limit_prediction_curl(const WaveContext& ctx, double sigma, const Vec3& z, const Vec3& zp) {
    return (-sigma * sigma * ctx.kappa / (4.0 * ctx.eps0)) * im_dyadic_green(ctx, z, zp);
}

}  // namespace

NoiseCovariancePair exact_noise_covariance(const SphereMesh& mesh, const WaveContext& ctx,
                                           const MeasurementNoiseSpec& spec, const Vec3& z,
                                           const Vec3& zp, unsigned threads) {
    const TransferMatrices a = noise_transfer(mesh, ctx, spec.filter_mode, z, threads);
    const bool same = norm(z - zp) == 0.0;
    const TransferMatrices b = same ? TransferMatrices{} : noise_transfer(mesh, ctx, spec.filter_mode, zp, threads);
    const auto& bf = same ? a.field : b.field;
    const auto& bc = same ? a.curl : b.curl;
    Mat3C cov_f, cov_c;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        const double s = spec.sigma * spec.sigma / mesh.weights[j];
        cov_f += a.field[j] * adjoint(bf[j]) * Complex(s);
        cov_c += a.curl[j] * adjoint(bc[j]) * Complex(s);
    }
    return {cov_f, cov_c};
}

NoiseCovarianceMC mc_noise_covariance(const SphereMesh& mesh, const WaveContext& ctx,
                                      const MeasurementNoiseSpec& spec, const Vec3& z,
                                      const Vec3& zp, std::size_t n_trials, std::uint64_t seed,
                                      unsigned threads) {
    if (n_trials < 2) throw std::invalid_argument("mc_noise_covariance: need at least 2 trials");
    const TransferMatrices ta = noise_transfer(mesh, ctx, spec.filter_mode, z, threads);
    const bool same = norm(z - zp) == 0.0;
    const TransferMatrices tb_store =
        same ? TransferMatrices{} : noise_transfer(mesh, ctx, spec.filter_mode, zp, threads);
    const TransferMatrices& tb = same ? ta : tb_store;

    std::vector<Mat3C> prod_f(n_trials), prod_c(n_trials);
    parallel_for(n_trials, threads, [&](std::size_t t) {
        const std::vector<Vec3C> eta = draw_noise(mesh, spec.sigma, seed, t, 0);
        Vec3C ua{}, ca{}, ub{}, cb{};
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            const Vec3C ebar = conj(eta[j]);
            ua += ta.field[j] * ebar;
            ca += ta.curl[j] * ebar;
            if (!same) {
                ub += tb.field[j] * ebar;
                cb += tb.curl[j] * ebar;
            }
        }
        if (same) {
            ub = ua;
            cb = ca;
        }
        prod_f[t] = outer(ua, conj(ub));
        prod_c[t] = outer(ca, conj(cb));
    });

    auto summarize = [&](const std::vector<Mat3C>& prods) {
        CovarianceEstimate est;
        Mat3 sum_re, sum_im, sq_re, sq_im;
        for (const Mat3C& p : prods) {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double re = p(i, j).real(), im = p(i, j).imag();
                    sum_re(i, j) += re;
                    sum_im(i, j) += im;
                    sq_re(i, j) += re * re;
                    sq_im(i, j) += im * im;
                }
        }
        const double n = static_cast<double>(prods.size());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double mre = sum_re(i, j) / n;
                const double mim = sum_im(i, j) / n;
                est.mean(i, j) = Complex(mre, mim);
                est.stderr_re(i, j) = std::sqrt(std::max(0.0, sq_re(i, j) / n - mre * mre) / n);
                est.stderr_im(i, j) = std::sqrt(std::max(0.0, sq_im(i, j) / n - mim * mim) / n);
            }
        return est;
    };

    NoiseCovarianceMC out;
    out.field = summarize(prod_f);
    out.curl = summarize(prod_c);
    out.predicted_field = limit_prediction_field(ctx, spec.sigma, z, zp);
    out.predicted_curl = limit_prediction_curl(ctx, spec.sigma, z, zp);
    out.n_trials = n_trials;
    return out;
}

double td_cov_prediction(TrialKind kind, const Vec3& z, const Vec3& zp, const Materials& mats,
                         const TrialInclusion& trial, double sigma, std::size_t n_directions) {
    if (n_directions == 0)
        throw std::invalid_argument("td_cov_prediction: n_directions must be positive");
    const WaveContext ctx = mats.wave();
    const double a = (kind == TrialKind::permeable) ? mats.a_mu() : mats.a_eps();
    const Mat3& m = (kind == TrialKind::permeable) ? trial.m_mu : trial.m_eps;
    const Mat3 img = im_dyadic_green(ctx, z, zp);
    const double pref = pi * a * a * sigma * sigma * ctx.kappa * ctx.kappa /
                        (2.0 * static_cast<double>(n_directions) * mats.eps0 * mats.eps0);
    return pref * contract(img * m, m * img);
}

SnrPoint mc_snr(const SphereMesh& mesh, const Materials& mats, const Inclusion& inclusion,
                const TrialInclusion& trial, std::size_t n_directions, double sigma,
                MeasurementNoiseSpec::Filter filter, std::size_t n_trials, std::uint64_t seed,
                unsigned threads) {
    if (n_trials < 2) throw std::invalid_argument("mc_snr: need at least 2 trials");
    const WaveContext ctx = mats.wave();
    const Vec3 z = inclusion.center;
    const IncidenceSet incidences = IncidenceSet::fibonacci(n_directions);

    const SyntheticImager imager(mesh, incidences, mats, inclusion, trial);
    const double signal = imager.evaluate(z);

    const TransferMatrices tm = noise_transfer(mesh, ctx, filter, z, threads);
    const std::size_t nn = mesh.size();
    const std::size_t nq = incidences.size();

    // Coefficients of the linear form  td_noise = -(1/n) sum_q Re sum_j
    // conj(eta_j^q) . c_j^q  with the same transfer matrices for every q.
    std::vector<Vec3C> coef(nq * nn);
    parallel_for(nq, threads, [&](std::size_t q) {
        const IncidentField f0 = incident_field(incidences.items[q], ctx.kappa, z);
        const Vec3C a = (ctx.kappa * ctx.kappa * mats.a_mu()) * (Mat3C(trial.m_mu) * f0.field);
        const Vec3C b = mats.a_eps() * (Mat3C(trial.m_eps) * f0.curl);
        for (std::size_t j = 0; j < nn; ++j)
            coef[q * nn + j] = transpose(tm.field[j]) * a + transpose(tm.curl[j]) * b;
    });

    std::vector<double> samples(n_trials);
    parallel_for(n_trials, threads, [&](std::size_t t) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            const std::vector<Vec3C> eta = draw_noise(mesh, sigma, seed, t, q);
            Complex dotsum{};
            for (std::size_t j = 0; j < nn; ++j) dotsum += dot(conj(eta[j]), coef[q * nn + j]);
            acc += dotsum.real();
        }
        samples[t] = signal - acc / static_cast<double>(n_directions);
    });

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n_trials);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_trials - 1);

    SnrPoint p;
    p.mean = mean;
    p.stddev = std::sqrt(var);
    p.snr = p.stddev > 0.0 ? mean / p.stddev : 0.0;
    p.n_trials = n_trials;
    return p;
}

SnrScalingReport snr_scaling(const SphereMesh& mesh, const Materials& mats,
                             const Inclusion& inclusion, const TrialInclusion& trial,
                             std::size_t n_directions, double sigma,
                             MeasurementNoiseSpec::Filter filter, std::size_t n_trials,
                             std::uint64_t seed, unsigned threads) {
    Inclusion big = inclusion;
    big.rho = 2.0 * inclusion.rho;
    SnrScalingReport r;
    r.base = mc_snr(mesh, mats, inclusion, trial, n_directions, sigma, filter, n_trials, seed,
                    threads);
    r.incidences_x4 = mc_snr(mesh, mats, inclusion, trial, 4 * n_directions, sigma, filter,
                             n_trials, seed + 1, threads);
    r.rho_x2 = mc_snr(mesh, mats, big, trial, n_directions, sigma, filter, n_trials, seed + 2,
                      threads);
    r.sigma_x2 = mc_snr(mesh, mats, inclusion, trial, n_directions, 2.0 * sigma, filter, n_trials,
                        seed + 3, threads);
    r.ratio_incidences = r.incidences_x4.snr / r.base.snr;
    r.ratio_rho = r.rho_x2.snr / r.base.snr;
    r.ratio_sigma = r.sigma_x2.snr / r.base.snr;
    return r;
}

// ---------------------------------------------------------------------------
// Medium noise
// ---------------------------------------------------------------------------

namespace {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by Newton
// iteration on the Legendre polynomial.
void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double t = std::cos(pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            const double dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        const double dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

}  // namespace

VolumeMesh VolumeMesh::ball(const Vec3& center, double radius, std::size_t n_radial,
                            std::size_t n_angular, double taper_width) {
    if (!(radius > 0.0)) throw std::invalid_argument("VolumeMesh: radius must be positive");
    if (n_radial == 0 || n_angular == 0)
        throw std::invalid_argument("VolumeMesh: rule sizes must be positive");
    if (taper_width < 0.0 || taper_width > radius)
        throw std::invalid_argument("VolumeMesh: taper width must lie in [0, radius]");
    std::vector<double> gx, gw;
    gauss_legendre(n_radial, gx, gw);
    const auto dirs = fibonacci_directions(n_angular);
    VolumeMesh mesh;
    mesh.nodes.reserve(n_radial * n_angular);
    mesh.weights.reserve(n_radial * n_angular);
    mesh.taper.reserve(n_radial * n_angular);
    const double r_edge = radius - taper_width;
    for (std::size_t g = 0; g < n_radial; ++g) {
        const double r = 0.5 * radius * (gx[g] + 1.0);
        const double wr = 0.5 * radius * gw[g] * r * r * (4.0 * pi / static_cast<double>(n_angular));
        double chi = 1.0;
        if (taper_width > 0.0 && r > r_edge) {
            const double s = (r - r_edge) / taper_width;
            const double c = std::cos(0.5 * pi * s);
            chi = c * c;
        }
        for (const Vec3& d : dirs) {
            mesh.nodes.push_back(center + r * d);
            mesh.weights.push_back(wr);
            mesh.taper.push_back(chi);
        }
    }
    return mesh;
}

SpeckleKernel speckle_kernel_for(MediumKind medium, TrialKind trial) {
    if (medium == MediumKind::permeability)
        return trial == TrialKind::permeable ? SpeckleKernel::q_gamma
                                             : SpeckleKernel::q_gamma_tilde;
    return trial == TrialKind::permeable ? SpeckleKernel::q_alpha : SpeckleKernel::q_alpha_tilde;
}

double speckle_kernel(SpeckleKernel kind, const Mat3& a, const WaveContext& ctx, const Vec3& y,
                      const Vec3& z) {
    switch (kind) {
        case SpeckleKernel::q_gamma: {
            const Mat3 g = im_dyadic_green(ctx, y, z);
            return contract(g, a * g);
        }
        case SpeckleKernel::q_gamma_tilde: {
            const Mat3 c = im_curl_dyadic_green(ctx, z, y);  // curl_z Im G(y, z)
            return contract(c, a * c);
        }
        case SpeckleKernel::q_alpha: {
            const Mat3 c = im_curl_dyadic_green(ctx, y, z);  // curl_y Im G(y, z)
            return contract(c * a, c);
        }
        case SpeckleKernel::q_alpha_tilde: {
            const Mat3 g = im_dyadic_green(ctx, y, z);
            return contract(g * a, g);
        }
    }
    return 0.0;
}

double speckle_prefactor(MediumKind medium, TrialKind trial, const Materials& mats) {
    const double k2 = mats.kappa() * mats.kappa();
    const double e2 = mats.eps0 * mats.eps0;
    if (medium == MediumKind::permeability)
        return (trial == TrialKind::permeable) ? -4.0 * pi * k2 * mats.a_mu() / e2
                                               : -4.0 * pi * mats.a_eps() / e2;
    return (trial == TrialKind::permeable) ? -4.0 * pi * mats.a_mu() / e2
                                           : -4.0 * pi * k2 * mats.a_eps() / e2;
}

double speckle_sample(MediumKind medium, TrialKind trial, const Mat3& trial_tensor,
                      const Materials& mats, const VolumeMesh& mesh,
                      std::span<const double> field, const Vec3& z) {
    if (field.size() != mesh.size())
        throw std::invalid_argument("speckle_sample: field size does not match mesh");
    const WaveContext ctx = mats.wave();
    const SpeckleKernel kind = speckle_kernel_for(medium, trial);
    double acc = 0.0;
    for (std::size_t k = 0; k < mesh.size(); ++k)
        acc += mesh.weights[k] * mesh.taper[k] * field[k] *
               speckle_kernel(kind, trial_tensor, ctx, mesh.nodes[k], z);
    return speckle_prefactor(medium, trial, mats) * acc;
}

double speckle_cov_prediction(MediumKind medium, TrialKind trial, const Mat3& trial_tensor,
                              const Materials& mats, const VolumeMesh& mesh,
                              const RandomFieldSpec& field_spec, const Vec3& z, const Vec3& zp,
                              unsigned threads) {
    const WaveContext ctx = mats.wave();
    const SpeckleKernel kind = speckle_kernel_for(medium, trial);
    const std::size_t n = mesh.size();
    std::vector<double> qa(n), qb(n);
    parallel_for(n, threads, [&](std::size_t k) {
        const double wk = mesh.weights[k] * mesh.taper[k];
        qa[k] = wk * speckle_kernel(kind, trial_tensor, ctx, mesh.nodes[k], z);
        qb[k] = wk * speckle_kernel(kind, trial_tensor, ctx, mesh.nodes[k], zp);
    });
    const double s2 = field_spec.sigma * field_spec.sigma;
    const double inv2l2 = 1.0 / (2.0 * field_spec.corr_len * field_spec.corr_len);
    std::vector<double> row(n);
    parallel_for(n, threads, [&](std::size_t k) {
        double acc = 0.0;
        const Vec3 yk = mesh.nodes[k];
        for (std::size_t l = 0; l < n; ++l) {
            const Vec3 d = yk - mesh.nodes[l];
            acc += qb[l] * std::exp(-dot(d, d) * inv2l2);
        }
        row[k] = qa[k] * acc;
    });
    double total = 0.0;
    for (double v : row) total += v;
    const double pref = speckle_prefactor(medium, trial, mats);
    return pref * pref * s2 * total;
}

SpeckleCovarianceReport speckle_covariance(MediumKind medium, TrialKind trial,
                                           const Mat3& trial_tensor, const Materials& mats,
                                           const VolumeMesh& mesh,
                                           const RandomFieldSpec& field_spec, const Vec3& z,
                                           const Vec3& zp, std::size_t n_realizations,
                                           std::uint64_t seed, unsigned threads) {
    if (n_realizations < 2)
        throw std::invalid_argument("speckle_covariance: need at least 2 realizations");
    const WaveContext ctx = mats.wave();
    const SpeckleKernel kind = speckle_kernel_for(medium, trial);
    const std::size_t n = mesh.size();
    const double pref = speckle_prefactor(medium, trial, mats);
    std::vector<double> qa(n), qb(n);
    parallel_for(n, threads, [&](std::size_t k) {
        const double wk = mesh.weights[k] * mesh.taper[k];
        qa[k] = wk * speckle_kernel(kind, trial_tensor, ctx, mesh.nodes[k], z);
        qb[k] = wk * speckle_kernel(kind, trial_tensor, ctx, mesh.nodes[k], zp);
    });

    std::vector<double> sa(n_realizations), sb(n_realizations);
    parallel_for(n_realizations, threads, [&](std::size_t t) {
        // Fresh modes per realisation: the covariance identity of the random
        // Fourier features holds in expectation over the modes.
        const std::uint64_t field_seed = make_stream(seed, "speckle-realization", t).next_u64();
        const RandomField rf(field_spec, field_seed);
        double acc_a = 0.0, acc_b = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double g = rf(mesh.nodes[k]);
            acc_a += qa[k] * g;
            acc_b += qb[k] * g;
        }
        sa[t] = pref * acc_a;
        sb[t] = pref * acc_b;
    });

    double ma = 0.0, mb = 0.0;
    for (std::size_t t = 0; t < n_realizations; ++t) {
        ma += sa[t];
        mb += sb[t];
    }
    ma /= static_cast<double>(n_realizations);
    mb /= static_cast<double>(n_realizations);
    double cov = 0.0, var_prod = 0.0;
    for (std::size_t t = 0; t < n_realizations; ++t) {
        const double p = (sa[t] - ma) * (sb[t] - mb);
        cov += p;
        var_prod += p * p;
    }
    cov /= static_cast<double>(n_realizations - 1);
    var_prod = var_prod / static_cast<double>(n_realizations) - cov * cov;

    SpeckleCovarianceReport rep;
    rep.predicted =
        speckle_cov_prediction(medium, trial, trial_tensor, mats, mesh, field_spec, z, zp, threads);
    rep.empirical = cov;
    rep.stderr_empirical =
        std::sqrt(std::max(0.0, var_prod) / static_cast<double>(n_realizations));
    rep.n_realizations = n_realizations;
    return rep;
}

Vec3C born_speckle_backprop(MediumKind medium, const WaveContext& ctx, const VolumeMesh& mesh,
                            std::span<const double> field, const Incidence& inc, const Vec3& z) {
    if (field.size() != mesh.size())
        throw std::invalid_argument("born_speckle_backprop: field size does not match mesh");
    Vec3C acc{};
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        const double f = mesh.weights[k] * mesh.taper[k] * field[k];
        if (f == 0.0) continue;
        const IncidentField h0 = incident_field(inc, ctx.kappa, mesh.nodes[k]);
        if (medium == MediumKind::permeability) {
            acc += f * (im_dyadic_green(ctx, mesh.nodes[k], z) * conj(h0.field));
        } else {
            const Mat3 c = im_curl_dyadic_green(ctx, mesh.nodes[k], z);
            acc += f * (transpose(c) * conj(h0.curl));
        }
    }
    const double pref = (medium == MediumKind::permeability) ? -ctx.kappa / ctx.eps0
                                                             : -1.0 / (ctx.eps0 * ctx.kappa);
    return pref * acc;
}

}  // namespace tdlab
