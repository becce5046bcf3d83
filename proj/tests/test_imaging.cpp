#include <doctest.h>

#include <cmath>
#include <vector>

#include "tdlab/core/rng.hpp"
#include "tdlab/core/sphere.hpp"
#include "tdlab/forward/forward.hpp"
#include "tdlab/greens/greens.hpp"
#include "tdlab/imaging/imaging.hpp"
#include "tdlab/scene/scene.hpp"

using namespace tdlab;

namespace {

// Permeability-contrast-only scenario (background elsewhere), contrast 2.
Materials mu_materials() {
    Materials m;
    m.eps0 = m.mu0 = m.omega = 1.0;
    m.eps1 = 1.0;
    m.mu1 = 2.0;
    m.eps2 = 1.0;
    m.mu2 = 2.0;
    return m;
}

// Permittivity-contrast-only counterpart.
Materials eps_materials() {
    Materials m;
    m.eps0 = m.mu0 = m.omega = 1.0;
    m.eps1 = 2.0;
    m.mu1 = 1.0;
    m.eps2 = 2.0;
    m.mu2 = 1.0;
    return m;
}

Mat3 rodrigues(const Vec3& axis_unit, double angle) {
    const Vec3 u = axis_unit;
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (i == j ? c : 0.0) + (1.0 - c) * u[i] * u[j];
    r(0, 1) += -s * u[2];
    r(0, 2) += s * u[1];
    r(1, 0) += s * u[2];
    r(1, 2) += -s * u[0];
    r(2, 0) += -s * u[1];
    r(2, 1) += s * u[0];
    return r;
}

std::vector<Vec3C> random_boundary_values(std::size_t n, Rng& rng) {
    std::vector<Vec3C> v(n);
    for (auto& x : v)
        x = {Complex(rng.normal(), rng.normal()), Complex(rng.normal(), rng.normal()),
             Complex(rng.normal(), rng.normal())};
    return v;
}

}  // namespace

TEST_CASE("search grid: indexing round-trip and point arithmetic") {
    SearchGrid g;
    g.origin = {1.0, -2.0, 0.5};
    g.spacing = 0.25;
    g.dims = {4, 3, 2};
    REQUIRE(g.size() == 24);
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto [ix, iy, iz] = g.unflatten(f);
        CHECK(f == (iz * g.dims[1] + iy) * g.dims[0] + ix);
        const Vec3 p = g.point(f);
        CHECK(p[0] == doctest::Approx(g.origin[0] + g.spacing * ix).epsilon(1e-15));
        CHECK(p[1] == doctest::Approx(g.origin[1] + g.spacing * iy).epsilon(1e-15));
        CHECK(p[2] == doctest::Approx(g.origin[2] + g.spacing * iz).epsilon(1e-15));
    }
}

TEST_CASE("backpropagation: zero data and linearity") {
    const Materials mats = mu_materials();
    const WaveContext ctx = mats.wave();
    const double lambda = mats.wavelength();
    const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 5.0 * lambda, 500);

    const std::vector<Vec3C> zero(mesh.size());
    const BackPropagated z0 = backpropagate(mesh, zero, ctx, Vec3{0.1, 0.2, -0.1});
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(z0.field[k]) == 0.0);
        CHECK(std::abs(z0.curl[k]) == 0.0);
    }

    Rng rng(4242);
    const auto f = random_boundary_values(mesh.size(), rng);
    const auto g = random_boundary_values(mesh.size(), rng);
    const Complex alpha{0.7, -0.3}, beta{-1.1, 0.4};
    std::vector<Vec3C> combo(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) combo[i] = alpha * f[i] + beta * g[i];

    const Vec3 z{0.3, -0.2, 0.4};
    const BackPropagated bf = backpropagate(mesh, f, ctx, z);
    const BackPropagated bg = backpropagate(mesh, g, ctx, z);
    const BackPropagated bc = backpropagate(mesh, combo, ctx, z);
    // The map conjugates the data, so it is antilinear: coefficients conjugate.
    double scale = 0.0, err = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Complex ef = std::conj(alpha) * bf.field[k] + std::conj(beta) * bg.field[k];
        const Complex ec = std::conj(alpha) * bf.curl[k] + std::conj(beta) * bg.curl[k];
        scale = std::max({scale, std::abs(ef), std::abs(ec)});
        err = std::max({err, std::abs(bc.field[k] - ef), std::abs(bc.curl[k] - ec)});
    }
    CHECK(err < 1e-12 * scale);
}

TEST_CASE("pointwise functional: exact zeros for zero data or matched trial") {
    const Materials mats = mu_materials();
    const double lambda = mats.wavelength();
    const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 5.0 * lambda, 400);
    const IncidenceSet inc = IncidenceSet::fibonacci(2);
    const TrialInclusion trial = make_sphere_trial(mats);

    BoundaryData zero;
    zero.mesh = mesh;
    zero.incidences = inc;
    zero.values.assign(inc.size(), std::vector<Vec3C>(mesh.size()));
    for (std::size_t q = 0; q < inc.size(); ++q)
        CHECK(td_single(zero, q, Vec3{0.1, 0.0, 0.0}, mats, trial) == 0.0);

    // Matched trial contrast (a_mu = a_eps = 0) kills the functional even on
    // non-trivial data.
    const Inclusion d = make_sphere_inclusion(mats, Vec3{0.2, 0.1, 0.0}, 0.1);
    const BoundaryData data = synthesize_boundary_data(mesh, inc, mats, d);
    Materials matched = mats;
    matched.mu2 = matched.mu0;
    matched.eps2 = matched.eps0;
    for (std::size_t q = 0; q < inc.size(); ++q)
        CHECK(td_single(data, q, Vec3{0.1, 0.0, 0.0}, matched, trial) == 0.0);
}

TEST_CASE("multi-illumination map: average convention, grid/point agreement, threads") {
    const Materials mats = mu_materials();
    const double lambda = mats.wavelength();
    const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 5.0 * lambda, 600);
    const IncidenceSet inc = IncidenceSet::fibonacci(3);
    const Inclusion d = make_sphere_inclusion(mats, Vec3{0.25, -0.15, 0.1} * lambda, 0.1);
    const TrialInclusion trial = make_sphere_trial(mats);
    const BoundaryData data = synthesize_boundary_data(mesh, inc, mats, d);

    SearchGrid grid;
    grid.origin = d.center - Vec3{lambda / 4.0, lambda / 4.0, 0.0};
    grid.spacing = lambda / 4.0;
    grid.dims = {3, 3, 1};

    const ImagingMap map1 = td_multi(data, grid, mats, trial, 1);
    const ImagingMap map4 = td_multi(data, grid, mats, trial, 4);
    REQUIRE(map1.values.size() == grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) CHECK(map1.values[f] == map4.values[f]);

    for (std::size_t f = 0; f < grid.size(); ++f) {
        const Vec3 z = grid.point(f);
        // Sum over every illumination divided by the direction count.
        double acc = 0.0;
        for (std::size_t q = 0; q < inc.size(); ++q) acc += td_single(data, q, z, mats, trial);
        acc /= static_cast<double>(inc.n_directions());
        CHECK(map1.values[f] == doctest::Approx(acc).epsilon(1e-13));
        CHECK(td_multi_point(data, z, mats, trial) == doctest::Approx(acc).epsilon(1e-13));
    }

    // One direction: the map is the plain two-polarization sum.
    const IncidenceSet single = IncidenceSet::fibonacci(1);
    const BoundaryData sdata = synthesize_boundary_data(mesh, single, mats, d);
    const Vec3 z = d.center + Vec3{0.1, 0.0, 0.0};
    const double expect = td_single(sdata, 0, z, mats, trial) + td_single(sdata, 1, z, mats, trial);
    CHECK(td_multi_point(sdata, z, mats, trial) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("fast synthetic imager agrees with the assembled pipeline") {
    const Materials mats = mu_materials();
    const double lambda = mats.wavelength();
    const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 6.0 * lambda, 2000);
    const IncidenceSet inc = IncidenceSet::fibonacci(8);
    const Inclusion d = make_sphere_inclusion(mats, Vec3{0.25, -0.15, 0.1} * lambda, 0.1);
    const TrialInclusion trial = make_sphere_trial(mats);

    const BoundaryData data = synthesize_boundary_data(mesh, inc, mats, d, 4);
    const SyntheticImager imager(mesh, inc, mats, d, trial);

    SearchGrid grid;
    grid.origin = d.center - Vec3{lambda / 2.0, lambda / 2.0, 0.0};
    grid.spacing = lambda / 2.0;
    grid.dims = {3, 3, 1};
    const ImagingMap direct = td_multi(data, grid, mats, trial, 4);
    const ImagingMap fast = imager.map(grid, 4);

    double scale = 0.0;
    for (double v : direct.values) scale = std::max(scale, std::fabs(v));
    for (std::size_t f = 0; f < grid.size(); ++f) {
        CHECK(std::fabs(fast.values[f] - direct.values[f]) < 1e-10 * scale);
        CHECK(fast.values[f] == doctest::Approx(imager.evaluate(grid.point(f))).epsilon(1e-13));
    }
}

TEST_CASE("closed-form map value at the inclusion centre and its decay") {
    const Materials mats = mu_materials();
    const double lambda = mats.wavelength();
    const double kappa = mats.kappa();
    const Vec3 zd = Vec3{0.25, -0.15, 0.1} * lambda;
    const Inclusion d = make_sphere_inclusion(mats, zd, 0.1 / kappa);
    const TrialInclusion trial = make_sphere_trial(mats);

    // At the centre the closed form reduces to
    //   rho^3 kappa^2 Ctilde (eps0 kappa)^2 / (12 pi^2),
    // which for contrast 2, unit-ball volumes and rho kappa = 0.1 equals
    // pi/3000.
    const TrialConstants tc = trial_constants(mats, d.ref_volume, trial.ref_volume);
    const double rho3 = d.rho * d.rho * d.rho;
    const double predicted = rho3 * kappa * kappa * tc.ctilde_mu *
                             std::pow(mats.eps0 * kappa, 2) / (12.0 * pi * pi);
    const double at_centre = td_closed_form(TrialKind::permeable, zd, mats, d, trial);
    CHECK(at_centre == doctest::Approx(predicted).epsilon(1e-12));
    CHECK(at_centre == doctest::Approx(pi / 3000.0).epsilon(1e-12));
    CHECK(at_centre > 0.0);

    // Same value for the permittivity-contrast twin by symmetry of the
    // reference materials.
    const Materials em = eps_materials();
    const Inclusion de = make_sphere_inclusion(em, zd, 0.1 / kappa);
    const TrialInclusion te = make_sphere_trial(em);
    CHECK(td_closed_form(TrialKind::dielectric, zd, em, de, te) ==
          doctest::Approx(pi / 3000.0).epsilon(1e-12));

    // Far-field decay: the envelope falls like 1/(kappa r)^2.
    const Vec3 dir = unit(Vec3{1.0, 1.0, 0.5});
    const double near = td_closed_form(TrialKind::permeable, zd + (2.0 / kappa) * dir, mats, d, trial);
    const double far = td_closed_form(TrialKind::permeable, zd + (20.0 / kappa) * dir, mats, d, trial);
    CHECK(std::fabs(far) < std::fabs(near));
    CHECK(std::fabs(far) < 0.02 * at_centre);
}

TEST_CASE("imaging map converges to the closed form for a dense direction set") {
    struct Scenario {
        Materials mats;
        TrialKind kind;
    };
    const Scenario scenarios[] = {{mu_materials(), TrialKind::permeable},
                                  {eps_materials(), TrialKind::dielectric}};
    for (const auto& sc : scenarios) {
        const double lambda = sc.mats.wavelength();
        const double kappa = sc.mats.kappa();
        const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 10.0 * lambda, 20000);
        const IncidenceSet inc = IncidenceSet::fibonacci(200);
        const Vec3 zd = Vec3{0.25, -0.15, 0.1} * lambda;
        const Inclusion d = make_sphere_inclusion(sc.mats, zd, 0.1 / kappa);
        const TrialInclusion trial = make_sphere_trial(sc.mats);
        const SyntheticImager imager(mesh, inc, sc.mats, d, trial);

        SearchGrid grid;
        grid.spacing = lambda / 4.0;
        grid.origin = zd - Vec3{2.0 * grid.spacing, 2.0 * grid.spacing, 0.0};
        grid.dims = {5, 5, 1};
        const ImagingMap map = imager.map(grid, 4);

        std::vector<double> closed(grid.size());
        double peak = 0.0;
        for (std::size_t f = 0; f < grid.size(); ++f) {
            closed[f] = td_closed_form(sc.kind, grid.point(f), sc.mats, d, trial);
            peak = std::max(peak, std::fabs(closed[f]));
        }

        // Pointwise: strong values within 5%, the centre within 2%.
        for (std::size_t f = 0; f < grid.size(); ++f) {
            if (std::fabs(closed[f]) >= 0.1 * peak)
                CHECK(std::fabs(map.values[f] - closed[f]) < 0.05 * std::fabs(closed[f]));
            else
                CHECK(std::fabs(map.values[f] - closed[f]) < 0.02 * peak);
        }
        const double centre = imager.evaluate(zd);
        const double cf = td_closed_form(sc.kind, zd, sc.mats, d, trial);
        CHECK(std::fabs(centre - cf) < 0.02 * cf);

        // Correlation across the patch.
        double sa = 0.0, sb = 0.0, sab = 0.0, saa = 0.0, sbb = 0.0;
        const double n = static_cast<double>(grid.size());
        for (std::size_t f = 0; f < grid.size(); ++f) {
            sa += map.values[f];
            sb += closed[f];
            sab += map.values[f] * closed[f];
            saa += map.values[f] * map.values[f];
            sbb += closed[f] * closed[f];
        }
        const double cov = sab / n - (sa / n) * (sb / n);
        const double va = saa / n - (sa / n) * (sa / n);
        const double vb = sbb / n - (sb / n) * (sb / n);
        CHECK(cov / std::sqrt(va * vb) > 0.99);
    }
}

TEST_CASE("trial-contrast sign flip negates the map exactly") {
    const Materials mats = mu_materials();
    const double lambda = mats.wavelength();
    const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 5.0 * lambda, 800);
    const IncidenceSet inc = IncidenceSet::fibonacci(4);
    const Inclusion d = make_sphere_inclusion(mats, Vec3{0.2, -0.1, 0.0} * lambda, 0.1);
    const TrialInclusion trial = make_sphere_trial(mats);
    const BoundaryData data = synthesize_boundary_data(mesh, inc, mats, d);

    // mu2 = 2 gives trial contrast -1/2; mu2 = 1/2 gives +1, i.e. -2 times
    // the original.  With the trial tensor held fixed the functional is
    // linear in the contrast, and the factor -2 is exact in floating point.
    Materials flipped = mats;
    flipped.mu2 = 0.5;
    const Vec3 probes[] = {d.center, d.center + Vec3{0.3 * lambda, 0.0, 0.0},
                           d.center + Vec3{-0.2, 0.4, 0.1} * lambda};
    for (const Vec3& z : probes) {
        const double base = td_multi_point(data, z, mats, trial);
        const double neg = td_multi_point(data, z, flipped, trial);
        CHECK(neg == -2.0 * base);
    }
}

TEST_CASE("imaging map is rotation equivariant to quadrature accuracy") {
    const Materials mats = mu_materials();
    const double lambda = mats.wavelength();
    const double kappa = mats.kappa();
    const SphereMesh mesh = SphereMesh::fibonacci(Vec3{}, 6.0 * lambda, 2000);
    const IncidenceSet inc = IncidenceSet::fibonacci(16);
    const Vec3 zd = Vec3{0.25, -0.15, 0.1} * lambda;
    const Inclusion d = make_sphere_inclusion(mats, zd, 0.1 / kappa);
    const TrialInclusion trial = make_sphere_trial(mats);

    const Mat3 rot = rodrigues(unit(Vec3{1.0, 2.0, 3.0}), 0.7);
    IncidenceSet inc_rot = inc;
    for (auto& it : inc_rot.items) {
        it.theta = rot * it.theta;
        it.pol = rot * it.pol;
    }
    Inclusion d_rot = d;
    d_rot.center = rot * zd;

    const SyntheticImager base(mesh, inc, mats, d, trial);
    const SyntheticImager rotated(mesh, inc_rot, mats, d_rot, trial);

    const Vec3 offsets[] = {{0.0, 0.0, 0.0}, {0.3, 0.0, 0.0}, {-0.2, 0.4, 0.1}, {0.5, 0.5, 0.0}};
    double peak = 0.0, worst = 0.0;
    for (const Vec3& o : offsets) {
        const Vec3 z = zd + o * lambda;
        const double a = base.evaluate(z);
        const double b = rotated.evaluate(rot * z);
        peak = std::max(peak, std::fabs(a));
        worst = std::max(worst, std::fabs(a - b));
    }
    // Measured quadrature asymmetry at this resolution is ~2e-6 of the peak.
    CHECK(worst < 1e-4 * peak);
}

TEST_CASE("peak metrics on an analytic point-spread map") {
    const Materials mats = mu_materials();
    const WaveContext ctx = mats.wave();
    const double lambda = mats.wavelength();
    const double kappa = mats.kappa();
    const double h = lambda / 16.0;

    // True centre deliberately off the nearest grid node.
    const Vec3 zd{0.013 * lambda, -0.007 * lambda, 0.0};
    SearchGrid grid;
    grid.spacing = h;
    grid.dims = {33, 33, 1};
    grid.origin = Vec3{-16.0 * h, -16.0 * h, 0.0};

    ImagingMap map;
    map.grid = grid;
    map.values.resize(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const double nrm = frobenius_norm(im_dyadic_green(ctx, grid.point(f), zd));
        map.values[f] = nrm * nrm;
    }

    const PeakMetrics pm = peak_metrics(map, kappa, zd);
    // Peak on the node nearest the true centre.
    CHECK(pm.localization_error < h);
    CHECK(pm.peak_value > 0.0);

    // Width against a brute-force one-dimensional scan of the same profile.
    const double f0 = std::pow(frobenius_norm(im_dyadic_green(ctx, zd, zd)), 2);
    CHECK(f0 == doctest::Approx(std::pow(mats.eps0 * kappa, 2) / (12.0 * pi * pi)).epsilon(1e-12));
    const double dt = 1e-4 * lambda;
    double oracle = 0.0, prev = f0;
    for (double t = dt; t < lambda; t += dt) {
        const double f = std::pow(frobenius_norm(im_dyadic_green(ctx, zd + Vec3{t, 0.0, 0.0}, zd)), 2);
        if (f < 0.5 * f0) {
            oracle = 2.0 * (t - dt + dt * (prev - 0.5 * f0) / (prev - f));
            break;
        }
        prev = f;
    }
    REQUIRE(oracle > 0.0);
    CHECK(oracle == doctest::Approx(0.44679 * lambda).epsilon(2e-3));
    for (double w : pm.fwhm) {
        CHECK(w > 0.35 * lambda);
        CHECK(w < 0.6 * lambda);
        CHECK(std::fabs(w - oracle) < 0.1 * oracle);
    }
    // The profile is isotropic, so the two axes agree closely.
    CHECK(std::fabs(pm.fwhm[0] - pm.fwhm[1]) < 0.01 * lambda);

    // First sidelobe of the point-spread profile sits below 20% of the peak.
    CHECK(pm.sidelobe_ratio > 0.01);
    CHECK(pm.sidelobe_ratio < 0.2);

    // Constant offsets do not move the argmax.
    ImagingMap shifted = map;
    for (double& v : shifted.values) v += 0.5 * pm.peak_value;
    const PeakMetrics pm2 = peak_metrics(shifted, kappa, zd);
    CHECK(norm(pm2.argmax - pm.argmax) == 0.0);

    // Structureless maps have no peak to report.
    ImagingMap flat = map;
    for (double& v : flat.values) v = 3.25;
    CHECK_THROWS_AS(peak_metrics(flat, kappa, zd), DegenerateMapError);
    for (double& v : flat.values) v = 0.0;
    CHECK_THROWS_AS(peak_metrics(flat, kappa, zd), DegenerateMapError);
}
