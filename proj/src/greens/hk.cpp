#include "tdlab/greens/hk.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tdlab/core/parallel.hpp"
#include "tdlab/core/sphere.hpp"

namespace tdlab {

std::size_t hk_auto_nodes(const WaveContext& ctx, double radius) {
    const double kr = ctx.kappa * radius;
    const double n = 40.0 * kr * kr;
    return static_cast<std::size_t>(std::max(2000.0, std::ceil(n)));
}

HkResult hk_residual(const WaveContext& ctx, HkVariant variant, double radius, const Vec3& x,
                     const Vec3& y, std::size_t n_nodes, unsigned threads) {
    if (!(radius > 0.0)) throw std::invalid_argument("hk_residual: radius must be positive");
    if (norm(x) > 0.5 * radius || norm(y) > 0.5 * radius)
        throw std::invalid_argument("hk_residual: probes must lie within radius/2 of the origin");
    const std::size_t n = (n_nodes == 0) ? hk_auto_nodes(ctx, radius) : n_nodes;
    const double w = 4.0 * pi * radius * radius / static_cast<double>(n);

    // Fixed-size chunks summed independently, then combined in chunk order:
    // the reduction tree does not depend on the thread count.
    constexpr std::size_t chunk = 8192;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<Mat3C> partial(n_chunks);

    parallel_for(n_chunks, threads, [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        Mat3C acc;
        for (std::size_t i = begin; i < end; ++i) {
            const Vec3 nu = fibonacci_direction(i, n);
            const Vec3 node = radius * nu;
            Mat3C a, b;
            switch (variant) {
                case HkVariant::plain:
                    a = dyadic_green(ctx, x, node);
                    b = dyadic_green(ctx, y, node);
                    acc += transpose(conj(a)) * b;
                    break;
                case HkVariant::tangential:
                    a = mat_cross(dyadic_green(ctx, x, node), nu);
                    b = mat_cross(dyadic_green(ctx, y, node), nu);
                    acc += transpose(conj(a)) * b;
                    break;
                case HkVariant::curl:
                    a = mat_cross(curl_dyadic_green(ctx, node, x), nu);
                    b = mat_cross(curl_dyadic_green(ctx, node, y), nu);
                    acc += transpose(conj(a)) * b;
                    break;
            }
        }
        partial[c] = acc;
    });

    Mat3C total;
    for (const Mat3C& p : partial) total += p;
    total = total * Complex(w);

    const double factor =
        (variant == HkVariant::curl) ? ctx.kappa * ctx.eps0 : ctx.eps0 / ctx.kappa;
    const Mat3 prediction = (-factor) * im_dyadic_green(ctx, x, y);

    HkResult res;
    res.quadrature = total;
    res.prediction = prediction;
    res.residual_norm = frobenius_norm(total - Mat3C(prediction));
    res.prediction_norm = frobenius_norm(prediction);
    res.n_nodes = n;
    return res;
}

}  // namespace tdlab
