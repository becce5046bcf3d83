#include "tdlab/core/sphere.hpp"

#include <cmath>
#include <stdexcept>

namespace tdlab {

namespace {
const double golden_angle = pi * (3.0 - std::sqrt(5.0));
}

Vec3 fibonacci_direction(std::size_t i, std::size_t n) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    return {r * std::cos(phi), r * std::sin(phi), z};
}

std::vector<Vec3> fibonacci_directions(std::size_t n) {
    if (n == 0) throw std::invalid_argument("fibonacci_directions: n must be positive");
    std::vector<Vec3> dirs;
    dirs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) dirs.push_back(fibonacci_direction(i, n));
    return dirs;
}

SphereMesh SphereMesh::fibonacci(const Vec3& center, double radius, std::size_t n_nodes) {
    if (radius <= 0.0) throw std::invalid_argument("SphereMesh: radius must be positive");
    if (n_nodes == 0) throw std::invalid_argument("SphereMesh: n_nodes must be positive");
    SphereMesh mesh;
    mesh.center = center;
    mesh.radius = radius;
    mesh.nodes.reserve(n_nodes);
    mesh.normals.reserve(n_nodes);
    mesh.weights.assign(n_nodes, 4.0 * pi * radius * radius / static_cast<double>(n_nodes));
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const Vec3 d = fibonacci_direction(i, n_nodes);
        mesh.normals.push_back(d);
        mesh.nodes.push_back(center + radius * d);
    }
    return mesh;
}

std::pair<Vec3, Vec3> orthonormal_triad(const Vec3& theta) {
    const double n = norm(theta);
    if (!(n > 0.0)) throw std::invalid_argument("orthonormal_triad: zero direction");
    const Vec3 t = theta / n;
    // Reference axis: e1 when t is nearly +-e3 (so that t = e3 yields exactly
    // (e1, e2)), otherwise e3.
    const Vec3 a = (std::fabs(t.z) > 0.9) ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    const Vec3 t2 = unit(cross(t, a));
    const Vec3 t1 = cross(t2, t);
    return {t1, t2};
}

}  // namespace tdlab
