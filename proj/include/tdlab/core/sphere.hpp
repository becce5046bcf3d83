#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tdlab/core/types.hpp"

namespace tdlab {

// Deterministic quasi-uniform unit directions from the Fibonacci (golden
// angle) lattice.  Point i sits at height z_i = 1 - (2i+1)/n and azimuth
// i * pi * (3 - sqrt(5)).
std::vector<Vec3> fibonacci_directions(std::size_t n);

// Closed-form evaluation of a single Fibonacci direction, for callers that
// stream very large node sets without materialising them.
Vec3 fibonacci_direction(std::size_t i, std::size_t n);

// Equal-weight quadrature mesh on a sphere surface: node positions, outward
// unit normals, and weights summing to the sphere area 4 pi r^2.
struct SphereMesh {
    Vec3 center{};
    double radius = 1.0;
    std::vector<Vec3> nodes;
    std::vector<Vec3> normals;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    static SphereMesh fibonacci(const Vec3& center, double radius, std::size_t n_nodes);
};

// Right-handed orthonormal pair (t1, t2) completing theta: t1 x t2 = theta,
// all three mutually orthogonal unit vectors.  theta = e3 maps to (e1, e2);
// the branch choice is deterministic in theta.
std::pair<Vec3, Vec3> orthonormal_triad(const Vec3& theta);

}  // namespace tdlab
