#pragma once

#include "fosls/mesh.hpp"

#include <vector>

namespace fosls {

/// Quadrature rule on the reference triangle {(0,0), (1,0), (0,1)}.
/// Points are barycentric; weights sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<Barycentric> points;
    std::vector<double> weights;
    int exactness_degree = 0;

    [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// A rule with positive weights that is exact for polynomials of total degree
/// `degree` (1 <= degree <= 10). Degrees 1, 2, 4, 5 and 6 are the symmetric
/// Dunavant rules; degree 3 reuses the degree-4 rule; degrees 7 to 10 use a
/// collapsed Gauss-Legendre product rule. Throws std::invalid_argument for
/// unsupported degrees.
const QuadratureRule& triangle_rule(int degree);

inline constexpr int kAssemblyDegree = 4;
inline constexpr int kErrorDegree = 6;

}  // namespace fosls
