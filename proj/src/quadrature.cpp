#include "fosls/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fosls {

namespace {

// Rules are assembled from symmetry orbits with weights normalized to area 1.
struct Builder {
    QuadratureRule rule;

    void centroid(double w)
    {
        add({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, w);
    }

    // (a, b, b) and its two rotations
    void orbit3(double a, double w)
    {
        const double b = 0.5 * (1.0 - a);
        add({a, b, b}, w);
        add({b, a, b}, w);
        add({b, b, a}, w);
    }

    // all six permutations of (a, b, c)
    void orbit6(double a, double b, double w)
    {
        const double c = 1.0 - a - b;
        add({a, b, c}, w);
        add({a, c, b}, w);
        add({b, a, c}, w);
        add({b, c, a}, w);
        add({c, a, b}, w);
        add({c, b, a}, w);
    }

    void add(const Barycentric& p, double w)
    {
        rule.points.push_back(p);
        rule.weights.push_back(0.5 * w);
    }

    QuadratureRule finish(int degree)
    {
        rule.exactness_degree = degree;
        return std::move(rule);
    }
};

QuadratureRule dunavant1()
{
    Builder b;
    b.centroid(1.0);
    return b.finish(1);
}

QuadratureRule dunavant2()
{
    Builder b;
    b.orbit3(2.0 / 3.0, 1.0 / 3.0);
    return b.finish(2);
}

QuadratureRule dunavant4()
{
    Builder b;
    b.orbit3(0.108103018168070, 0.223381589678011);
    b.orbit3(0.816847572980459, 0.109951743655322);
    return b.finish(4);
}

QuadratureRule dunavant5()
{
    Builder b;
    b.centroid(0.225);
    b.orbit3(0.059715871789770, 0.132394152788506);
    b.orbit3(0.797426985353087, 0.125939180544827);
    return b.finish(5);
}

QuadratureRule dunavant6()
{
    Builder b;
    b.orbit3(0.501426509658179, 0.116786275726379);
    b.orbit3(0.873821971016996, 0.050844906370207);
    b.orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374);
    return b.finish(6);
}

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
        w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
}

// Duffy collapse of the unit square: x = s, y = r (1 - s), Jacobian (1 - s).
QuadratureRule collapsed_gauss(int degree)
{
    const int n = (degree + 3) / 2;
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(n, x, w);
    QuadratureRule rule;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double s = x[static_cast<std::size_t>(i)];
            const double r = x[static_cast<std::size_t>(j)];
            const double px = s;
            const double py = r * (1.0 - s);
            rule.points.push_back({1.0 - px - py, px, py});
            rule.weights.push_back(w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * (1.0 - s));
        }
    }
    rule.exactness_degree = 2 * n - 2;
    return rule;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree)
{
    static const std::array<QuadratureRule, 10> rules{
        dunavant1(),         dunavant2(),         dunavant4(),         dunavant4(),
        dunavant5(),         dunavant6(),         collapsed_gauss(7),  collapsed_gauss(8),
        collapsed_gauss(9),  collapsed_gauss(10),
    };
    if (degree < 1 || degree > 10) {
        throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
    }
    return rules[static_cast<std::size_t>(degree - 1)];
}

}  // namespace fosls
