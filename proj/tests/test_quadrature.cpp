#include "fosls/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace fosls;

namespace {

double factorial(int n)
{
    return n <= 1 ? 1.0 : n * factorial(n - 1);
}

// Integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!
double monomial_integral(int a, int b)
{
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

double apply(const QuadratureRule& rule, int a, int b)
{
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        sum += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
    }
    return sum;
}

}  // namespace

TEST(Quadrature, WeightsSumToReferenceArea)
{
    for (int degree = 1; degree <= 10; ++degree) {
        const QuadratureRule& rule = triangle_rule(degree);
        EXPECT_NEAR(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0), 0.5, 1e-15) << degree;
        EXPECT_GE(rule.exactness_degree, degree);
        EXPECT_EQ(rule.points.size(), rule.weights.size());
    }
}

TEST(Quadrature, PointsAreInsideAndBarycentric)
{
    for (int degree = 1; degree <= 10; ++degree) {
        const QuadratureRule& rule = triangle_rule(degree);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            EXPECT_GT(rule.weights[q], 0.0);
            EXPECT_NEAR(rule.points[q][0] + rule.points[q][1] + rule.points[q][2], 1.0, 1e-15);
            for (double l : rule.points[q]) {
                EXPECT_GE(l, 0.0);
            }
        }
    }
}

TEST(Quadrature, ExactForMonomialsUpToDegree)
{
    for (int degree = 1; degree <= 10; ++degree) {
        const QuadratureRule& rule = triangle_rule(degree);
        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                EXPECT_NEAR(apply(rule, a, b), monomial_integral(a, b), 1e-13)
                    << "degree " << degree << " monomial x^" << a << " y^" << b;
            }
        }
    }
}

TEST(Quadrature, DegreeFourExample)
{
    EXPECT_NEAR(apply(triangle_rule(4), 2, 2), 1.0 / 180.0, 1e-15);
}

TEST(Quadrature, NotExactBeyondItsDegree)
{
    // the one-point rule misses x^2
    EXPECT_GT(std::abs(apply(triangle_rule(1), 2, 0) - monomial_integral(2, 0)), 1e-3);
}

TEST(Quadrature, WorkingDegreesAndErrors)
{
    EXPECT_EQ(kAssemblyDegree, 4);
    EXPECT_EQ(kErrorDegree, 6);
    EXPECT_THROW(triangle_rule(0), std::invalid_argument);
    EXPECT_THROW(triangle_rule(11), std::invalid_argument);
}
