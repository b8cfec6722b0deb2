#include "fosls/forms.hpp"
#include "fosls/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace fosls;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m)
{
    return Eigen::MatrixXd(m);
}

Coefficients convection()
{
    return Coefficients::identity_diffusion(Vec2(1.0, 1.0), 0.0);
}

double source(const Point& x)
{
    using std::numbers::pi;
    return std::sin(pi * x.x()) * std::cos(2.0 * x.y()) + x.x();
}

Vector random_vector(Eigen::Index n, std::mt19937& rng, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = normal(rng);
    }
    return v;
}

}  // namespace

TEST(Forms, TotalFormSymmetricPositiveDefinite)
{
    const Mesh mesh = unit_square_mesh(2);
    const DofMap dofs = build_dof_map(mesh);
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        for (double k : {0.1, 1e-3, 1e-6}) {
            const Eigen::MatrixXd a = dense(assemble_total_form(mesh, dofs, convection(), k, variant));
            const double scale = a.cwiseAbs().maxCoeff();
            EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-12 * scale);
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
            EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << to_string(variant) << " k=" << k;
        }
    }
}

TEST(Forms, SingleInteriorVertexBlock)
{
    // Level 0 has one hat with ||phi||^2 = 1/6 and ||grad phi||^2 = 4.
    const Mesh mesh = unit_square_mesh(0);
    const DofMap dofs = build_dof_map(mesh);
    const double k = 0.05;
    const Eigen::MatrixXd a = dense(assemble_total_form(mesh, dofs, Coefficients::identity_diffusion(), k, Variant::Primary));
    EXPECT_NEAR(a(0, 0), 1.0 / (6.0 * k) + 4.0, 1e-13);
}

TEST(Forms, PureDiffusionDecouplesUAndSigma)
{
    const Mesh mesh = unit_square_mesh(2);
    const DofMap dofs = build_dof_map(mesh);
    const auto n_u = static_cast<Eigen::Index>(dofs.n_u);
    const auto n_s = static_cast<Eigen::Index>(dofs.n_sigma);
    const double k = 0.01;
    const Eigen::MatrixXd a =
        dense(assemble_total_form(mesh, dofs, Coefficients::identity_diffusion(), k, Variant::Primary));
    const double scale = a.cwiseAbs().maxCoeff();
    EXPECT_LE(a.block(0, n_u, n_u, n_s).cwiseAbs().maxCoeff(), 1e-13 * scale);
    EXPECT_LE(a.block(n_u, 0, n_s, n_u).cwiseAbs().maxCoeff(), 1e-13 * scale);

    // u-u block is mass / k + stiffness
    const Eigen::MatrixXd mass = dense(assemble_term(mesh, dofs, Coefficients::identity_diffusion(),
                                                     Variant::Primary, FormTerm::Mass))
                                     .topLeftCorner(n_u, n_u);
    const Eigen::MatrixXd uu = a.topLeftCorner(n_u, n_u) - mass / k;
    // every triangle is right isosceles, so the cotangent formula gives a
    // stiffness diagonal of 4 at each interior vertex
    for (Eigen::Index i = 0; i < n_u; ++i) {
        EXPECT_NEAR(uu(i, i), 4.0, 1e-12);
    }
    EXPECT_LE((uu - uu.transpose()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Forms, NonsymmetricWithConvection)
{
    const Mesh mesh = unit_square_mesh(1);
    const DofMap dofs = build_dof_map(mesh);
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const Eigen::MatrixXd b = dense(assemble_nonsymmetric_form(mesh, dofs, convection(), 0.1, variant));
        EXPECT_GT((b - b.transpose()).cwiseAbs().maxCoeff(), 1e-3) << to_string(variant);

        const Eigen::MatrixXd a = dense(assemble_symmetric_form(mesh, dofs, convection(), 0.1, variant));
        const Eigen::MatrixXd coupling = dense(assemble_term(mesh, dofs, convection(), variant, FormTerm::Coupling));
        EXPECT_LE((a - b - coupling).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Forms, TermsAreConsistentWithTotal)
{
    const Mesh mesh = unit_square_mesh(1);
    const DofMap dofs = build_dof_map(mesh);
    const double k = 0.02;
    const Variant v = Variant::Alternative;
    const Coefficients c = convection();
    const Eigen::MatrixXd total = dense(assemble_total_form(mesh, dofs, c, k, v));
    const Eigen::MatrixXd sum = dense(assemble_term(mesh, dofs, c, v, FormTerm::Mass)) / k +
                                dense(assemble_term(mesh, dofs, c, v, FormTerm::Coupling)) +
                                dense(assemble_term(mesh, dofs, c, v, FormTerm::Residual)) +
                                k * dense(assemble_term(mesh, dofs, c, v, FormTerm::ResidualProduct)) +
                                dense(assemble_term(mesh, dofs, c, v, FormTerm::Constitutive));
    EXPECT_LE((total - sum).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Forms, LoadVectorOnInitialMesh)
{
    // f = 1, w = 0, beta = 0: F(phi) = int phi = 1/3 and
    // F(tau_e) = -k int div tau_e, which is -k sign_e |e| on boundary edges
    // and cancels on interior edges.
    const Mesh mesh = unit_square_mesh(0);
    const DofMap dofs = build_dof_map(mesh);
    const double k = 0.25;
    const Vector rhs = assemble_rhs(mesh, dofs, Coefficients::identity_diffusion(), k,
                                    [](const Point&) { return 1.0; }, Vector::Zero(1), Variant::Primary);
    EXPECT_NEAR(rhs[0], 1.0 / 3.0, 1e-15);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        for (const EdgeRef& r : mesh.triangle_edges[t]) {
            const double value = rhs[static_cast<Eigen::Index>(dofs.sigma_dof_of_edge[r.index])];
            if (mesh.boundary_edge[r.index]) {
                EXPECT_NEAR(value, -k * r.sign * mesh.edge_length(r.index), 1e-14);
            } else {
                EXPECT_NEAR(value, 0.0, 1e-14);
            }
        }
    }

    // w = 1 as a function: F(phi) = (1/k)(1/3)
    const Vector rhs_w = assemble_rhs(mesh, dofs, Coefficients::identity_diffusion(), k,
                                      [](const Point&) { return 0.0; }, [](const Point&) { return 1.0; },
                                      Variant::Primary);
    EXPECT_NEAR(rhs_w[0], 1.0 / (3.0 * k), 1e-14);
}

TEST(Forms, FunctionalIsQuadraticWithAssembledHessian)
{
    // For the minimizer x, J(x + d) - J(x) = d^T A d.
    const Mesh mesh = unit_square_mesh(2);
    const DofMap dofs = build_dof_map(mesh);
    std::mt19937 rng(5);
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const double k = 0.02;
        const Coefficients c = convection();
        const Vector w = random_vector(static_cast<Eigen::Index>(dofs.n_u), rng, 0.1);
        const SparseMatrix a = assemble_total_form(mesh, dofs, c, k, variant);
        const Vector rhs = assemble_rhs(mesh, dofs, c, k, source, w, variant);
        const Vector x = solve_spd(a, rhs, 1e-13).solution;
        const double jx = evaluate_lsq_functional(split_state(x, dofs), mesh, dofs, c, k, source, w, variant);
        for (int trial = 0; trial < 20; ++trial) {
            const Vector d = random_vector(x.size(), rng, 1e-2);
            const double jy = evaluate_lsq_functional(split_state(x + d, dofs), mesh, dofs, c, k, source, w, variant);
            const double quad = d.dot(a * d);
            EXPECT_GT(jy, jx);
            EXPECT_NEAR(jy - jx, quad, 1e-9 * (quad + jx));
        }
    }
}

TEST(Forms, FunctionalVanishesOnExactDiscreteSolution)
{
    // u = 0, sigma = 0 solves the step with f = 0, w = 0.
    const Mesh mesh = unit_square_mesh(1);
    const DofMap dofs = build_dof_map(mesh);
    const SystemState zero{Vector::Zero(static_cast<Eigen::Index>(dofs.n_u)),
                           Vector::Zero(static_cast<Eigen::Index>(dofs.n_sigma)), 0.0};
    EXPECT_EQ(evaluate_lsq_functional(zero, mesh, dofs, convection(), 0.1, [](const Point&) { return 0.0; },
                                      zero.u, Variant::Primary),
              0.0);
}

TEST(Forms, CoefficientValidation)
{
    const Point x(0.3, 0.3);
    Mat2 nonsym;
    nonsym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW(evaluate_coefficients(Coefficients::constant(nonsym, Vec2::Zero(), 0.0), x), CoefficientError);
    EXPECT_THROW(evaluate_coefficients(Coefficients::constant(-Mat2::Identity(), Vec2::Zero(), 0.0), x),
                 CoefficientError);
    EXPECT_THROW(evaluate_coefficients(Coefficients::constant(Mat2::Identity(), Vec2::Zero(), -1.0), x),
                 CoefficientError);

    Mat2 a;
    a << 4.0, 1.0, 1.0, 3.0;
    const PointCoefficients c = evaluate_coefficients(Coefficients::constant(a, Vec2(1, 2), 0.5), x);
    EXPECT_LE((c.A_sqrt * c.A_sqrt - a).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((c.A_inv_sqrt * c.A_sqrt - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Forms, VariantNames)
{
    EXPECT_EQ(parse_variant("primary"), Variant::Primary);
    EXPECT_EQ(parse_variant("alternative"), Variant::Alternative);
    EXPECT_EQ(parse_variant("alt"), Variant::Alternative);
    EXPECT_THROW(parse_variant("other"), std::invalid_argument);
    EXPECT_STREQ(to_string(Variant::Alternative), "alternative");
}

TEST(Forms, RejectsNonPositiveStep)
{
    const Mesh mesh = unit_square_mesh(0);
    const DofMap dofs = build_dof_map(mesh);
    EXPECT_THROW(assemble_total_form(mesh, dofs, convection(), 0.0, Variant::Primary), std::invalid_argument);
}
