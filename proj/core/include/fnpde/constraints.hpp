#ifndef FNPDE_CONSTRAINTS_HPP
#define FNPDE_CONSTRAINTS_HPP

#include "fnpde/tensor.hpp"

// Pointwise nonlinear step of the least-squares splitting: the closest
// symmetric matrix (in the Frobenius norm) to a given one that satisfies the
// operator constraint F(Q) = 0. All constraints here are rotation invariant,
// so each projection reduces to a small problem over the eigenvalues.

namespace fnpde {

// Eigendecomposition A = R(theta) diag(lambda1, lambda2) R(theta)^T with
// lambda1 <= lambda2 and R(theta) the rotation by theta (first column is the
// eigenvector of lambda1).
struct Eigen2 {
    double lambda1{0.0};
    double lambda2{0.0};
    double theta{0.0};
};

Eigen2 eigen2(const SymMat2& a);
SymMat2 from_eigen(const Eigen2& e);

// Closest matrix with det Q = f and positive eigenvalues (convex branch).
// f = 0 is accepted and handled as the degenerate limit (one eigenvalue 0,
// the other clamped nonnegative).
SymMat2 project_monge_ampere(const SymMat2& a, double f);

// Closest matrix with alpha * sum lambda^+ + sum lambda^- = f, alpha > 1.
// The constraint is linear on each sign orthant of the eigenvalue plane;
// the per-orthant projections are compared and the global best returned.
SymMat2 project_pucci(const SymMat2& a, double f, double alpha);

// sigma_2 = det in 2D: evaluates both the positive and the negative
// eigenvalue branch of det Q = f (f > 0) and returns the closer one.
SymMat2 project_sigma2(const SymMat2& a, double f);

// Right-hand sides of the gradient-dependent operators, evaluated with an
// explicitly supplied (frozen) gradient.
// Prescribed Gauss curvature: K (1 + |grad|^2)^((d+2)/2), d = 2.
double effective_rhs_minkowski(double k, const Vec2& grad);

// Brenier optimal transport: mu0(x) / mu1(grad u), with the target density
// clamped away from zero so early iterates that leave the support stay
// finite.
inline constexpr double kTransportDensityFloor = 1e-6;
double effective_rhs_transport(double mu0_at_x, double mu1_at_grad);

// Residuals F(Q) for feasibility checks.
double residual_monge_ampere(const SymMat2& q, double f);
double residual_pucci(const SymMat2& q, double f, double alpha);

// 1D inner problem of the determinant projections: minimizes
// (t - a1)^2 + (f/t - a2)^2 over t > 0 (global bracketing scan, then a
// golden-section and a safeguarded Newton refinement). Exposed for tests.
double det_branch_minimizer(double a1, double a2, double f);

}  // namespace fnpde

#endif
