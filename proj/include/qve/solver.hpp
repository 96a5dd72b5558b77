#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qve/model.hpp"

namespace qve {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;

// Solution of the vector equation at a single spectral parameter z in C+.
struct SolutionSlice {
    Complex z;
    VectorXc m;        // Im m_x > 0, |m_x| <= 1/Im z
    double residual = 0.0;  // max_x |m_x + 1/(z + a_x + (Sm)_x)|
    int iterations = 0;
};

struct SolutionGrid {
    const QveModel* model = nullptr;
    std::vector<double> taus;
    std::vector<double> etas;  // strictly descending, positive
    // slices[i][j] solves at taus[i] + i*etas[j]
    std::vector<std::vector<SolutionSlice>> slices;

    void write_csv(const std::string& path) const;
};

struct SolveOptions {
    double tol = 1e-11;
    int max_iter = 20000;
    bool use_newton = true;
};

// D(zeta, omega) = |zeta - omega|^2 / (Im zeta * Im omega).
double hyperbolic_D(Complex zeta, Complex omega);

// One application of the fixed-point map: -1/(z + a + Su) componentwise.
VectorXc phi_map(const QveModel& model, Complex z, const VectorXc& u);

// max_x |m_x + 1/(z + a_x + (Sm)_x)|
double qve_residual(const QveModel& model, Complex z, const VectorXc& m);

// Fixed-point iteration from warm_start (default: constant i), with Newton
// acceleration once the residual is small. Guaranteed to converge by the
// contraction of the map in the hyperbolic metric; Newton only shortcuts it.
SolutionSlice solve_at(const QveModel& model, Complex z,
                       const SolveOptions& opts = {},
                       const std::optional<VectorXc>& warm_start = std::nullopt);

// One Newton step: solves (I - diag(m^2) S_w) delta = Phi(m) - m. Throws
// SingularJacobian when the linear system degenerates; rejects the step if
// the update leaves the upper half-plane.
VectorXc newton_polish(const QveModel& model, Complex z, const VectorXc& m0);

// Column-by-column continuation: each eta level warm-starts from the level
// above via the derivative predictor where the Jacobian solve succeeds.
SolutionGrid solve_grid(const QveModel& model, const std::vector<double>& taus,
                        const std::vector<double>& etas,
                        const SolveOptions& opts = {}, int workers = 1);

// sup_x D(Phi(u)_x, Phi(w)_x) / sup_x D(u_x, w_x); bounded by
// (1 + (Im z)^2/||S||)^-2 whenever ||u||, ||w|| <= 1/Im z (the invariant
// ball of Phi); outside that ball the ratio can exceed the bound.
double contraction_ratio_probe(const QveModel& model, Complex z,
                               const VectorXc& u, const VectorXc& w);

}  // namespace qve
