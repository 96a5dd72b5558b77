#pragma once

#include <map>
#include <utility>

#include "qve/solver.hpp"

namespace qve {

// 2x2 block profile: alpha on I x I, beta off-diagonal, gamma on I^c x I^c,
// with I = [0, delta].
struct BlockParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double delta = 0.5;
};

QveModel semicircle_model(Eigen::Index n);

// Closed form (-z + sqrt(z^2 - 4))/2 for the constant-kernel model; defined
// for Im z > 0 and for real |z| > 2 (increasing real branch).
Complex semicircle_exact(Complex z);

QveModel block_model(const BlockParams& params, Eigen::Index n);

// Critical delta for the cusp in the special case beta = 1, gamma = 1/alpha:
// (alpha-2)^3 / (9 (alpha^3 - 2 alpha^2 + 2 alpha - 1)), alpha > 2.
double delta_critical(double alpha);

// Two-component reduction of the block model; independent oracle for the
// full n-point solve.
std::pair<Complex, Complex> reduced_block_solve(const BlockParams& params,
                                                Complex z, double tol = 1e-13,
                                                int max_iter = 1000000);

QveModel deformed_wigner_model(double lambda, const Eigen::VectorXd& a_profile,
                               Eigen::Index n);

// Kernel sampled from the Fourier sum 4 sum_{p,q} e^{-i 2 pi (p x - q y)} cov(p,q)
// on the uniform grid of [0,1]^2. cov must make the sum real.
QveModel translation_invariant_model(
    const std::map<std::pair<int, int>, double>& cov, Eigen::Index n);

}  // namespace qve
