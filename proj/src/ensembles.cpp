#include "qve/ensembles.hpp"

#include <cmath>

namespace qve {

QveModel semicircle_model(Eigen::Index n) {
    return build_model(Eigen::VectorXd::Constant(n, 1.0 / double(n)),
                       Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Ones(n, n));
}

Complex semicircle_exact(Complex z) {
    if (z.imag() <= 0.0) {
        if (z.imag() < 0.0 || std::abs(z.real()) < 2.0)
            throw BranchUndefined(
                "semicircle_exact: defined on C+ and real |z| >= 2");
    }
    // Principal square roots of z -+ 2 give the branch with m ~ -1/z at
    // infinity and Im m > 0 on C+, and the increasing real branch on |z| >= 2.
    return 0.5 * (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0));
}

QveModel block_model(const BlockParams& params, Eigen::Index n) {
    if (params.alpha <= 0.0 || params.beta <= 0.0 || params.gamma <= 0.0)
        throw Error("block_model: alpha, beta, gamma must be positive");
    if (params.delta <= 0.0 || params.delta > 0.5)
        throw Error("block_model: delta must lie in (0, 1/2]");
    if (n < 2) throw Error("block_model: n must be at least 2");
    const Eigen::Index k = Eigen::Index(std::ceil(params.delta * double(n)));
    if (k < 1 || k >= n)
        throw DegenerateBlock("block_model: block I = first ceil(delta*n) "
                              "indices is empty or covers everything");
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool ii = i < k, jj = j < k;
            s(i, j) = (ii && jj) ? params.alpha
                      : (!ii && !jj) ? params.gamma
                                     : params.beta;
        }
    return build_model(Eigen::VectorXd::Constant(n, 1.0 / double(n)),
                       Eigen::VectorXd::Zero(n), s);
}

double delta_critical(double alpha) {
    if (alpha <= 2.0)
        throw AlphaOutOfRange("delta_critical: requires alpha > 2");
    const double num = std::pow(alpha - 2.0, 3);
    const double den = 9.0 * (alpha * alpha * alpha - 2.0 * alpha * alpha +
                              2.0 * alpha - 1.0);
    return num / den;
}

std::pair<Complex, Complex> reduced_block_solve(const BlockParams& params,
                                                Complex z, double tol,
                                                int max_iter) {
    Eigen::VectorXd w(2);
    w << params.delta, 1.0 - params.delta;
    Eigen::MatrixXd s(2, 2);
    s << params.alpha, params.beta, params.beta, params.gamma;
    QveModel reduced = build_model(w, Eigen::VectorXd::Zero(2), s);
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    SolutionSlice slice = solve_at(reduced, z, opts);
    return {slice.m[0], slice.m[1]};
}

QveModel deformed_wigner_model(double lambda, const Eigen::VectorXd& a_profile,
                               Eigen::Index n) {
    if (lambda <= 0.0) throw Error("deformed_wigner_model: lambda must be positive");
    if (a_profile.size() != n)
        throw DimensionMismatch("deformed_wigner_model: profile length != n");
    return build_model(Eigen::VectorXd::Constant(n, 1.0 / double(n)), a_profile,
                       Eigen::MatrixXd::Constant(n, n, lambda));
}

QveModel translation_invariant_model(
    const std::map<std::pair<int, int>, double>& cov, Eigen::Index n) {
    const Eigen::VectorXd x = grid_positions(n);
    Eigen::MatrixXcd s_complex = Eigen::MatrixXcd::Zero(n, n);
    const Complex two_pi_i(0.0, 2.0 * M_PI);
    for (const auto& [pq, c] : cov) {
        const auto [p, q] = pq;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                s_complex(i, j) +=
                    4.0 * c * std::exp(-two_pi_i * (p * x[i] - q * x[j]));
    }
    const double max_imag = s_complex.imag().cwiseAbs().maxCoeff();
    if (max_imag > 1e-10)
        throw ComplexKernel("translation_invariant_model: kernel has imaginary "
                            "part " + std::to_string(max_imag));
    Eigen::MatrixXd s = s_complex.real();
    const double min_entry = s.minCoeff();
    if (min_entry < -1e-10)
        throw NegativeKernel("translation_invariant_model: kernel entry " +
                             std::to_string(min_entry));
    s = s.cwiseMax(0.0);
    s = 0.5 * (s + s.transpose());
    return build_model(Eigen::VectorXd::Constant(n, 1.0 / double(n)),
                       Eigen::VectorXd::Zero(n), s);
}

}  // namespace qve
