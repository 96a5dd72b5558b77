#include "qve/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace qve {

double hyperbolic_D(Complex zeta, Complex omega) {
    if (zeta.imag() <= 0.0 || omega.imag() <= 0.0)
        throw NonPositiveImaginaryPart("hyperbolic_D: arguments must lie in C+");
    return std::norm(zeta - omega) / (zeta.imag() * omega.imag());
}

VectorXc phi_map(const QveModel& model, Complex z, const VectorXc& u) {
    if (z.imag() <= 0.0)
        throw NonPositiveImaginaryPart("phi_map: Im z must be positive");
    VectorXc denom = (model.s * (u.cwiseProduct(model.weights.cast<Complex>())));
    denom += model.a.cast<Complex>();
    denom.array() += z;
    return -denom.cwiseInverse();
}

double qve_residual(const QveModel& model, Complex z, const VectorXc& m) {
    return (m - phi_map(model, z, m)).cwiseAbs().maxCoeff();
}

namespace {

// Jacobian of the defect m - Phi(m): I - diag(m^2) S_w.
Eigen::MatrixXcd qve_jacobian(const QveModel& model, const VectorXc& m) {
    Eigen::MatrixXcd jac =
        (-m.array().square()).matrix().asDiagonal() *
        model.weighted_kernel().cast<Complex>();
    jac.diagonal().array() += 1.0;
    return jac;
}

struct NewtonStep {
    VectorXc m;
    bool accepted = false;
};

NewtonStep try_newton(const QveModel& model, Complex z, const VectorXc& m,
                      double residual) {
    Eigen::MatrixXcd jac = qve_jacobian(model, m);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jac);
    VectorXc rhs = phi_map(model, z, m) - m;
    VectorXc delta = lu.solve(rhs);
    if (!delta.allFinite())
        throw SingularJacobian("newton: non-finite update (near-edge degeneracy)");
    const double lin_res = (jac * delta - rhs).cwiseAbs().maxCoeff();
    if (lin_res > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
        throw SingularJacobian("newton: jacobian solve inaccurate");
    // Full step, then halved steps while the update leaves C+ or the
    // residual fails to drop.
    for (int halving = 0; halving < 4; ++halving) {
        VectorXc next = m + delta;
        if ((next.imag().array() > 0.0).all() &&
            qve_residual(model, z, next) < residual)
            return {std::move(next), true};
        delta *= 0.5;
    }
    return {m, false};
}

SolutionSlice solve_at_direct(const QveModel& model, Complex z,
                              const SolveOptions& opts, VectorXc u) {
    const double newton_threshold = 0.3;
    double residual = qve_residual(model, z, u);
    int iter = 0;
    int newton_rejects = 0;
    double residual_checkpoint = residual;
    int since_checkpoint = 0;
    bool stalled = false;
    while (residual > opts.tol && iter < opts.max_iter) {
        bool stepped = false;
        // The contraction is the method of record; Newton only shortcuts it
        // once the plain iteration slows down.
        const bool want_newton =
            opts.use_newton && residual < newton_threshold &&
            newton_rejects < 8 && (stalled || residual < 1e-6);
        if (want_newton) {
            try {
                NewtonStep step = try_newton(model, z, u, residual);
                if (step.accepted) {
                    u = std::move(step.m);
                    stepped = true;
                } else {
                    ++newton_rejects;
                }
            } catch (const SingularJacobian&) {
                ++newton_rejects;
            }
        }
        if (!stepped) u = phi_map(model, z, u);
        residual = qve_residual(model, z, u);
        ++iter;
        if (++since_checkpoint >= 8) {
            const double rate =
                std::pow(residual / residual_checkpoint, 1.0 / since_checkpoint);
            stalled = rate > 0.55;
            residual_checkpoint = residual;
            since_checkpoint = 0;
        }
    }
    if (residual > opts.tol) {
        std::vector<Complex> last(u.data(), u.data() + u.size());
        throw MaxIterExceeded("solve_at: no convergence at z = (" +
                                  std::to_string(z.real()) + ", " +
                                  std::to_string(z.imag()) + "), residual " +
                                  std::to_string(residual),
                              std::move(last), residual);
    }
    return {z, std::move(u), residual, iter};
}

}  // namespace

VectorXc newton_polish(const QveModel& model, Complex z, const VectorXc& m0) {
    NewtonStep step = try_newton(model, z, m0, qve_residual(model, z, m0));
    return step.m;
}

SolutionSlice solve_at(const QveModel& model, Complex z, const SolveOptions& opts,
                       const std::optional<VectorXc>& warm_start) {
    if (z.imag() <= 0.0)
        throw NonPositiveImaginaryPart("solve_at: Im z must be positive");
    if (opts.tol <= 0.0) throw Error("solve_at: tol must be positive");
    const Complex kI(0.0, 1.0);
    const double eta = z.imag();
    if (warm_start) {
        // A warm start is a hint: across a support edge the solution jumps
        // and the plain iteration can stall, so cap the attempt and fall
        // back to a cold start instead of iterating the full budget.
        SolveOptions capped = opts;
        capped.max_iter = std::min(opts.max_iter, 500);
        try {
            return solve_at_direct(model, z, capped, *warm_start);
        } catch (const MaxIterExceeded&) {
        }
    }
    if (eta >= 1e-2)
        return solve_at_direct(model, z, opts,
                               VectorXc::Constant(model.n, kI));
    // Cold start close to the real axis: descend an internal eta ladder so
    // every solve starts near its solution.
    const double eta_top = 0.1;
    const int levels = std::max(2, int(std::ceil(1.5 * std::log10(eta_top / eta))));
    SolutionSlice slice = solve_at_direct(
        model, Complex(z.real(), eta_top), opts, VectorXc::Constant(model.n, kI));
    for (int k = 1; k <= levels; ++k) {
        const double eta_k =
            eta_top * std::pow(eta / eta_top, double(k) / double(levels));
        slice = solve_at_direct(model, Complex(z.real(), eta_k), opts,
                                std::move(slice.m));
    }
    slice.z = z;
    slice.residual = qve_residual(model, z, slice.m);
    return slice;
}

double contraction_ratio_probe(const QveModel& model, Complex z,
                               const VectorXc& u, const VectorXc& w) {
    double d_in = 0.0;
    for (Eigen::Index x = 0; x < model.n; ++x)
        d_in = std::max(d_in, hyperbolic_D(u[x], w[x]));
    if (d_in == 0.0)
        throw ZeroDistance("contraction_ratio_probe: u and w coincide");
    const VectorXc pu = phi_map(model, z, u);
    const VectorXc pw = phi_map(model, z, w);
    double d_out = 0.0;
    for (Eigen::Index x = 0; x < model.n; ++x)
        d_out = std::max(d_out, hyperbolic_D(pu[x], pw[x]));
    return d_out / d_in;
}

namespace {

void solve_column(const QveModel& model, double tau,
                  const std::vector<double>& etas, const SolveOptions& opts,
                  std::vector<SolutionSlice>& column) {
    column.clear();
    column.reserve(etas.size());
    for (std::size_t j = 0; j < etas.size(); ++j) {
        const Complex z(tau, etas[j]);
        if (j == 0) {
            column.push_back(solve_at(model, z, opts));
            continue;
        }
        // Derivative predictor from the slice above: (1 - m^2 S) dm = m^2.
        const SolutionSlice& above = column.back();
        VectorXc warm = above.m;
        Eigen::MatrixXcd jac = qve_jacobian(model, above.m);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jac);
        VectorXc dm = lu.solve(above.m.array().square().matrix());
        if (dm.allFinite()) {
            VectorXc predicted = above.m + dm * Complex(0.0, etas[j] - etas[j - 1]);
            if ((predicted.imag().array() > 0.0).all()) warm = std::move(predicted);
        }
        column.push_back(solve_at(model, z, opts, warm));
    }
}

}  // namespace

SolutionGrid solve_grid(const QveModel& model, const std::vector<double>& taus,
                        const std::vector<double>& etas, const SolveOptions& opts,
                        int workers) {
    for (std::size_t j = 0; j + 1 < etas.size(); ++j)
        if (etas[j] <= etas[j + 1])
            throw Error("solve_grid: etas must be strictly decreasing");
    if (!etas.empty() && etas.back() <= 0.0)
        throw Error("solve_grid: etas must be positive");

    SolutionGrid grid;
    grid.model = &model;
    grid.taus = taus;
    grid.etas = etas;
    grid.slices.resize(taus.size());

    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<int>(workers, std::max<std::size_t>(taus.size(), 1));

    if (workers == 1) {
        for (std::size_t i = 0; i < taus.size(); ++i)
            solve_column(model, taus[i], etas, opts, grid.slices[i]);
        return grid;
    }
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::mutex fail_mutex;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < taus.size();
                 i = next.fetch_add(1)) {
                try {
                    solve_column(model, taus[i], etas, opts, grid.slices[i]);
                } catch (...) {
                    std::scoped_lock lock(fail_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return grid;
}

void SolutionGrid::write_csv(const std::string& path) const {
    std::ofstream out(path);
    out << "tau,eta,x_index,re_m,im_m,residual\n";
    char buf[192];
    for (std::size_t i = 0; i < taus.size(); ++i) {
        for (std::size_t j = 0; j < etas.size(); ++j) {
            const SolutionSlice& slice = slices[i][j];
            for (Eigen::Index x = 0; x < slice.m.size(); ++x) {
                std::snprintf(buf, sizeof(buf),
                              "%.17g,%.17g,%ld,%.17g,%.17g,%.17g\n", taus[i],
                              etas[j], long(x), slice.m[x].real(),
                              slice.m[x].imag(), slice.residual);
                out << buf;
            }
        }
    }
}

}  // namespace qve
