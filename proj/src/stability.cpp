#include "qve/stability.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace qve {

StabilityOperator build_F(const QveModel& model, const VectorXc& m) {
    const Eigen::VectorXd abs_m = m.cwiseAbs();
    if (abs_m.minCoeff() == 0.0)
        throw ZeroComponent("build_F: |m_x| vanishes");
    StabilityOperator op;
    op.sqrt_w = model.weights.cwiseSqrt();
    const Eigen::VectorXd scale = op.sqrt_w.cwiseProduct(abs_m);
    op.K = scale.asDiagonal() * model.s * scale.asDiagonal();
    return op;
}

SpectralData perron(const StabilityOperator& op) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.K);
    if (eig.info() != Eigen::Success)
        throw SingularMatrix("perron: eigendecomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
    const Eigen::Index n = lambda.size();

    Eigen::VectorXd abs_lambda = lambda.cwiseAbs();
    std::sort(abs_lambda.data(), abs_lambda.data() + n, std::greater<double>());

    SpectralData data;
    data.radius = abs_lambda[0];
    data.gap = n > 1 ? abs_lambda[0] - abs_lambda[1] : abs_lambda[0];
    data.degenerate_top = n > 1 && data.gap < 1e-12;
    if (data.degenerate_top) data.gap = std::max(data.gap, 0.0);

    // Top of the spectrum; for nonnegative kernels this attains the radius.
    Eigen::VectorXd phi = eig.eigenvectors().col(n - 1);
    if (phi.sum() < 0.0) phi = -phi;
    data.f = op.to_function(phi);
    return data;
}

double check_radius_relation(const QveModel& model, Complex z, const VectorXc& m,
                             const SpectralData& spectral) {
    const Eigen::VectorXd abs_m = m.cwiseAbs();
    const Eigen::VectorXd im_m = m.imag();
    const double num = model.avg(spectral.f.cwiseProduct(abs_m)) * z.imag();
    const double den =
        model.avg(spectral.f.cwiseProduct(im_m.cwiseQuotient(abs_m)));
    return std::abs(spectral.radius - (1.0 - num / den));
}

double gap_lower_bound(const StabilityOperator& op, const Eigen::VectorXd& f) {
    const double norm2 = op.sqrt_w.cwiseProduct(f).norm();
    const double norm_inf = f.cwiseAbs().maxCoeff();
    const double ratio = norm2 / norm_inf;
    return ratio * ratio * op.kernel().minCoeff();
}

Eigen::VectorXd resolvent_Q(const StabilityOperator& op, const Eigen::VectorXd& f,
                            const Eigen::VectorXd& rhs) {
    Eigen::VectorXd phi = op.sqrt_w.cwiseProduct(f);
    phi /= phi.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.K);
    const Eigen::Index n = op.K.rows();
    Eigen::VectorXd abs_lambda = eig.eigenvalues().cwiseAbs();
    std::sort(abs_lambda.data(), abs_lambda.data() + n, std::greater<double>());
    const double gap = n > 1 ? abs_lambda[0] - abs_lambda[1] : abs_lambda[0];
    if (n > 1 && gap < 1e-8)
        throw GapTooSmall("resolvent_Q: spectral gap " + std::to_string(gap));

    Eigen::VectorXd r = op.sqrt_w.cwiseProduct(rhs);
    r -= phi.dot(r) * phi;
    // Rank-one shift keeps the system regular when the radius equals 1.
    Eigen::MatrixXd shifted = -op.K + phi * phi.transpose();
    shifted.diagonal().array() += 1.0;
    Eigen::VectorXd y = Eigen::PartialPivLU<Eigen::MatrixXd>(shifted).solve(r);
    y -= phi.dot(y) * phi;
    return op.to_function(y);
}

double bulk_stability_norm(const QveModel& model, Complex z, const VectorXc& m) {
    Eigen::MatrixXcd jac =
        (-m.array().square()).matrix().asDiagonal() *
        model.weighted_kernel().cast<Complex>();
    jac.diagonal().array() += 1.0;
    Eigen::MatrixXcd inv =
        Eigen::PartialPivLU<Eigen::MatrixXcd>(jac).inverse();
    if (!inv.allFinite())
        throw SingularMatrix("bulk_stability_norm: 1 - m^2 S singular");
    return inv.cwiseAbs().rowwise().sum().maxCoeff();
}

double inverse_bound_probe(const VectorXc& u_diag, const StabilityOperator& op,
                           const SpectralData& spectral) {
    if (((u_diag.cwiseAbs().array() - 1.0).abs() > 1e-10).any())
        throw Error("inverse_bound_probe: U must be unimodular");
    Eigen::MatrixXcd a = (-op.K).cast<Complex>();
    a += Eigen::MatrixXcd(u_diag.asDiagonal());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const double sigma_min = svd.singularValues().minCoeff();
    if (sigma_min == 0.0)
        throw SingularMatrix("inverse_bound_probe: U - F singular");
    const Eigen::VectorXd w = op.sqrt_w.cwiseProduct(op.sqrt_w);
    const Complex f_U_f =
        (w.cast<Complex>().cwiseProduct(spectral.f.cast<Complex>()))
            .dot(u_diag.cwiseProduct(spectral.f.cast<Complex>()));
    return (1.0 / sigma_min) * spectral.gap *
           std::abs(1.0 - spectral.radius * f_U_f);
}

void write_spectral_json(const SpectralData& data, const std::string& path) {
    nlohmann::json j;
    j["z"] = {data.z.real(), data.z.imag()};
    j["radius"] = data.radius;
    j["gap"] = data.gap;
    j["f"] = std::vector<double>(data.f.data(), data.f.data() + data.f.size());
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace qve
