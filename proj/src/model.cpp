#include "qve/model.hpp"

#include <cmath>

namespace qve {

Eigen::VectorXd grid_positions(Eigen::Index n) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = (i + 0.5) / double(n);
    return x;
}

QveModel build_model(const Eigen::VectorXd& weights, const Eigen::VectorXd& a,
                     const Eigen::MatrixXd& s) {
    const Eigen::Index n = weights.size();
    if (n < 1 || a.size() != n || s.rows() != n || s.cols() != n)
        throw DimensionMismatch("build_model: inconsistent dimensions");
    if ((weights.array() <= 0.0).any())
        throw NegativeEntry("build_model: weights must be strictly positive");
    if ((s.array() < 0.0).any())
        throw NegativeEntry("build_model: kernel entries must be nonnegative");
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
        throw AsymmetricKernel("build_model: |s - s^T| = " + std::to_string(asym));

    QveModel model;
    model.n = n;
    model.weights = weights / weights.sum();
    model.a = a;
    model.s = 0.5 * (s + s.transpose());  // exact symmetry
    model.op_norm = (model.s * model.weights).maxCoeff();
    model.kappa = a.cwiseAbs().maxCoeff() + 2.0 * std::sqrt(model.op_norm);
    return model;
}

std::optional<int> check_primitivity(const QveModel& model, int k_max) {
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(model.n, model.n);
    const Eigen::MatrixXd sw = model.weighted_kernel();
    for (int k = 1; k <= k_max; ++k) {
        power = power * sw;
        if ((power.array() > 0.0).all()) return k;
        if (power.isZero(0.0)) return std::nullopt;
    }
    return std::nullopt;
}

std::optional<std::pair<double, double>> check_diagonal_positivity(
    const QveModel& model, double strip_eps) {
    const Eigen::VectorXd x = grid_positions(model.n);
    double c = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < model.n; ++i)
        for (Eigen::Index j = 0; j < model.n; ++j)
            if (std::abs(x[i] - x[j]) <= strip_eps) c = std::min(c, model.s(i, j));
    if (!std::isfinite(c) || c <= 0.0) return std::nullopt;
    return std::make_pair(c, strip_eps);
}

double regularity_probe(const QveModel& model, double eps) {
    double min_integral = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < model.n; ++i) {
        double integral = 0.0;
        for (Eigen::Index j = 0; j < model.n; ++j) {
            const double da = model.a[i] - model.a[j];
            const Eigen::VectorXd ds = model.s.row(i) - model.s.row(j);
            const double row_gap = ds.array().square().matrix().dot(model.weights);
            integral += model.weights[j] / (eps + da * da + row_gap);
        }
        min_integral = std::min(min_integral, integral);
    }
    return min_integral;
}

AssumptionReport check_assumptions(const QveModel& model, int k_max,
                                   double strip_eps, double regularity_eps) {
    AssumptionReport report;
    report.primitivity_k = check_primitivity(model, k_max);
    report.diagonal_strip = check_diagonal_positivity(model, strip_eps);
    report.regularity_value = regularity_probe(model, regularity_eps);
    return report;
}

}  // namespace qve
