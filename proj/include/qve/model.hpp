#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "qve/errors.hpp"

namespace qve {

// Discretized instance of the equation -1/m = z + a + Sm: a probability
// measure pi on n grid points, a real field a and a symmetric nonnegative
// kernel s. Immutable after construction; safe to share across threads.
struct QveModel {
    Eigen::Index n = 0;
    Eigen::VectorXd weights;  // pi, strictly positive, sums to 1
    Eigen::VectorXd a;
    Eigen::MatrixXd s;        // s(x,y) = s(y,x) >= 0
    double op_norm = 0.0;     // ||S|| = max_x sum_y s(x,y) w(y)
    double kappa = 0.0;       // ||a||_inf + 2 sqrt(||S||)

    // Measure-weighted kernel matrix acting on functions: (Sv)_x = sum_y s(x,y) w(y) v_y.
    Eigen::MatrixXd weighted_kernel() const {
        return s * weights.asDiagonal();
    }
    double avg(const Eigen::VectorXd& v) const { return weights.dot(v); }
};

struct AssumptionReport {
    std::optional<int> primitivity_k;                   // smallest K with s^(K) > 0
    std::optional<std::pair<double, double>> diagonal_strip;  // (c, eps)
    double regularity_value = 0.0;                      // (C)-integral at probe eps
};

QveModel build_model(const Eigen::VectorXd& weights, const Eigen::VectorXd& a,
                     const Eigen::MatrixXd& s);

// Smallest K <= k_max such that the measure-weighted K-th kernel power is
// entrywise positive, or nullopt.
std::optional<int> check_primitivity(const QveModel& model, int k_max);

// Strip certificate for diagonal positivity: c = min s(x,y) over
// |x - y| <= strip_eps in grid positions, reported when c > 0.
std::optional<std::pair<double, double>> check_diagonal_positivity(
    const QveModel& model, double strip_eps);

// min_x sum_y w_y / (eps + (a_x - a_y)^2 + <(S_x - S_y)^2>); diagnostic for
// the no-outlier-components condition (always finite on a finite grid).
double regularity_probe(const QveModel& model, double eps);

AssumptionReport check_assumptions(const QveModel& model, int k_max = 64,
                                   double strip_eps = 0.1,
                                   double regularity_eps = 1e-4);

// Midpoint positions of the uniform grid on [0,1].
Eigen::VectorXd grid_positions(Eigen::Index n);

}  // namespace qve
