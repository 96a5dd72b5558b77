#pragma once

#include <string>

#include "qve/solver.hpp"

namespace qve {

// Operator F(z) w = |m| S(|m| w) at a solved point, kept in the symmetrized
// L^2(pi) coordinates K = diag(sqrt(w)|m|) s diag(|m| sqrt(w)) that share
// its spectrum.
struct StabilityOperator {
    Eigen::MatrixXd K;
    Eigen::VectorXd sqrt_w;

    // Raw integral kernel |m_x| s_xy |m_y|.
    Eigen::MatrixXd kernel() const {
        return sqrt_w.cwiseInverse().asDiagonal() * K *
               sqrt_w.cwiseInverse().asDiagonal();
    }
    // Function-coordinate vector from a symmetrized-coordinate one.
    Eigen::VectorXd to_function(const Eigen::VectorXd& phi) const {
        return phi.cwiseQuotient(sqrt_w);
    }
    // Apply F to a function-coordinate vector.
    Eigen::VectorXd apply(const Eigen::VectorXd& w_fn) const {
        return to_function(K * w_fn.cwiseProduct(sqrt_w));
    }
};

struct SpectralData {
    Complex z;
    double radius = 0.0;      // ||F||_2, largest |eigenvalue|
    Eigen::VectorXd f;        // Perron eigenfunction, <f^2> = 1, f >= 0
    double gap = 0.0;         // difference of the two largest eigenvalues of |F|
    bool degenerate_top = false;  // gap below 1e-12
};

StabilityOperator build_F(const QveModel& model, const VectorXc& m);

SpectralData perron(const StabilityOperator& op);

// |radius - (1 - <f|m|> Im z / <f |m|^-1 Im m>)|
double check_radius_relation(const QveModel& model, Complex z, const VectorXc& m,
                             const SpectralData& spectral);

// (||f||_2/||f||_inf)^2 * min kernel entry; lower bound on the gap.
double gap_lower_bound(const StabilityOperator& op, const Eigen::VectorXd& f);

// Deflated solve of (1 - F) w = rhs on the orthogonal complement of f.
Eigen::VectorXd resolvent_Q(const StabilityOperator& op, const Eigen::VectorXd& f,
                            const Eigen::VectorXd& rhs);

// ||(1 - diag(m^2) S_w)^-1||_inf, the max-row-sum norm of the dense inverse.
double bulk_stability_norm(const QveModel& model, Complex z, const VectorXc& m);

// ||(U - F)^-1||_2 * gap * |1 - radius <f, U f>| for a unimodular diagonal U.
double inverse_bound_probe(const VectorXc& u_diag, const StabilityOperator& op,
                           const SpectralData& spectral);

void write_spectral_json(const SpectralData& data, const std::string& path);

}  // namespace qve
