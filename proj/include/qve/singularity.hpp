#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qve/density.hpp"
#include "qve/stability.hpp"

namespace qve {

enum class SingularityKind { LeftEdge, RightEdge, Cusp };

std::string to_string(SingularityKind kind);

// Analysis of one boundary point of the support.
struct SingularityReport {
    double tau0 = 0.0;
    SingularityKind kind = SingularityKind::LeftEdge;
    double sigma = 0.0;
    double psi = 0.0;
    double fitted_exponent = 0.0;
    Eigen::VectorXd fitted_amplitude;
    Eigen::VectorXd predicted_amplitude;
    double stability = 0.0;  // psi + sigma^2
};

// Cubic-equation coefficients at a boundary point: sigma = <f^3 sign m> and
// psi = D(f^2 sign m) with the deflated resolvent quadratic form.
std::pair<double, double> sigma_psi(const QveModel& model, double tau0,
                                    const VectorXc& m_real,
                                    const StabilityOperator& op,
                                    const SpectralData& spectral);

SingularityKind classify(double sigma, double psi, double cusp_tol = 0.05);

Eigen::VectorXd predicted_amplitude(SingularityKind kind, const QveModel& model,
                                    const VectorXc& m_real,
                                    const SpectralData& spectral, double sigma,
                                    double psi);

enum class FitSide { Minus, Plus, Both };

struct ExponentFit {
    double exponent = 0.0;
    Eigen::VectorXd amplitude;  // per component, intercept at the fitted exponent
};

// Log-log least squares of the average density against the offset from tau0
// over [omega_min, omega_max] on the requested side(s).
ExponentFit fit_exponent(const DensityProfile& profile, double tau0,
                         FitSide side, double omega_min, double omega_max);

enum class ConnectivityMode { Exact, Prefix };

struct ConnectivityResult {
    bool connected = false;
    double witness = 0.0;  // max over subsets of the min row-distance across the cut
};

ConnectivityResult connectivity_test(const QveModel& model, ConnectivityMode mode,
                                     double tol = 1e-2);

void write_singularity_json(const std::vector<SingularityReport>& reports,
                            const std::string& path);

}  // namespace qve
