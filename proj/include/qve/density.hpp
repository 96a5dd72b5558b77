#pragma once

#include <string>
#include <vector>

#include "qve/solver.hpp"

namespace qve {

struct Interval {
    double left = 0.0;
    double right = 0.0;
};

enum class Extrapolation { Last, Richardson };

// Per-component generating density v_x(tau) on a real grid, obtained by
// extrapolating Im m/pi to the real axis.
struct DensityProfile {
    const QveModel* model = nullptr;
    std::vector<double> taus;
    Eigen::MatrixXd v;              // n x |taus|, v >= 0
    Eigen::VectorXd avg;            // rho = <v>, per tau
    std::vector<Interval> support;
    double eta_floor = 0.0;
    Eigen::VectorXd error_estimate;  // per tau
    bool clamped = false;            // negative extrapolations were zeroed

    // Trapezoid weights of the tau grid (handles non-uniform grids).
    Eigen::VectorXd quadrature_weights() const;
    void write_csv(const std::string& path) const;
};

struct BoundsReport {
    double min_abs_m = 0.0;
    double max_abs_m = 0.0;
    double comparability_ratio = 0.0;  // max over z of max_xy Im m_x / Im m_y
    bool assumption_flag = false;      // |m| or the ratio left the trusted range
};

DensityProfile extract_density(const SolutionGrid& grid,
                               Extrapolation mode = Extrapolation::Richardson);

// Maximal runs of grid points with avg density above the threshold, merged
// across single-point dropouts; endpoints refined by bisection on fresh
// solves at eta_floor. threshold <= 0 selects 10x the max error estimate.
std::vector<Interval> detect_support(DensityProfile& profile,
                                     double threshold = 0.0);

VectorXc stieltjes_reconstruct(const DensityProfile& profile, Complex z);

struct Moments {
    Eigen::VectorXd mu0, mu1, mu2;  // per component
};
Moments moments(const DensityProfile& profile);

BoundsReport diagnostics_bounds(const SolutionGrid& grid);

// Finite-sample 1/3-Holder seminorm max_{t1 != t2} ||v(t1)-v(t2)||_inf / |t1-t2|^(1/3).
double holder_diagnostic(const DensityProfile& profile);

void write_support_json(const std::vector<Interval>& support,
                        const std::string& path);

}  // namespace qve
