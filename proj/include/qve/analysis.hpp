#pragma once

#include "qve/density.hpp"
#include "qve/singularity.hpp"

namespace qve {

// Knobs for the density -> support -> singularity pipeline.
struct AnalysisOptions {
    int tau_count = 201;
    double tau_pad = 0.25;           // grid covers [-kappa-pad, kappa+pad]
    std::vector<double> eta_ladder;  // default: geometric 1e-1..1e-6, ratio 10^-1/2
    double eta_real = 1e-6;          // real-axis stand-in for boundary data
    double cusp_tol = 0.05;
    double fit_omega_min = 1e-4;
    double fit_omega_max = 1e-2;     // shrunk to a quarter of the local gap
    int fit_points_per_side = 12;
    double support_threshold = 0.0;  // <= 0: 10x max extrapolation error
    // An interior dip counts as vanishing when Im<m> at eta_real is below
    // this fraction of its value at 100*eta_real (a positive local minimum
    // keeps the ratio near 1, a zero of the density scales it down).
    double dip_vanish_ratio = 0.5;
    SolveOptions solve;
    int workers = 1;
};

std::vector<double> default_eta_ladder();

std::vector<double> linspace(double lo, double hi, int count);

struct SupportAnalysis {
    DensityProfile profile;
    std::vector<Interval> support;
    std::vector<SingularityReport> reports;
};

// Density profile of a model on a uniform tau grid with the given ladder.
DensityProfile compute_density(const QveModel& model, const AnalysisOptions& opts);

// Density at single points by fresh solves down a small eta ladder ending at
// eta_floor, Richardson-extrapolated; rows are components.
Eigen::MatrixXd density_at(const QveModel& model, const std::vector<double>& taus,
                           double eta_floor, const SolveOptions& solve);

// Full pipeline: solve, extract, detect support, locate and classify every
// boundary point, fit exponents and amplitudes.
SupportAnalysis classify_support(const QveModel& model,
                                 const AnalysisOptions& opts = {});

}  // namespace qve
