#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qve/density.hpp"

namespace qve {

struct SpectrumSample {
    int n_mat = 0;
    std::uint64_t seed = 0;
    std::vector<double> eigenvalues;  // sorted ascending
};

// Real symmetric Gaussian matrix with variance profile s(x,y)/n_mat sampled
// by nearest-neighbor upsampling of the model kernel (diagonal variance
// doubled), plus diag(a). Deterministic in (model, n_mat, seed).
Eigen::MatrixXd sample_matrix(const QveModel& model, int n_mat,
                              std::uint64_t seed);

SpectrumSample sample_spectrum(const QveModel& model, int n_mat,
                               std::uint64_t seed);

struct EmpiricalDistance {
    double ks = 0.0;
    double l1 = 0.0;
};

// Pooled empirical CDF of the samples against the CDF of the profile's
// average density.
EmpiricalDistance empirical_distance(const std::vector<SpectrumSample>& samples,
                                     const DensityProfile& profile);

void write_eigenvalue_csv(const std::vector<SpectrumSample>& samples,
                          const std::string& path);

}  // namespace qve
