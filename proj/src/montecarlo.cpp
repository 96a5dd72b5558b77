#include "qve/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace qve {

Eigen::MatrixXd sample_matrix(const QveModel& model, int n_mat,
                              std::uint64_t seed) {
    if (n_mat < model.n)
        throw Error("sample_matrix: n_mat must be at least the profile size");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Nearest-neighbor index map i -> ceil((i+1) n / n_mat) - 1.
    std::vector<Eigen::Index> idx(n_mat);
    for (int i = 0; i < n_mat; ++i)
        idx[i] = Eigen::Index((std::uint64_t(i + 1) * model.n + n_mat - 1) / n_mat) - 1;

    Eigen::MatrixXd h(n_mat, n_mat);
    for (int i = 0; i < n_mat; ++i) {
        for (int j = i; j < n_mat; ++j) {
            double var = model.s(idx[i], idx[j]) / double(n_mat);
            if (i == j) var *= 2.0;  // real symmetric class
            const double value = std::sqrt(var) * gauss(rng);
            h(i, j) = value;
            h(j, i) = value;
        }
        h(i, i) += model.a[idx[i]];
    }
    return h;
}

SpectrumSample sample_spectrum(const QveModel& model, int n_mat,
                               std::uint64_t seed) {
    const Eigen::MatrixXd h = sample_matrix(model, n_mat, seed);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    SpectrumSample sample;
    sample.n_mat = n_mat;
    sample.seed = seed;
    const Eigen::VectorXd& ev = eig.eigenvalues();
    sample.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(sample.eigenvalues.begin(), sample.eigenvalues.end());
    return sample;
}

EmpiricalDistance empirical_distance(const std::vector<SpectrumSample>& samples,
                                     const DensityProfile& profile) {
    if (samples.empty()) throw EmptySamples("empirical_distance: no samples");
    std::vector<double> pooled;
    for (const SpectrumSample& s : samples)
        pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
    std::sort(pooled.begin(), pooled.end());
    const double inv_total = 1.0 / double(pooled.size());

    // CDF of the average density by cumulative trapezoid, normalized to 1.
    const std::size_t t = profile.taus.size();
    std::vector<double> cdf(t, 0.0);
    for (std::size_t i = 1; i < t; ++i)
        cdf[i] = cdf[i - 1] + 0.5 * (profile.avg[i] + profile.avg[i - 1]) *
                                  (profile.taus[i] - profile.taus[i - 1]);
    const double mass = cdf.back();
    for (double& c : cdf) c /= mass;

    auto rho_cdf = [&](double x) {
        if (x <= profile.taus.front()) return 0.0;
        if (x >= profile.taus.back()) return 1.0;
        const auto it =
            std::upper_bound(profile.taus.begin(), profile.taus.end(), x);
        const std::size_t i = std::size_t(it - profile.taus.begin());
        const double frac =
            (x - profile.taus[i - 1]) / (profile.taus[i] - profile.taus[i - 1]);
        return cdf[i - 1] + frac * (cdf[i] - cdf[i - 1]);
    };

    EmpiricalDistance dist;
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        const double f = rho_cdf(pooled[k]);
        dist.ks = std::max(dist.ks, std::abs(f - double(k) * inv_total));
        dist.ks = std::max(dist.ks, std::abs(double(k + 1) * inv_total - f));
    }
    // L1 distance of the CDFs over the profile grid.
    auto emp_cdf = [&](double x) {
        return double(std::upper_bound(pooled.begin(), pooled.end(), x) -
                      pooled.begin()) *
               inv_total;
    };
    for (std::size_t i = 1; i < t; ++i) {
        const double mid = 0.5 * (profile.taus[i] + profile.taus[i - 1]);
        dist.l1 += std::abs(emp_cdf(mid) - rho_cdf(mid)) *
                   (profile.taus[i] - profile.taus[i - 1]);
    }
    return dist;
}

void write_eigenvalue_csv(const std::vector<SpectrumSample>& samples,
                          const std::string& path) {
    std::ofstream out(path);
    out << "seed,eigenvalue\n";
    char buf[64];
    for (const SpectrumSample& s : samples)
        for (double ev : s.eigenvalues) {
            std::snprintf(buf, sizeof(buf), "%llu,%.17g\n",
                          (unsigned long long)s.seed, ev);
            out << buf;
        }
}

}  // namespace qve
