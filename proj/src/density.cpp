#include "qve/density.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace qve {

Eigen::VectorXd DensityProfile::quadrature_weights() const {
    const std::size_t t = taus.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(t);
    for (std::size_t i = 0; i + 1 < t; ++i) {
        const double h = 0.5 * (taus[i + 1] - taus[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

DensityProfile extract_density(const SolutionGrid& grid, Extrapolation mode) {
    if (grid.etas.size() < 2)
        throw InsufficientEtaLevels("extract_density: need at least 2 eta levels");
    const std::size_t t = grid.taus.size();
    const std::size_t j2 = grid.etas.size() - 1;  // smallest eta
    const std::size_t j1 = j2 - 1;
    const double eta1 = grid.etas[j1], eta2 = grid.etas[j2];

    DensityProfile profile;
    profile.model = grid.model;
    profile.taus = grid.taus;
    profile.eta_floor = eta2;
    const Eigen::Index n = grid.model ? grid.model->n
                                      : (t ? grid.slices[0][j2].m.size() : 0);
    profile.v.resize(n, t);
    profile.error_estimate.resize(t);

    for (std::size_t i = 0; i < t; ++i) {
        const Eigen::VectorXd y1 = grid.slices[i][j1].m.imag();
        const Eigen::VectorXd y2 = grid.slices[i][j2].m.imag();
        Eigen::VectorXd v;
        if (mode == Extrapolation::Last) {
            v = y2 / M_PI;
        } else {
            // Linear-in-eta model through the two smallest levels.
            v = ((eta1 * y2 - eta2 * y1) / (eta1 - eta2)) / M_PI;
        }
        profile.error_estimate[i] = (y1 - y2).cwiseAbs().maxCoeff() / M_PI;
        if ((v.array() < 0.0).any()) {
            profile.clamped = true;
            v = v.cwiseMax(0.0);
        }
        profile.v.col(i) = v;
    }
    profile.avg = profile.v.transpose() * grid.model->weights;
    return profile;
}

namespace {

double avg_density_at(const QveModel& model, double tau, double eta,
                      std::optional<VectorXc>& warm) {
    SolutionSlice slice = solve_at(model, Complex(tau, eta), {}, warm);
    warm = slice.m;
    return model.avg(slice.m.imag()) / M_PI;
}

double bisect_endpoint(const QveModel& model, double lo, double hi,
                       double threshold, double eta) {
    // lo below threshold, hi above (or vice versa); 40 halvings or width 1e-9.
    // Consecutive probes are within one grid spacing, so each solve warm
    // starts from the previous one.
    std::optional<VectorXc> warm;
    double f_lo = avg_density_at(model, lo, eta, warm) - threshold;
    for (int it = 0; it < 40 && std::abs(hi - lo) > 1e-9; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = avg_density_at(model, mid, eta, warm) - threshold;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Interval> detect_support(DensityProfile& profile, double threshold) {
    if (threshold <= 0.0)
        threshold = 10.0 * profile.error_estimate.maxCoeff();
    const std::size_t t = profile.taus.size();
    std::vector<bool> above(t);
    for (std::size_t i = 0; i < t; ++i) above[i] = profile.avg[i] > threshold;
    // Merge single-point dropouts.
    for (std::size_t i = 1; i + 1 < t; ++i)
        if (!above[i] && above[i - 1] && above[i + 1]) above[i] = true;

    std::vector<Interval> intervals;
    std::size_t i = 0;
    while (i < t) {
        if (!above[i]) { ++i; continue; }
        std::size_t j = i;
        while (j + 1 < t && above[j + 1]) ++j;
        Interval iv{profile.taus[i], profile.taus[j]};
        if (profile.model) {
            if (i > 0)
                iv.left = bisect_endpoint(*profile.model, profile.taus[i - 1],
                                          profile.taus[i], threshold,
                                          profile.eta_floor);
            if (j + 1 < t)
                iv.right = bisect_endpoint(*profile.model, profile.taus[j + 1],
                                           profile.taus[j], threshold,
                                           profile.eta_floor);
        }
        intervals.push_back(iv);
        i = j + 1;
    }
    profile.support = intervals;
    return intervals;
}

VectorXc stieltjes_reconstruct(const DensityProfile& profile, Complex z) {
    if (z.imag() <= 0.0)
        throw NonPositiveImaginaryPart("stieltjes_reconstruct: Im z must be positive");
    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < profile.taus.size(); ++i)
        min_spacing = std::min(min_spacing, profile.taus[i + 1] - profile.taus[i]);
    double dist = std::numeric_limits<double>::infinity();
    for (double tau : profile.taus) dist = std::min(dist, std::abs(Complex(tau, 0) - z));
    if (dist < min_spacing)
        throw TooCloseToGrid("stieltjes_reconstruct: z within one grid spacing");

    const Eigen::VectorXd qw = profile.quadrature_weights();
    VectorXc out = VectorXc::Zero(profile.v.rows());
    for (std::size_t i = 0; i < profile.taus.size(); ++i)
        out += (qw[i] / (profile.taus[i] - z)) * profile.v.col(i).cast<Complex>();
    return out;
}

Moments moments(const DensityProfile& profile) {
    const Eigen::VectorXd qw = profile.quadrature_weights();
    const Eigen::Index n = profile.v.rows();
    Moments mom{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                Eigen::VectorXd::Zero(n)};
    for (std::size_t i = 0; i < profile.taus.size(); ++i) {
        const double tau = profile.taus[i];
        mom.mu0 += qw[i] * profile.v.col(i);
        mom.mu1 += qw[i] * tau * profile.v.col(i);
        mom.mu2 += qw[i] * tau * tau * profile.v.col(i);
    }
    return mom;
}

BoundsReport diagnostics_bounds(const SolutionGrid& grid) {
    BoundsReport report;
    report.min_abs_m = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (const auto& column : grid.slices) {
        for (const auto& slice : column) {
            const Eigen::VectorXd abs_m = slice.m.cwiseAbs();
            report.min_abs_m = std::min(report.min_abs_m, abs_m.minCoeff());
            report.max_abs_m = std::max(report.max_abs_m, abs_m.maxCoeff());
            const Eigen::VectorXd im = slice.m.imag();
            max_ratio = std::max(max_ratio, im.maxCoeff() / im.minCoeff());
        }
    }
    report.comparability_ratio = max_ratio;
    const double kappa = grid.model ? grid.model->kappa : 1.0;
    report.assumption_flag =
        report.max_abs_m > 100.0 * std::max(1.0, kappa) || max_ratio > 1e6;
    return report;
}

double holder_diagnostic(const DensityProfile& profile) {
    const std::size_t t = profile.taus.size();
    double seminorm = 0.0;
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = i + 1; j < t; ++j) {
            const double diff =
                (profile.v.col(i) - profile.v.col(j)).cwiseAbs().maxCoeff();
            const double dt = std::abs(profile.taus[i] - profile.taus[j]);
            seminorm = std::max(seminorm, diff / std::cbrt(dt));
        }
    return seminorm;
}

void DensityProfile::write_csv(const std::string& path) const {
    std::ofstream out(path);
    out << "tau";
    for (Eigen::Index x = 0; x < v.rows(); ++x) out << ",v_" << (x + 1);
    out << ",rho_avg,error_estimate\n";
    char buf[64];
    for (std::size_t i = 0; i < taus.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", taus[i]);
        out << buf;
        for (Eigen::Index x = 0; x < v.rows(); ++x) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v(x, i));
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", avg[i],
                      error_estimate[i]);
        out << buf;
    }
}

void write_support_json(const std::vector<Interval>& support,
                        const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const Interval& iv : support)
        j.push_back({{"left", iv.left}, {"right", iv.right}});
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace qve
