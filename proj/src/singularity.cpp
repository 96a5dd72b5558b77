#include "qve/singularity.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace qve {

std::string to_string(SingularityKind kind) {
    switch (kind) {
        case SingularityKind::LeftEdge: return "left_edge";
        case SingularityKind::RightEdge: return "right_edge";
        case SingularityKind::Cusp: return "cusp";
    }
    return "?";
}

std::pair<double, double> sigma_psi(const QveModel& model, double /*tau0*/,
                                    const VectorXc& m_real,
                                    const StabilityOperator& op,
                                    const SpectralData& spectral) {
    const Eigen::Index n = model.n;
    Eigen::VectorXd sign_m(n);
    for (Eigen::Index x = 0; x < n; ++x) {
        const double re = m_real[x].real();
        if (std::abs(re) < 1e-6)
            throw AmbiguousSign("sigma_psi: |Re m| < 1e-6 at component " +
                                std::to_string(x));
        sign_m[x] = re > 0.0 ? 1.0 : -1.0;
    }
    const Eigen::VectorXd f = spectral.f;
    const double sigma =
        model.avg(f.array().cube().matrix().cwiseProduct(sign_m));

    Eigen::VectorXd w = f.array().square().matrix().cwiseProduct(sign_m);
    Eigen::VectorXd qw = w - model.avg(f.cwiseProduct(w)) * f;
    Eigen::VectorXd y = resolvent_Q(op, f, qw);
    const double psi = model.avg(qw.cwiseProduct(y + op.apply(y)));
    return {sigma, psi};
}

SingularityKind classify(double sigma, double /*psi*/, double cusp_tol) {
    if (std::abs(sigma) <= cusp_tol) return SingularityKind::Cusp;
    // The density grows in the direction sign(sigma) from tau0.
    return sigma > 0.0 ? SingularityKind::LeftEdge : SingularityKind::RightEdge;
}

Eigen::VectorXd predicted_amplitude(SingularityKind kind, const QveModel& model,
                                    const VectorXc& m_real,
                                    const SpectralData& spectral, double sigma,
                                    double psi) {
    const Eigen::VectorXd abs_m = m_real.cwiseAbs();
    const double avg_mf = model.avg(abs_m.cwiseProduct(spectral.f));
    Eigen::VectorXd shape = abs_m.cwiseProduct(spectral.f);
    if (kind == SingularityKind::Cusp) {
        if (psi < 1e-12)
            throw DivisionDegenerate("predicted_amplitude: psi below 1e-12");
        return (std::sqrt(3.0) / (2.0 * M_PI)) * std::cbrt(avg_mf / psi) * shape;
    }
    if (std::abs(sigma) < 1e-12)
        throw DivisionDegenerate("predicted_amplitude: |sigma| below 1e-12");
    return (1.0 / M_PI) * std::sqrt(avg_mf / std::abs(sigma)) * shape;
}

ExponentFit fit_exponent(const DensityProfile& profile, double tau0,
                         FitSide side, double omega_min, double omega_max) {
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < profile.taus.size(); ++i) {
        const double omega = profile.taus[i] - tau0;
        if (std::abs(omega) < omega_min || std::abs(omega) > omega_max) continue;
        if (side == FitSide::Minus && omega >= 0.0) continue;
        if (side == FitSide::Plus && omega <= 0.0) continue;
        picked.push_back(i);
    }
    if (picked.size() < 3)
        throw EmptyWindow("fit_exponent: fewer than 3 grid points in window");

    std::vector<double> lx, ly;
    for (std::size_t i : picked) {
        if (profile.avg[i] <= 0.0)
            throw NonPositiveDensity("fit_exponent: nonpositive density at tau=" +
                                     std::to_string(profile.taus[i]));
        lx.push_back(std::log(std::abs(profile.taus[i] - tau0)));
        ly.push_back(std::log(profile.avg[i]));
    }
    const std::size_t k = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    ExponentFit fit;
    fit.exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);

    // Per-component amplitudes: intercepts at the fitted exponent.
    const Eigen::Index n = profile.v.rows();
    fit.amplitude = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (std::size_t i : picked) {
        const double lo = std::log(std::abs(profile.taus[i] - tau0));
        for (Eigen::Index x = 0; x < n; ++x) {
            if (profile.v(x, i) <= 0.0) continue;
            fit.amplitude[x] += std::log(profile.v(x, i)) - fit.exponent * lo;
            counts[x] += 1.0;
        }
    }
    for (Eigen::Index x = 0; x < n; ++x)
        fit.amplitude[x] =
            counts[x] > 0.0 ? std::exp(fit.amplitude[x] / counts[x]) : 0.0;
    return fit;
}

namespace {

// d(x,y) = |a_x - a_y| + sum_u w_u |s_xu - s_yu|
Eigen::MatrixXd row_distances(const QveModel& model) {
    Eigen::MatrixXd d(model.n, model.n);
    for (Eigen::Index x = 0; x < model.n; ++x)
        for (Eigen::Index y = 0; y <= x; ++y) {
            const double ds =
                ((model.s.row(x) - model.s.row(y)).cwiseAbs() *
                 model.weights.asDiagonal())
                    .sum();
            d(x, y) = d(y, x) = std::abs(model.a[x] - model.a[y]) + ds;
        }
    return d;
}

}  // namespace

ConnectivityResult connectivity_test(const QveModel& model, ConnectivityMode mode,
                                     double tol) {
    const Eigen::Index n = model.n;
    const Eigen::MatrixXd d = row_distances(model);
    double witness = 0.0;
    if (mode == ConnectivityMode::Exact) {
        if (n > 20)
            throw TooLargeForExact("connectivity_test: exact mode capped at n=20");
        const std::uint32_t full = (1u << n) - 1u;
        for (std::uint32_t mask = 1; mask < full; ++mask) {
            double cut_min = std::numeric_limits<double>::infinity();
            for (Eigen::Index x = 0; x < n; ++x) {
                if (!(mask & (1u << x))) continue;
                for (Eigen::Index y = 0; y < n; ++y) {
                    if (mask & (1u << y)) continue;
                    cut_min = std::min(cut_min, d(x, y));
                }
            }
            witness = std::max(witness, cut_min);
        }
    } else {
        // Contiguous prefixes of the grid order only.
        for (Eigen::Index k = 1; k < n; ++k) {
            double cut_min = std::numeric_limits<double>::infinity();
            for (Eigen::Index x = 0; x < k; ++x)
                for (Eigen::Index y = k; y < n; ++y)
                    cut_min = std::min(cut_min, d(x, y));
            witness = std::max(witness, cut_min);
        }
    }
    return {witness <= tol, witness};
}

void write_singularity_json(const std::vector<SingularityReport>& reports,
                            const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const SingularityReport& r : reports) {
        nlohmann::json e;
        e["tau0"] = r.tau0;
        e["kind"] = to_string(r.kind);
        e["sigma"] = r.sigma;
        e["psi"] = r.psi;
        e["fitted_exponent"] = r.fitted_exponent;
        e["predicted_amplitude"] = std::vector<double>(
            r.predicted_amplitude.data(),
            r.predicted_amplitude.data() + r.predicted_amplitude.size());
        e["fitted_amplitude"] = std::vector<double>(
            r.fitted_amplitude.data(),
            r.fitted_amplitude.data() + r.fitted_amplitude.size());
        e["stability"] = r.stability;
        j.push_back(e);
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace qve
