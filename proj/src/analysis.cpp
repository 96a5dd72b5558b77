#include "qve/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace qve {

std::vector<double> default_eta_ladder() {
    std::vector<double> etas;
    for (int k = 0; k <= 10; ++k) etas.push_back(std::pow(10.0, -1.0 - 0.5 * k));
    return etas;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count > 1 ? lo + (hi - lo) * i / double(count - 1) : lo;
    return out;
}

DensityProfile compute_density(const QveModel& model, const AnalysisOptions& opts) {
    const std::vector<double> etas =
        opts.eta_ladder.empty() ? default_eta_ladder() : opts.eta_ladder;
    const double span = model.kappa + opts.tau_pad;
    SolutionGrid grid = solve_grid(model, linspace(-span, span, opts.tau_count),
                                   etas, opts.solve, opts.workers);
    return extract_density(grid, Extrapolation::Richardson);
}

Eigen::MatrixXd density_at(const QveModel& model, const std::vector<double>& taus,
                           double eta_floor, const SolveOptions& solve) {
    std::vector<double> ladder;
    double eta = std::max(100.0 * eta_floor, 1e-4);
    while (eta > eta_floor * 1.0001) {
        ladder.push_back(eta);
        eta /= std::sqrt(10.0);
    }
    ladder.push_back(eta_floor);

    Eigen::MatrixXd v(model.n, taus.size());
    std::optional<VectorXc> top_start;  // neighbor tau's top-of-ladder solution
    for (std::size_t i = 0; i < taus.size(); ++i) {
        SolutionSlice slice =
            solve_at(model, Complex(taus[i], ladder[0]), solve, top_start);
        top_start = slice.m;
        Eigen::VectorXd prev = slice.m.imag();
        double eta_prev = ladder[0];
        for (std::size_t j = 1; j < ladder.size(); ++j) {
            slice = solve_at(model, Complex(taus[i], ladder[j]), solve, slice.m);
            if (j + 1 == ladder.size()) {
                const Eigen::VectorXd last = slice.m.imag();
                v.col(i) = ((eta_prev * last - ladder[j] * prev) /
                            (eta_prev - ladder[j])) /
                           M_PI;
            } else {
                prev = slice.m.imag();
                eta_prev = ladder[j];
            }
        }
        v.col(i) = v.col(i).cwiseMax(0.0);
    }
    return v;
}

namespace {

double avg_density_point(const QveModel& model, double tau, double eta,
                         const SolveOptions& solve,
                         std::optional<VectorXc>& warm) {
    SolutionSlice slice = solve_at(model, Complex(tau, eta), solve, warm);
    warm = slice.m;
    return model.avg(slice.m.imag()) / M_PI;
}

// Sub-grid edge location: near a square-root edge the squared average
// density is linear in tau; extrapolate its zero crossing.
double refine_edge(const QveModel& model, double tau_e, double into_support,
                   double dtau, const AnalysisOptions& opts,
                   double omega_cap = 1.4e-3) {
    double tau0 = tau_e;
    std::optional<VectorXc> warm;  // probes sit within a few dtau of each other
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> omegas;
        // Small window: rho^2 curvature shifts the extrapolated root by
        // O(omega^2), so keep omega ~ 1e-3 (tighter near a narrow gap,
        // where the square-root regime is correspondingly narrow).
        for (int k = 2; k <= 7; ++k) omegas.push_back(omega_cap * k / 7.0);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (double omega : omegas) {
            const double tau = tau0 + into_support * omega;
            const double rho =
                avg_density_point(model, tau, opts.eta_real, opts.solve, warm);
            const double y = rho * rho;
            sx += omega;
            sy += y;
            sxx += omega * omega;
            sxy += omega * y;
        }
        const double k = double(omegas.size());
        const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / k;
        if (slope <= 0.0) break;
        const double root = -intercept / slope;  // offset of the true edge
        if (std::abs(root) > 3.0 * dtau) break;
        tau0 += into_support * root;
    }
    return tau0;
}

// Golden-section minimum of the average density; cusps are sharp V shapes.
double refine_minimum(const QveModel& model, double lo, double hi, double eta,
                      const SolveOptions& solve) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    std::optional<VectorXc> warm;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = avg_density_point(model, c, eta, solve, warm);
    double fd = avg_density_point(model, d, eta, solve, warm);
    for (int it = 0; it < 40 && (b - a) > 1e-7; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = avg_density_point(model, c, eta, solve, warm);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = avg_density_point(model, d, eta, solve, warm);
        }
    }
    return 0.5 * (a + b);
}

struct Candidate {
    double tau = 0.0;
    bool cusp_like = false;   // located by minimization, not edge extrapolation
    bool from_dip = false;    // interior dip, subject to the vanishing test
    double into_support = 1.0;  // for edges: direction of the support side
    // For merged endpoint pairs: the detected edges flanking the small gap.
    double src_left = 0.0;
    double src_right = 0.0;
};

// Does the density vanish at tau? A zero scales Im<m> down with eta, a
// positive local minimum pins it.
bool density_vanishes(const QveModel& model, double tau,
                      const AnalysisOptions& opts) {
    SolutionSlice lo = solve_at(model, Complex(tau, opts.eta_real), opts.solve);
    SolutionSlice hi =
        solve_at(model, Complex(tau, 100.0 * opts.eta_real), opts.solve, lo.m);
    return model.avg(lo.m.imag()) <
           opts.dip_vanish_ratio * model.avg(hi.m.imag());
}

// Edge of a zero-density region: bisect the vanishing indicator between a
// point inside the gap and one inside the support.
double bisect_gap_edge(const QveModel& model, double in_gap, double in_support,
                       const AnalysisOptions& opts) {
    for (int it = 0; it < 30 && std::abs(in_support - in_gap) > 1e-7; ++it) {
        const double mid = 0.5 * (in_gap + in_support);
        (density_vanishes(model, mid, opts) ? in_gap : in_support) = mid;
    }
    return 0.5 * (in_gap + in_support);
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo * std::pow(hi / lo, count > 1 ? i / double(count - 1) : 0.0);
    return out;
}

}  // namespace

SupportAnalysis classify_support(const QveModel& model,
                                 const AnalysisOptions& opts) {
    SupportAnalysis result;
    result.profile = compute_density(model, opts);
    result.support = detect_support(result.profile, opts.support_threshold);
    const double dtau =
        result.profile.taus.size() > 1
            ? result.profile.taus[1] - result.profile.taus[0]
            : 1e-2;
    const double merge_tol = 4.0 * dtau;

    // Gather raw candidates: interval endpoints, with close endpoint pairs of
    // adjacent intervals merged into one cusp candidate.
    std::vector<Candidate> candidates;
    const auto& support = result.support;
    for (std::size_t k = 0; k < support.size(); ++k) {
        const bool merge_left =
            k > 0 && support[k].left - support[k - 1].right < merge_tol;
        const bool merge_right =
            k + 1 < support.size() &&
            support[k + 1].left - support[k].right < merge_tol;
        if (!merge_left)
            candidates.push_back({support[k].left, false, false, +1.0});
        if (merge_right)
            candidates.push_back(
                {0.5 * (support[k].right + support[k + 1].left), true, false,
                 0.0, support[k].right, support[k + 1].left});
        else
            candidates.push_back({support[k].right, false, false, -1.0});
    }

    // Interior dips of the average density.
    const double rho_max = result.profile.avg.maxCoeff();
    for (std::size_t i = 1; i + 1 < result.profile.taus.size(); ++i) {
        const double rho = result.profile.avg[i];
        if (rho >= result.profile.avg[i - 1] || rho >= result.profile.avg[i + 1])
            continue;
        if (rho > 0.6 * rho_max) continue;
        const double tau = result.profile.taus[i];
        bool interior = false;
        for (const Interval& iv : support)
            interior = interior ||
                       (tau > iv.left + merge_tol && tau < iv.right - merge_tol);
        if (!interior) continue;
        bool near_existing = false;
        for (const Candidate& c : candidates)
            near_existing = near_existing || std::abs(c.tau - tau) < merge_tol;
        if (!near_existing) candidates.push_back({tau, true, true, 0.0});
    }

    // Refine locations.
    for (Candidate& c : candidates) {
        if (c.cusp_like)
            c.tau = refine_minimum(model, c.tau - 2.0 * dtau, c.tau + 2.0 * dtau,
                                   1e-5, opts.solve);
        else
            c.tau = refine_edge(model, c.tau, c.into_support, dtau, opts);
    }
    // Drop interior dips whose density does not actually vanish.
    std::erase_if(candidates, [&](const Candidate& c) {
        return c.from_dip && !density_vanishes(model, c.tau, opts);
    });
    // A cusp-like point is only a cusp when sigma is small; otherwise the
    // density vanishes on a resolved gap and the point splits into the two
    // square-root edges flanking it.
    std::vector<Candidate> split;
    for (const Candidate& c : candidates) {
        if (!c.cusp_like) {
            split.push_back(c);
            continue;
        }
        SolutionSlice slice =
            solve_at(model, Complex(c.tau, opts.eta_real), opts.solve);
        StabilityOperator op = build_F(model, slice.m);
        const double sigma =
            sigma_psi(model, c.tau, slice.m, op, perron(op)).first;
        if (std::abs(sigma) <= opts.cusp_tol) {
            split.push_back(c);
            continue;
        }
        double left_e = c.src_left, right_e = c.src_right;
        if (c.from_dip) {
            left_e = bisect_gap_edge(model, c.tau, c.tau - 2.0 * dtau, opts);
            right_e = bisect_gap_edge(model, c.tau, c.tau + 2.0 * dtau, opts);
        }
        const double cap =
            std::clamp((right_e - left_e) / 3.0, 1e-5, 1.4e-3);
        split.push_back({refine_edge(model, left_e, -1.0, dtau, opts, cap),
                         false, false, -1.0});
        split.push_back({refine_edge(model, right_e, +1.0, dtau, opts, cap),
                         false, false, +1.0});
    }
    candidates = std::move(split);
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.tau < b.tau; });

    // Classify and fit each boundary point.
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const Candidate& c = candidates[k];
        SingularityReport report;
        report.tau0 = c.tau;

        SolutionSlice slice =
            solve_at(model, Complex(c.tau, opts.eta_real), opts.solve);
        StabilityOperator op = build_F(model, slice.m);
        SpectralData spectral = perron(op);
        spectral.z = Complex(c.tau, 0.0);
        auto [sigma, psi] = sigma_psi(model, c.tau, slice.m, op, spectral);
        report.sigma = sigma;
        report.psi = psi;
        report.stability = psi + sigma * sigma;
        report.kind = classify(sigma, psi, opts.cusp_tol);
        try {
            report.predicted_amplitude = predicted_amplitude(
                report.kind, model, slice.m, spectral, sigma, psi);
        } catch (const DivisionDegenerate&) {
            report.predicted_amplitude = Eigen::VectorXd::Zero(model.n);
        }

        // Fitting window bounded away from the neighboring boundary points.
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (j != k)
                gap = std::min(gap, std::abs(candidates[j].tau - c.tau));
        double omega_max = std::min(opts.fit_omega_max, gap / 4.0);
        double omega_min = opts.fit_omega_min;
        if (omega_max < 3.0 * omega_min) omega_min = omega_max / 10.0;

        FitSide side = FitSide::Both;
        if (report.kind == SingularityKind::LeftEdge) side = FitSide::Plus;
        if (report.kind == SingularityKind::RightEdge) side = FitSide::Minus;

        std::vector<double> taus;
        for (double omega : log_spaced(omega_min, omega_max,
                                       opts.fit_points_per_side)) {
            if (side != FitSide::Minus) taus.push_back(c.tau + omega);
            if (side != FitSide::Plus) taus.push_back(c.tau - omega);
        }
        std::sort(taus.begin(), taus.end());
        DensityProfile local;
        local.model = &model;
        local.taus = taus;
        local.eta_floor = opts.eta_real;
        local.v = density_at(model, taus, opts.eta_real, opts.solve);
        local.avg = local.v.transpose() * model.weights;
        local.error_estimate = Eigen::VectorXd::Zero(taus.size());
        // A cusp next to an unresolved zero-density sliver picks up fit
        // points at the extrapolation floor; drop them.
        const double fit_floor = 1e-3 * local.avg.maxCoeff();
        double gap_reach = 0.0;  // widest floor-level offset: inside the sliver
        for (std::size_t i = 0; i < local.taus.size(); ++i)
            if (local.avg[i] < fit_floor)
                gap_reach = std::max(gap_reach, std::abs(local.taus[i] - c.tau));
        // Offsets comparable to the sliver width still feel it; keep only
        // points safely beyond.
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < local.taus.size(); ++i)
            if (local.avg[i] >= fit_floor &&
                std::abs(local.taus[i] - c.tau) > 3.0 * gap_reach)
                keep.push_back(i);
        if (keep.size() >= 4 && keep.size() < local.taus.size()) {
            DensityProfile trimmed;
            trimmed.model = &model;
            trimmed.eta_floor = opts.eta_real;
            trimmed.v.resize(local.v.rows(), keep.size());
            trimmed.avg.resize(keep.size());
            for (std::size_t i = 0; i < keep.size(); ++i) {
                trimmed.taus.push_back(local.taus[keep[i]]);
                trimmed.v.col(i) = local.v.col(keep[i]);
                trimmed.avg[i] = local.avg[keep[i]];
            }
            trimmed.error_estimate = Eigen::VectorXd::Zero(keep.size());
            local = std::move(trimmed);
        }

        ExponentFit fit =
            fit_exponent(local, c.tau, side, omega_min * 0.99, omega_max * 1.01);
        report.fitted_exponent = fit.exponent;
        report.fitted_amplitude = fit.amplitude;
        result.reports.push_back(std::move(report));
    }
    return result;
}

}  // namespace qve
