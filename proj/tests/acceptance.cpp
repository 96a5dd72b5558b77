// Acceptance gate: one numbered check per line, exit 1 if any fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qve/analysis.hpp"
#include "qve/ensembles.hpp"
#include "qve/montecarlo.hpp"
#include "qve/stability.hpp"

using namespace qve;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

QveModel two_point_block(double alpha, double delta) {
    Eigen::VectorXd w(2);
    w << delta, 1.0 - delta;
    Eigen::MatrixXd s(2, 2);
    s << alpha, 1.0, 1.0, 1.0 / alpha;
    return build_model(w, Eigen::VectorXd::Zero(2), s);
}

QveModel random_positive_model(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> entry(0.1, 2.0), wdist(0.5, 1.5),
        adist(-1.0, 1.0);
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) s(i, j) = s(j, i) = entry(rng);
    Eigen::VectorXd w(n), a(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = wdist(rng);
        a[i] = adist(rng);
    }
    return build_model(w, a, s);
}

std::vector<double> ladder_to(double eta_min) {
    std::vector<double> etas = default_eta_ladder();
    while (etas.back() < eta_min * 0.999) etas.pop_back();
    return etas;
}

// Shared between checks: analyses feed the boundary-radius probe, the
// semicircle profile feeds the round trip, moments and Monte Carlo.
struct BoundaryProbe {
    const QveModel* model;
    SingularityKind kind;
    double tau0;
};
std::vector<QveModel> g_sweep_models;
std::vector<BoundaryProbe> g_probes;
DensityProfile g_sc_fine;
QveModel g_sc200 = semicircle_model(200);
std::vector<SolutionSlice> g_slices;  // everything solved along the way

void record_probes(const QveModel& model, const SupportAnalysis& analysis) {
    for (const SingularityReport& r : analysis.reports)
        g_probes.push_back({&model, r.kind, r.tau0});
}

double max_rel_err(const VectorXc& got, const VectorXc& want) {
    return ((got - want).cwiseAbs().cwiseQuotient(want.cwiseAbs())).maxCoeff();
}

Outcome check_semicircle_oracle() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> re(-3.0, 3.0), lim(-4.0, 0.0);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Complex z(re(rng), std::pow(10.0, lim(rng)));
        SolutionSlice s = solve_at(g_sc200, z);
        g_slices.push_back(s);
        const Complex exact = semicircle_exact(z);
        for (Eigen::Index x = 0; x < s.m.size(); ++x)
            worst = std::max(worst, std::abs(s.m[x] - exact) / std::abs(exact));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {worst < 1e-9 && secs < 5.0,
            fmt("n=200, 100 solves, max rel err %.1e, %.2f s", worst, secs)};
}

Outcome check_bulk_density() {
    QveModel sc = semicircle_model(4);
    SolutionGrid g =
        solve_grid(sc, linspace(-3.0, 3.0, 601), ladder_to(1e-5));
    DensityProfile p = extract_density(g, Extrapolation::Richardson);
    double worst = 0.0, at_zero = 0.0;
    for (std::size_t i = 0; i < p.taus.size(); ++i) {
        const double tau = p.taus[i];
        if (std::abs(tau) > 1.9 + 1e-12) continue;
        const double exact = std::sqrt(4.0 - tau * tau) / (2.0 * M_PI);
        worst = std::max(worst, std::abs(p.avg[i] - exact));
        if (std::abs(tau) < 1e-12) at_zero = std::abs(p.avg[i] - 1.0 / M_PI);
    }
    return {worst < 1e-4 && at_zero < 1e-4,
            fmt("sup error %.1e on [-1.9,1.9], |rho(0)-1/pi| = %.1e", worst,
                at_zero)};
}

Outcome check_edge_law() {
    static QveModel sc = semicircle_model(2);
    AnalysisOptions opts;
    opts.tau_count = 121;
    SupportAnalysis analysis = classify_support(sc, opts);
    record_probes(sc, analysis);
    if (analysis.reports.size() != 2)
        return {false, fmt("%zu boundary points", analysis.reports.size())};
    bool ok = true;
    double worst_exp = 0.0, worst_amp = 0.0;
    for (const SingularityReport& r : analysis.reports) {
        ok = ok && r.kind != SingularityKind::Cusp;
        worst_exp = std::max(worst_exp, std::abs(r.fitted_exponent - 0.5));
        const double rel =
            ((r.fitted_amplitude - r.predicted_amplitude).cwiseAbs().cwiseQuotient(
                 r.predicted_amplitude))
                .maxCoeff();
        worst_amp = std::max(worst_amp, rel);
        ok = ok && std::abs(r.predicted_amplitude[0] - 1.0 / M_PI) < 1e-3;
    }
    ok = ok && worst_exp < 0.02 && worst_amp < 0.05;
    return {ok, fmt("exponent 0.5 +- %.1e, amplitude vs predicted 1/pi %.1f%%",
                    worst_exp, 100.0 * worst_amp)};
}

Outcome check_cusp_law() {
    static QveModel block =
        block_model({3.0, 1.0, 1.0 / 3.0, delta_critical(3.0)}, 504);
    SupportAnalysis analysis = classify_support(block, {});
    record_probes(block, analysis);
    std::vector<const SingularityReport*> cusps;
    for (const SingularityReport& r : analysis.reports)
        if (r.kind == SingularityKind::Cusp) cusps.push_back(&r);
    // The density is even (a = 0), so the single cusp appears as a mirror
    // pair; require exactly one cusp location up to reflection.
    bool one_location = !cusps.empty() && cusps.size() <= 2;
    for (const SingularityReport* c : cusps)
        one_location = one_location &&
                       std::abs(std::abs(c->tau0) - std::abs(cusps[0]->tau0)) < 1e-3;
    if (!one_location)
        return {false, fmt("%zu cusps, not a single mirror pair", cusps.size())};
    bool ok = true;
    double worst_amp = 0.0;
    for (const SingularityReport* c : cusps) {
        ok = ok && std::abs(c->fitted_exponent - 1.0 / 3.0) < 0.05;
        ok = ok && std::abs(c->sigma) <= 0.05;
        ok = ok && c->psi + c->sigma * c->sigma > 0.1;
        worst_amp = std::max(
            worst_amp,
            ((c->fitted_amplitude - c->predicted_amplitude)
                 .cwiseAbs()
                 .cwiseQuotient(c->predicted_amplitude))
                .maxCoeff());
    }
    ok = ok && worst_amp < 0.20;
    return {ok, fmt("cusp pair at +-%.5f, exponent %.4f, sigma %.4f, "
                    "psi+sigma^2 %.2f, amplitude gap %.1f%%",
                    std::abs(cusps[0]->tau0), cusps[0]->fitted_exponent,
                    cusps[0]->sigma,
                    cusps[0]->psi + cusps[0]->sigma * cusps[0]->sigma,
                    100.0 * worst_amp)};
}

Outcome check_exponent_dichotomy() {
    g_sweep_models.reserve(10);
    bool ok = true;
    int points = 0;
    double worst = 0.0;
    for (double alpha : {3.0, 4.0})
        for (double factor : {0.5, 0.9, 1.0, 1.1, 1.5}) {
            g_sweep_models.push_back(
                two_point_block(alpha, factor * delta_critical(alpha)));
            const QveModel& m = g_sweep_models.back();
            SupportAnalysis analysis = classify_support(m, {});
            record_probes(m, analysis);
            for (const SingularityReport& r : analysis.reports) {
                const double d = std::min(std::abs(r.fitted_exponent - 0.5),
                                          std::abs(r.fitted_exponent - 1.0 / 3.0));
                worst = std::max(worst, d);
                ok = ok && d < 0.07;
                ++points;
            }
        }
    return {ok && points >= 20,
            fmt("10 parameter sets, %d boundary points, worst distance to "
                "{1/2,1/3} = %.3f",
                points, worst)};
}

Outcome check_radius_identity() {
    std::mt19937_64 rng(211);
    std::uniform_real_distribution<double> re(-3.0, 3.0), lim(-3.0, 0.5);
    QveModel models[] = {semicircle_model(8),
                         block_model({3.0, 1.0, 1.0 / 3.0, 0.25}, 16),
                         deformed_wigner_model(
                             1.0, Eigen::VectorXd::LinSpaced(8, -1.0, 1.0), 8)};
    double worst = 0.0;
    for (const QveModel& model : models)
        for (int trial = 0; trial < 100; ++trial) {
            Complex z(re(rng), std::pow(10.0, lim(rng)));
            SolutionSlice s = solve_at(model, z);
            g_slices.push_back(s);
            SpectralData data = perron(build_F(model, s.m));
            worst = std::max(worst, qve::check_radius_relation(model, z, s.m, data));
        }
    return {worst < 1e-8, fmt("3 models x 100 z, worst residual %.1e", worst)};
}

Outcome check_boundary_radius() {
    // Probe 1e-3 inside the support: exactly at the singular point the
    // radius deficit is ~sqrt(2 eta) > 1e-3 by the radius relation itself.
    const double inset = 1e-3;
    double lo = 2.0, hi = 0.0;
    for (const BoundaryProbe& p : g_probes) {
        std::vector<double> taus;
        if (p.kind != SingularityKind::RightEdge) taus.push_back(p.tau0 + inset);
        if (p.kind != SingularityKind::LeftEdge) taus.push_back(p.tau0 - inset);
        for (double tau : taus) {
            SolutionSlice s = solve_at(*p.model, {tau, 1e-6});
            SpectralData data = perron(build_F(*p.model, s.m));
            lo = std::min(lo, data.radius);
            hi = std::max(hi, data.radius);
        }
    }
    return {!g_probes.empty() && lo >= 0.999 && hi <= 1.0 + 1e-9,
            fmt("%zu boundary points, radius range [%.6f, %.9f]",
                g_probes.size(), lo, hi)};
}

Outcome check_gap_lemma() {
    std::mt19937_64 rng(307);
    std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.1, 2.0);
    std::uniform_int_distribution<int> ndist(2, 50);
    double worst = 1.0;
    for (int trial = 0; trial < 50; ++trial) {
        QveModel model = random_positive_model(rng, ndist(rng));
        SolutionSlice s = solve_at(model, {re(rng), im(rng)});
        g_slices.push_back(s);
        StabilityOperator op = build_F(model, s.m);
        SpectralData data = perron(op);
        worst = std::min(worst, data.gap - gap_lower_bound(op, data.f));
    }
    return {worst >= -1e-10, fmt("50 random models, min (gap - bound) = %.1e",
                                 worst)};
}

Outcome check_contraction() {
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.1, 2.0),
        unif(0.0, 1.0), angle(0.05, M_PI - 0.05);
    std::uniform_int_distribution<int> ndist(2, 20);
    double worst = -1.0;
    for (int trial = 0; trial < 100; ++trial) {
        QveModel model = random_positive_model(rng, ndist(rng));
        const double eta = im(rng);
        const Complex z(re(rng), eta);
        // Probes in the invariant ball ||u|| <= 1/eta of the map.
        auto draw = [&] {
            VectorXc u(model.n);
            for (Eigen::Index x = 0; x < model.n; ++x)
                u[x] = std::polar(unif(rng) / eta, angle(rng));
            return u;
        };
        const double ratio = contraction_ratio_probe(model, z, draw(), draw());
        const double bound =
            std::pow(1.0 + eta * eta / model.op_norm, -2.0);
        worst = std::max(worst, ratio - bound);
    }
    return {worst <= 1e-12, fmt("100 probes, max (ratio - bound) = %.1e", worst)};
}

Outcome check_hyperbolic() {
    std::mt19937_64 rng(503);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(0.01, 3.0),
        pos(0.1, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Complex zeta(re(rng), im(rng)), omega(re(rng), im(rng));
        const double d = hyperbolic_D(zeta, omega);
        const double t = re(rng), lambda = pos(rng), eta = pos(rng);
        worst = std::max(worst,
                         std::abs(hyperbolic_D(zeta + t, omega + t) - d) /
                             std::max(d, 1e-300));
        worst = std::max(worst,
                         std::abs(hyperbolic_D(lambda * zeta, lambda * omega) - d) /
                             std::max(d, 1e-300));
        const Complex shift(0.0, eta);
        const double expect =
            d / ((1.0 + eta / zeta.imag()) * (1.0 + eta / omega.imag()));
        worst = std::max(
            worst, std::abs(hyperbolic_D(zeta + shift, omega + shift) - expect) /
                       std::max(expect, 1e-300));
    }
    bool convex = true;
    for (int trial = 0; trial < 1000; ++trial) {
        Complex ws = 0, us = 0;
        double dmax = 0.0;
        for (int i = 0; i < 4; ++i) {
            const Complex w(re(rng), im(rng)), u(re(rng), im(rng));
            const double c = pos(rng);
            ws += c * w;
            us += c * u;
            dmax = std::max(dmax, hyperbolic_D(w, u));
        }
        convex = convex && hyperbolic_D(ws, us) <= dmax + 1e-12;
    }
    return {worst < 1e-12 && convex,
            fmt("1000 probes, worst identity error %.1e, convexity %s", worst,
                convex ? "holds" : "violated")};
}

Outcome check_single_interval() {
    const Eigen::Index n = 200;
    Eigen::VectorXd x = grid_positions(n);
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            s(i, j) = 1.0 + 0.5 * std::sqrt(std::abs(x[i] - x[j]));
    static QveModel model = build_model(Eigen::VectorXd::Constant(n, 1.0 / n),
                                        Eigen::VectorXd::Zero(n), s);
    ConnectivityResult conn = connectivity_test(model, ConnectivityMode::Prefix);
    if (!conn.connected || conn.witness > 1e-2)
        return {false, fmt("prefix witness %.1e", conn.witness)};
    AnalysisOptions opts;
    opts.tau_count = 151;
    SupportAnalysis analysis = classify_support(model, opts);
    record_probes(model, analysis);
    return {analysis.support.size() == 1 && analysis.reports.size() == 2,
            fmt("witness %.1e, %zu interval(s), %zu boundary points",
                conn.witness, analysis.support.size(),
                analysis.reports.size())};
}

Outcome check_reduced_oracle() {
    const BlockParams params{3.0, 1.0, 1.0 / 3.0, 0.25};
    QveModel block = block_model(params, 200);
    std::mt19937_64 rng(607);
    std::uniform_real_distribution<double> re(-3.0, 3.0), lim(-3.0, 0.5);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Complex z(re(rng), std::pow(10.0, lim(rng)));
        SolutionSlice s = solve_at(block, z);
        g_slices.push_back(s);
        auto [m1, m2] = reduced_block_solve(params, z);
        for (Eigen::Index x = 0; x < 200; ++x) {
            const Complex want = x < 50 ? m1 : m2;
            worst = std::max(worst, std::abs(s.m[x] - want) / std::abs(want));
        }
    }
    return {worst < 1e-9, fmt("50 z, worst componentwise rel err %.1e", worst)};
}

Outcome check_stieltjes_round_trip() {
    QveModel sc = semicircle_model(4);
    SolutionGrid g =
        solve_grid(sc, linspace(-3.0, 3.0, 2401), ladder_to(1e-5));
    g_sc_fine = extract_density(g, Extrapolation::Richardson);
    std::mt19937_64 rng(701);
    std::uniform_real_distribution<double> re(-2.5, 2.5), im(0.1, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Complex z(re(rng), im(rng));
        const VectorXc direct = solve_at(sc, z).m;
        worst = std::max(worst, max_rel_err(stieltjes_reconstruct(g_sc_fine, z),
                                            direct));
    }
    return {worst < 1e-3, fmt("20 held-out z, worst rel err %.1e", worst)};
}

Outcome check_moments() {
    struct Case {
        const char* name;
        QveModel model;
    };
    std::vector<Case> cases;
    cases.push_back({"semicircle", semicircle_model(4)});
    cases.push_back({"block", block_model({3.0, 1.0, 1.0 / 3.0, 0.25}, 16)});
    cases.push_back(
        {"deformed", deformed_wigner_model(
                         0.5, Eigen::VectorXd::LinSpaced(8, -1.0, 1.0), 8)});
    double worst = 0.0;
    for (const Case& c : cases) {
        SolutionGrid g =
            solve_grid(c.model, linspace(-3.5, 3.5, 2801), ladder_to(1e-5));
        Moments mom = moments(extract_density(g, Extrapolation::Richardson));
        const Eigen::VectorXd s_one = c.model.weighted_kernel().rowwise().sum();
        for (Eigen::Index x = 0; x < c.model.n; ++x) {
            worst = std::max(worst, std::abs(mom.mu0[x] - 1.0));
            worst = std::max(worst, std::abs(mom.mu1[x] + c.model.a[x]));
            worst = std::max(
                worst, std::abs(mom.mu2[x] - c.model.a[x] * c.model.a[x] -
                                s_one[x]));
        }
    }
    return {worst < 1e-3,
            fmt("3 models, worst |moment - closed form| = %.1e", worst)};
}

Outcome check_monte_carlo() {
    const auto t0 = Clock::now();
    QveModel sc = semicircle_model(4);
    std::vector<SpectrumSample> samples;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        samples.push_back(sample_spectrum(sc, 2000, seed));
    const double ks_sc = empirical_distance(samples, g_sc_fine).ks;

    QveModel block504 =
        block_model({3.0, 1.0, 1.0 / 3.0, delta_critical(3.0)}, 504);
    QveModel block2 = two_point_block(3.0, delta_critical(3.0));
    SolutionGrid g =
        solve_grid(block2, linspace(-2.5, 2.5, 1201), ladder_to(1e-5));
    DensityProfile block_profile = extract_density(g, Extrapolation::Richardson);
    samples.clear();
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        samples.push_back(sample_spectrum(block504, 2000, seed));
    const double ks_block = empirical_distance(samples, block_profile).ks;
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {ks_sc <= 0.05 && ks_block <= 0.08 && secs < 60.0,
            fmt("KS %.4f (semicircle), %.4f (block), %.1f s", ks_sc, ks_block,
                secs)};
}

Outcome check_trivial_bounds() {
    bool trivial = true;
    for (const SolutionSlice& s : g_slices)
        trivial = trivial &&
                  s.m.cwiseAbs().maxCoeff() <= 1.0 / s.z.imag() + 1e-12;
    // Large-z decay for |z| > kappa.
    std::mt19937_64 rng(811);
    std::uniform_real_distribution<double> extra(0.1, 4.0), phase(0.05, M_PI - 0.05);
    QveModel models[] = {semicircle_model(8),
                         block_model({3.0, 1.0, 1.0 / 3.0, 0.25}, 16),
                         deformed_wigner_model(
                             0.5, Eigen::VectorXd::LinSpaced(8, -1.0, 1.0), 8)};
    double worst = 0.0;
    for (const QveModel& model : models) {
        const double a_norm = model.a.cwiseAbs().maxCoeff();
        for (int trial = 0; trial < 30; ++trial) {
            const Complex z = std::polar(model.kappa + extra(rng), phase(rng));
            SolutionSlice s = solve_at(model, z);
            trivial = trivial &&
                      s.m.cwiseAbs().maxCoeff() <= 1.0 / z.imag() + 1e-12;
            worst = std::max(worst, s.m.cwiseAbs().maxCoeff() -
                                        2.0 / (std::abs(z) - a_norm));
        }
    }
    return {trivial && worst <= 0.0,
            fmt("%zu slices within 1/Im z; large-z margin %.1e", g_slices.size(),
                worst)};
}

}  // namespace

int main() {
    struct Check {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Check> checks = {
        {"semicircle oracle equivalence", check_semicircle_oracle},
        {"bulk density accuracy", check_bulk_density},
        {"square-root edge law", check_edge_law},
        {"cusp law on the critical block model", check_cusp_law},
        {"exponent dichotomy sweep", check_exponent_dichotomy},
        {"spectral radius relation", check_radius_identity},
        {"radius at the boundary", check_boundary_radius},
        {"spectral gap lower bound", check_gap_lemma},
        {"contraction certificate", check_contraction},
        {"hyperbolic metric properties", check_hyperbolic},
        {"single-interval support for a Holder kernel", check_single_interval},
        {"reduced two-component oracle", check_reduced_oracle},
        {"Stieltjes round trip", check_stieltjes_round_trip},
        {"moment identities", check_moments},
        {"Monte Carlo eigenvalue distribution", check_monte_carlo},
        {"trivial and large-z bounds", check_trivial_bounds},
    };
    int failures = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        Outcome outcome;
        try {
            outcome = checks[i].run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%2zu] %s  %s: %s\n", i + 1,
                    outcome.pass ? "PASS" : "FAIL", checks[i].name,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of %zu checks failed\n", failures, checks.size());
    else std::printf("all %zu checks passed\n", checks.size());
    return failures ? 1 : 0;
}
