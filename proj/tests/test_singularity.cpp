#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "qve/analysis.hpp"
#include "qve/ensembles.hpp"
#include "qve/singularity.hpp"

using namespace qve;

namespace {

struct EdgeData {
    SolutionSlice slice;
    StabilityOperator op;
    SpectralData spectral;
};

EdgeData at_point(const QveModel& model, double tau, double eta = 1e-6) {
    EdgeData d;
    d.slice = solve_at(model, {tau, eta});
    d.op = build_F(model, d.slice.m);
    d.spectral = perron(d.op);
    d.spectral.z = Complex(tau, 0.0);
    return d;
}

}  // namespace

TEST_CASE("sigma and psi at the semicircle edges") {
    QveModel sc = semicircle_model(4);
    SUBCASE("right edge tau=2") {
        EdgeData d = at_point(sc, 2.0);
        auto [sigma, psi] = sigma_psi(sc, 2.0, d.slice.m, d.op, d.spectral);
        CHECK(sigma == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(psi == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(classify(sigma, psi) == SingularityKind::RightEdge);
    }
    SUBCASE("left edge tau=-2") {
        EdgeData d = at_point(sc, -2.0);
        auto [sigma, psi] = sigma_psi(sc, -2.0, d.slice.m, d.op, d.spectral);
        CHECK(sigma == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(psi == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(classify(sigma, psi) == SingularityKind::LeftEdge);
    }
    SUBCASE("ambiguous sign at tau=0 in the bulk") {
        EdgeData d = at_point(sc, 0.0);
        CHECK_THROWS_AS(sigma_psi(sc, 0.0, d.slice.m, d.op, d.spectral),
                        AmbiguousSign);
    }
}

TEST_CASE("classify dichotomy") {
    CHECK(classify(-1.0, 0.0) == SingularityKind::RightEdge);
    CHECK(classify(1.0, 0.0) == SingularityKind::LeftEdge);
    CHECK(classify(0.0, 0.5) == SingularityKind::Cusp);
    CHECK(classify(0.04, 0.5) == SingularityKind::Cusp);     // inside cusp_tol
    CHECK(classify(0.06, 0.5) == SingularityKind::LeftEdge); // outside
}

TEST_CASE("predicted edge amplitude") {
    SUBCASE("semicircle gives 1/pi") {
        QveModel sc = semicircle_model(4);
        EdgeData d = at_point(sc, 2.0);
        auto [sigma, psi] = sigma_psi(sc, 2.0, d.slice.m, d.op, d.spectral);
        Eigen::VectorXd c = predicted_amplitude(SingularityKind::RightEdge, sc,
                                                d.slice.m, d.spectral, sigma, psi);
        for (int i = 0; i < 4; ++i)
            CHECK(c[i] == doctest::Approx(1.0 / M_PI).epsilon(1e-3));
    }
    SUBCASE("rescaled semicircle s=lambda gives lambda^(-3/4)/pi") {
        const double lambda = 0.3;
        QveModel d = deformed_wigner_model(lambda, Eigen::VectorXd::Zero(2), 2);
        const double edge = 2.0 * std::sqrt(lambda);
        EdgeData e = at_point(d, edge);
        auto [sigma, psi] = sigma_psi(d, edge, e.slice.m, e.op, e.spectral);
        Eigen::VectorXd c = predicted_amplitude(SingularityKind::RightEdge, d,
                                                e.slice.m, e.spectral, sigma, psi);
        CHECK(c[0] == doctest::Approx(std::pow(lambda, -0.75) / M_PI)
                          .epsilon(2e-3));
        // Cross-check against the closed-form density sqrt(4l - t^2)/(2 pi l).
        const double omega = 1e-4;
        const double v_exact =
            std::sqrt(4 * lambda - (edge - omega) * (edge - omega)) /
            (2 * M_PI * lambda);
        CHECK(c[0] * std::sqrt(omega) == doctest::Approx(v_exact).epsilon(1e-2));
    }
    SUBCASE("degenerate denominators") {
        QveModel sc = semicircle_model(2);
        EdgeData d = at_point(sc, 2.0);
        CHECK_THROWS_AS(predicted_amplitude(SingularityKind::Cusp, sc, d.slice.m,
                                            d.spectral, 0.0, 0.0),
                        DivisionDegenerate);
        CHECK_THROWS_AS(predicted_amplitude(SingularityKind::RightEdge, sc,
                                            d.slice.m, d.spectral, 0.0, 1.0),
                        DivisionDegenerate);
    }
}

TEST_CASE("exponent fit on the semicircle edge") {
    QveModel sc = semicircle_model(2);
    std::vector<double> taus;
    for (int k = 0; k < 14; ++k)
        taus.push_back(2.0 - 1e-4 * std::pow(100.0, k / 13.0));
    std::sort(taus.begin(), taus.end());
    DensityProfile local;
    local.model = &sc;
    local.taus = taus;
    local.eta_floor = 1e-6;
    local.v = density_at(sc, taus, 1e-6, {});
    local.avg = local.v.transpose() * sc.weights;
    local.error_estimate = Eigen::VectorXd::Zero(taus.size());

    ExponentFit fit = fit_exponent(local, 2.0, FitSide::Minus, 0.99e-4, 1.01e-2);
    CHECK(fit.exponent == doctest::Approx(0.5).epsilon(0.04));
    CHECK(fit.amplitude[0] == doctest::Approx(1.0 / M_PI).epsilon(0.05));

    SUBCASE("empty window throws") {
        CHECK_THROWS_AS(fit_exponent(local, 2.0, FitSide::Plus, 1e-4, 1e-2),
                        EmptyWindow);
    }
    SUBCASE("nonpositive density throws") {
        DensityProfile zero = local;
        zero.avg.setZero();
        CHECK_THROWS_AS(fit_exponent(zero, 2.0, FitSide::Minus, 0.99e-4, 1.01e-2),
                        NonPositiveDensity);
    }
}

TEST_CASE("connectivity test") {
    SUBCASE("constant kernel is connected with witness 0") {
        ConnectivityResult r =
            connectivity_test(semicircle_model(8), ConnectivityMode::Exact);
        CHECK(r.connected);
        CHECK(r.witness == doctest::Approx(0.0));
    }
    SUBCASE("block model with alpha != beta is disconnected") {
        QveModel b = block_model({3.0, 1.0, 1.0 / 3.0, 0.25}, 8);
        ConnectivityResult r = connectivity_test(b, ConnectivityMode::Exact);
        CHECK_FALSE(r.connected);
        // Cutting along the block boundary: row distance >= |alpha-beta|*delta.
        CHECK(r.witness >= (3.0 - 1.0) * 0.25 - 1e-12);
        // Prefix mode finds the same cut for the block ordering.
        ConnectivityResult rp = connectivity_test(b, ConnectivityMode::Prefix);
        CHECK(rp.witness == doctest::Approx(r.witness));
    }
    SUBCASE("sampled Holder kernel is prefix-connected") {
        const Eigen::Index n = 200;
        Eigen::VectorXd x = grid_positions(n);
        Eigen::MatrixXd s(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                s(i, j) = 1.0 + 0.5 * std::sqrt(std::abs(x[i] - x[j]));
        QveModel m = build_model(Eigen::VectorXd::Constant(n, 1.0 / n),
                                 Eigen::VectorXd::Zero(n), s);
        ConnectivityResult r = connectivity_test(m, ConnectivityMode::Prefix);
        CHECK(r.connected);
        CHECK(r.witness < 1e-2);
    }
    SUBCASE("exact mode capped at n=20") {
        CHECK_THROWS_AS(
            connectivity_test(semicircle_model(21), ConnectivityMode::Exact),
            TooLargeForExact);
    }
}

TEST_CASE("classify_support on the semicircle") {
    AnalysisOptions opts;
    opts.tau_count = 121;
    SupportAnalysis analysis = classify_support(semicircle_model(2), opts);
    REQUIRE(analysis.support.size() == 1);
    REQUIRE(analysis.reports.size() == 2);
    const SingularityReport& left = analysis.reports[0];
    const SingularityReport& right = analysis.reports[1];
    CHECK(left.kind == SingularityKind::LeftEdge);
    CHECK(right.kind == SingularityKind::RightEdge);
    CHECK(left.tau0 == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(right.tau0 == doctest::Approx(2.0).epsilon(1e-3));
    for (const SingularityReport* r : {&left, &right}) {
        CHECK(r->fitted_exponent == doctest::Approx(0.5).epsilon(0.05));
        CHECK(r->stability > 0.1);
        CHECK(r->predicted_amplitude.minCoeff() > 0.0);
        CHECK(r->fitted_amplitude.minCoeff() > 0.0);
        CHECK(r->predicted_amplitude[0] == doctest::Approx(1.0 / M_PI).epsilon(0.05));
    }
    write_singularity_json(analysis.reports, "singularities_test.json");
    CHECK(std::ifstream("singularities_test.json").good());
}
