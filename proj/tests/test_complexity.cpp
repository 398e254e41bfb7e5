#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "pic/complexity.hpp"
#include "pic/moments.hpp"
#include "pic/rng.hpp"

using namespace pic;

TEST_CASE("hoeffding count at the tabulated tolerances") {
    // ceil(ln(2 / 0.05) / (2 * 0.01^2)) = ceil(18444.397...).
    CHECK(hoeffding_samples(0.01, 0.05) == 18445);
    CHECK(hoeffding_samples(0.1, 0.05) == 185);
    CHECK(hoeffding_samples(0.05, 0.05) == 738);
}

TEST_CASE("hoeffding boundary and degenerate cases") {
    // Loose enough that the raw count drops below one and the floor kicks in.
    CHECK(hoeffding_samples(0.25, 1.9) == 1);

    // A permitted risk at or above 2 makes the bound vacuous; one sample does.
    CHECK(hoeffding_samples(0.01, 2.0) == 1);
    CHECK(hoeffding_samples(0.01, 5.0) == 1);

    CHECK_THROWS_AS(hoeffding_samples(0.0, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(hoeffding_samples(0.01, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(hoeffding_samples(1e-12, 1e-300), std::invalid_argument);
}

TEST_CASE("conservative form doubles the standard count before rounding") {
    for (double eps : {0.01, 0.05, 0.1}) {
        for (double rho : {0.01, 0.05, 0.2}) {
            const double raw = std::log(2.0 / rho) / (2.0 * eps * eps);
            CHECK(hoeffding_samples(eps, rho, HoeffdingForm::kConservative) ==
                  static_cast<std::int64_t>(std::ceil(2.0 * raw)));
        }
    }
}

TEST_CASE("chebyshev analytic count at zero expected cost") {
    // (1 + sqrt(2)) / (0.05 * 0.01) = 4828.42..., ceiled.
    const SampleCount c = chebyshev_samples_analytic(0.0, 0.1, 0.05);
    CHECK_FALSE(c.overflow);
    CHECK(c.count == 4829.0);

    // E[S]/lambda = ln 2 multiplies the requirement by exactly 4.
    const SampleCount c4 = chebyshev_samples_analytic(std::log(2.0), 0.1, 0.05);
    CHECK(c4.count == std::ceil(4.0 * 2.4142135623730951 / (0.05 * 0.01)));
}

TEST_CASE("chebyshev analytic count overflows past the cap") {
    const SampleCount c = chebyshev_samples_analytic(350.0, 0.1, 0.05);
    CHECK(c.overflow);
    CHECK(std::isinf(c.count));
    // log10 stays meaningful: 2 * 350 / ln 10 + log10((1+sqrt 2)/(0.05 * 0.01)).
    const double expected_log10 =
        (std::log1p(std::sqrt(2.0)) + 700.0 - std::log(0.05 * 0.01)) / std::log(10.0);
    CHECK(c.log10 == doctest::Approx(expected_log10).epsilon(1e-12));

    // A raised cap turns the same query into a huge finite count.
    const SampleCount wide = chebyshev_samples_analytic(350.0, 0.1, 0.05, 320.0);
    CHECK_FALSE(wide.overflow);
    CHECK(wide.count == doctest::Approx(std::exp(std::log1p(std::sqrt(2.0)) + 700.0 -
                                                 std::log(0.05 * 0.01))).epsilon(1e-12));
}

TEST_CASE("chebyshev count never drops below one sample") {
    const SampleCount c = chebyshev_samples_analytic(0.0, 10.0, 0.9);
    CHECK(c.count == 1.0);
}

TEST_CASE("chebyshev empirical count uses the pilot floor") {
    // Floor (1 - 0.01)^2: (1 + sqrt 2) / (0.05 * 0.01 * 0.9801) = 4926.46...
    const SampleCount c = chebyshev_samples_empirical(1.0, 0.01, 0.1, 0.05);
    CHECK_FALSE(c.overflow);
    CHECK(c.count == 4927.0);

    // Smaller pilot mean raises the count by the inverse square of the floor.
    const SampleCount half = chebyshev_samples_empirical(0.51, 0.01, 0.1, 0.05);
    CHECK(half.count ==
          std::ceil(2.4142135623730951 / (0.05 * 0.01 * 0.25)));
}

TEST_CASE("chebyshev empirical rejects a pilot mean inside the tolerance") {
    CHECK_THROWS_AS(chebyshev_samples_empirical(0.01, 0.01, 0.1, 0.05), AssumptionError);
    CHECK_THROWS_AS(chebyshev_samples_empirical(0.005, 0.01, 0.1, 0.05), AssumptionError);
    CHECK_THROWS_AS(chebyshev_samples_empirical(0.0, 0.0, 0.1, 0.05), AssumptionError);
}

TEST_CASE("sample counts are monotone in the problem difficulty") {
    double prev = 0.0;
    for (double esol : {0.0, 0.5, 1.0, 2.0, 5.0, 50.0}) {
        const SampleCount c = chebyshev_samples_analytic(esol, 0.1, 0.05);
        CHECK(c.log10 > prev - 1e-12);
        prev = c.log10;
    }
    CHECK(chebyshev_samples_analytic(1.0, 0.05, 0.05).count >
          chebyshev_samples_analytic(1.0, 0.1, 0.05).count);
    CHECK(chebyshev_samples_analytic(1.0, 0.1, 0.01).count >
          chebyshev_samples_analytic(1.0, 0.1, 0.05).count);
    CHECK(chebyshev_samples_empirical(0.4, 0.01, 0.1, 0.05).count >
          chebyshev_samples_empirical(0.6, 0.01, 0.1, 0.05).count);
}

TEST_CASE("control error bounds form the product interval") {
    const Interval i = control_error_bounds(0.0, 0.1, 0.1, 0.5);
    CHECK(i.lo == doctest::Approx(-0.12).epsilon(1e-12));
    CHECK(i.hi == doctest::Approx(0.12).epsilon(1e-12));

    // Exact weight mean and no noise tolerance collapse to the point.
    const Interval exact = control_error_bounds(0.7, 0.0, 0.0, 0.5);
    CHECK(exact.lo == doctest::Approx(0.7));
    CHECK(exact.hi == doctest::Approx(0.7));

    // One-sided widening from the weight mean alone.
    const Interval w = control_error_bounds(1.0, 0.0055, 0.0, 0.5);
    CHECK(w.lo == doctest::Approx(0.989).epsilon(1e-12));
    CHECK(w.hi == doctest::Approx(1.011).epsilon(1e-12));

    // Negative control flips which factor attains the envelope.
    const Interval neg = control_error_bounds(-1.0, 0.1, 0.0, 0.5);
    CHECK(neg.lo == doctest::Approx(-1.2).epsilon(1e-12));
    CHECK(neg.hi == doctest::Approx(-0.8).epsilon(1e-12));

    CHECK_THROWS_AS(control_error_bounds(0.0, 0.5, 0.1, 0.5), AssumptionError);
    CHECK_THROWS_AS(control_error_bounds(0.0, 0.1, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(control_error_bounds(0.0, 0.1, 0.1, 1.5), std::invalid_argument);
}

TEST_CASE("control error bounds always contain the nominal estimate") {
    for (std::uint64_t k = 0; k < 200; ++k) {
        const auto z = normal_pair(808, k, 0, 0);
        const double u = 2.0 * z[0];
        const auto w = philox::block(809, k, 0, 0);
        const double e_w = 0.05 + 0.9 * uniform_open(w[0], w[1]);
        const double eps1 = 0.5 * e_w;
        const double eps2 = std::abs(z[1]);
        const Interval i = control_error_bounds(u, eps1, eps2, e_w);
        CHECK(i.lo <= u + 1e-12);
        CHECK(i.hi >= u - 1e-12);
        CHECK(i.lo <= i.hi);
    }
}

TEST_CASE("weight variance bound is the bernoulli envelope") {
    CHECK(var_w_bound(0.5) == doctest::Approx(0.25));
    CHECK(var_w_bound(1.0) == doctest::Approx(0.0));
    CHECK(var_w_bound(0.1) == doctest::Approx(0.09));
    CHECK_THROWS_AS(var_w_bound(0.0), std::invalid_argument);
    CHECK_THROWS_AS(var_w_bound(1.5), std::invalid_argument);
}

TEST_CASE("variance upper bound in and beyond floating range") {
    const VarianceBound v0 = variance_upper_bound(0.0);
    CHECK(v0.value == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-15));

    const VarianceBound v1 = variance_upper_bound(1.0);
    CHECK(v1.value == doctest::Approx((1.0 + std::sqrt(2.0)) * std::exp(2.0)).epsilon(1e-14));

    const VarianceBound big = variance_upper_bound(400.0);
    CHECK(big.overflow);
    CHECK(std::isinf(big.value));
    CHECK(big.log10 == doctest::Approx((std::log1p(std::sqrt(2.0)) + 800.0) / std::log(10.0)));
}

TEST_CASE("product variance bound") {
    // Standard normal y: Var(y^2) = 2, E[y^2] = 1.
    CHECK(var_product_bound(1.0, 2.0, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0) + 1.0));
    CHECK(var_product_bound(0.0, 2.0, 0.25, 1.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(var_product_bound(-1.0, 2.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("covariance growth bound is tight for identity dynamics") {
    LtvModel m;
    m.A = {Eigen::MatrixXd::Identity(2, 2)};
    m.B = {Eigen::MatrixXd::Identity(2, 2)};
    for (int t = 1; t <= 10; ++t)
        CHECK(covariance_growth_lower_bound(m, t) == doctest::Approx(double(t)).epsilon(1e-12));
}

TEST_CASE("covariance growth bound input validation") {
    LtvModel ti;
    ti.A = {Eigen::MatrixXd::Identity(2, 2)};
    ti.B = {Eigen::MatrixXd::Identity(2, 2)};
    CHECK_THROWS_AS(covariance_growth_lower_bound(ti, 0), std::invalid_argument);

    LtvModel tv;
    tv.A = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
    tv.B = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
    CHECK(covariance_growth_lower_bound(tv, 2) == doctest::Approx(2.0));
    CHECK_THROWS_AS(covariance_growth_lower_bound(tv, 3), std::invalid_argument);
}

TEST_CASE("covariance growth bound matches the scalar geometric series") {
    LtvModel m;
    m.A = {1.5 * Eigen::MatrixXd::Identity(2, 2)};
    m.B = {Eigen::MatrixXd::Identity(2, 2)};
    for (int t = 1; t <= 12; ++t) {
        const double expected = (std::pow(2.25, t) - 1.0) / 1.25;
        CHECK(covariance_growth_lower_bound(m, t) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("covariance growth bound never exceeds the true covariance norm") {
    for (std::uint64_t k = 0; k < 100; ++k) {
        Eigen::MatrixXd A(2, 2), B(2, 2);
        int s = 0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                const auto z = normal_pair(4041, k, static_cast<std::uint32_t>(s++), 0);
                A(r, c) = 0.8 * z[0];
                B(r, c) = z[1];
            }
        LtvModel m{{A}, {B}};
        const ControlSequence u(8, Eigen::VectorXd::Zero(2));
        const BeliefTrajectory traj = propagate_moments(m, u, Eigen::VectorXd::Zero(2));
        for (int t = 1; t <= 8; ++t) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(
                traj.beliefs[static_cast<std::size_t>(t)].cov);
            const double norm = es.eigenvalues().maxCoeff();
            CHECK(covariance_growth_lower_bound(m, t) <= norm + 1e-9);
        }
    }
}

TEST_CASE("minimum expected cost bound floors the quadratic expectation") {
    Eigen::MatrixXd Q = Eigen::Vector2d(2.0, 3.0).asDiagonal();
    Eigen::MatrixXd P = Eigen::Vector2d(0.5, 4.0).asDiagonal();
    CHECK(min_expected_cost_bound(Q, P) == doctest::Approx(1.0));

    for (std::uint64_t k = 0; k < 50; ++k) {
        Eigen::MatrixXd M(3, 3), N(3, 3);
        int s = 0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                const auto z = normal_pair(6001, k, static_cast<std::uint32_t>(s++), 0);
                M(r, c) = z[0];
                N(r, c) = z[1];
            }
        const Eigen::MatrixXd Qk = M.transpose() * M + 0.05 * Eigen::MatrixXd::Identity(3, 3);
        const Eigen::MatrixXd Pk = N.transpose() * N;
        // E = trace(Q P) + d^T Q d >= lambda_min(Q) lambda_min(P) for any offset.
        const double expectation = (Qk * Pk).trace();
        CHECK(min_expected_cost_bound(Qk, Pk) <= expectation + 1e-10);
    }
    CHECK_THROWS_AS(min_expected_cost_bound(Eigen::MatrixXd::Zero(2, 2),
                                            Eigen::MatrixXd::Identity(2, 2)),
                    std::invalid_argument);
}

TEST_CASE("unstable growth curve follows sigma times the squared eigenvalue power") {
    const Eigen::MatrixXd A = 1.5 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2, 2);

    const auto curve = unstable_growth_curve(A, B, Q, 15);
    REQUIRE(curve.size() == 15);
    const double sigma = 1.0 / 2.25;
    for (int t = 1; t <= 15; ++t) {
        CHECK(curve[static_cast<std::size_t>(t - 1)] ==
              doctest::Approx(sigma * std::pow(2.25, t)).epsilon(1e-12));
        if (t > 1) CHECK(curve[static_cast<std::size_t>(t - 1)] >
                         curve[static_cast<std::size_t>(t - 2)]);
    }
}

TEST_CASE("unstable growth curve rejects stable or degenerate systems") {
    const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(unstable_growth_curve(I2, I2, I2, 5), std::invalid_argument);
    CHECK_THROWS_AS(unstable_growth_curve(0.5 * I2, I2, I2, 5), std::invalid_argument);
    CHECK_THROWS_AS(unstable_growth_curve(1.5 * I2, Eigen::MatrixXd::Zero(2, 2), I2, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(unstable_growth_curve(1.5 * I2, I2, Eigen::MatrixXd::Zero(2, 2), 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(unstable_growth_curve(1.5 * I2, I2, I2, 0), std::invalid_argument);
}

TEST_CASE("analytic report wires counts, multiplier and assumption flag") {
    ComplexityQuery q;
    q.eps1 = 0.01;
    q.eps2 = 0.1;
    q.rho1 = 0.05;
    q.rho2 = 0.05;

    const ComplexityReport r = analyze_analytic(q, 20.0, 10.0);
    CHECK(r.mode == ComplexityMode::kAnalytic);
    CHECK(r.n1 == 18445);
    CHECK(r.n2.count == chebyshev_samples_analytic(2.0, 0.1, 0.05).count);
    CHECK(r.multiplier.count == doctest::Approx(0.01 * std::exp(2.0)).epsilon(1e-13));
    // eps1 = 0.01 < exp(-2) = 0.135: the tolerance fits under the Jensen floor.
    CHECK_FALSE(r.assumption_flag);

    const ComplexityReport tight = analyze_analytic(q, 50.0, 10.0);
    CHECK(tight.assumption_flag);  // exp(-5) = 0.0067 < eps1

    const ComplexityReport far = analyze_analytic(q, 8000.0, 10.0);
    CHECK(far.n2.overflow);
    CHECK(far.multiplier.overflow);
    CHECK(std::isinf(far.multiplier.count));
}

TEST_CASE("empirical report survives a failed pilot assumption") {
    ComplexityQuery q;
    q.eps1 = 0.01;
    q.eps2 = 0.1;
    q.rho1 = 0.05;
    q.rho2 = 0.05;
    q.mode = ComplexityMode::kEmpirical;

    const ComplexityReport ok = analyze_empirical(q, 0.6);
    CHECK(ok.n2_valid);
    CHECK_FALSE(ok.assumption_flag);
    CHECK(ok.n2.count == chebyshev_samples_empirical(0.6, 0.01, 0.1, 0.05).count);
    CHECK(ok.multiplier.count == doctest::Approx(0.01 / 0.6).epsilon(1e-14));

    const ComplexityReport bad = analyze_empirical(q, 0.005);
    CHECK_FALSE(bad.n2_valid);
    CHECK(bad.assumption_flag);
    CHECK(bad.n1 == 18445);  // the Hoeffding side is unaffected

    const ComplexityReport sunk = analyze_empirical(q, 0.0);
    CHECK(sunk.multiplier.overflow);
}
