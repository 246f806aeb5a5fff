#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spcr/family.hpp"
#include "spcr/rng.hpp"

#include "support.hpp"

using namespace spcr;

TEST_CASE("cumulant values at reference points") {
    const Family bin = Family::binomial();
    const Family poi = Family::poisson();

    const CumulantEval b0 = family_eval(bin, 0.0);
    CHECK(b0.u == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(b0.du == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b0.d2u == doctest::Approx(0.25).epsilon(1e-14));

    const CumulantEval p0 = family_eval(poi, 0.0);
    CHECK(p0.u == doctest::Approx(1.0));
    CHECK(p0.du == doctest::Approx(1.0));
    CHECK(p0.d2u == doctest::Approx(1.0));

    // 1/(1+e^-2), 50-digit reference 0.88079707797788244405972914130239679...
    const CumulantEval b2 = family_eval(bin, 2.0);
    CHECK(b2.du == doctest::Approx(0.88079707797788244406).epsilon(1e-15));
}

TEST_CASE("binomial cumulant stays finite over the wide predictor range") {
    const Family bin = Family::binomial();
    for (double kap : {-700.0, -100.0, -35.0, 35.0, 100.0, 700.0}) {
        const CumulantEval e = family_eval(bin, kap);
        CHECK(std::isfinite(e.u));
        CHECK(std::isfinite(e.du));
        CHECK(std::isfinite(e.d2u));
        CHECK(e.d2u >= 0.0);
    }
    CHECK(family_eval(bin, 700.0).u == doctest::Approx(700.0));
}

TEST_CASE("family_eval rejects non-finite input") {
    CHECK_THROWS_AS(family_eval(Family::binomial(), std::nan("")), std::domain_error);
    CHECK_THROWS_AS(family_eval(Family::poisson(),
                                std::numeric_limits<double>::infinity()),
                    std::domain_error);
}

TEST_CASE("log likelihood reference values") {
    CHECK(log_likelihood(Family::binomial(), 1.0, 0.0) ==
          doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    CHECK(log_likelihood(Family::poisson(), 0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));
    // y=3, kappa=1: 3 - e - log 6 = -1.51004129768710023617...
    CHECK(log_likelihood(Family::poisson(), 3.0, 1.0) ==
          doctest::Approx(-1.5100412976871002362).epsilon(1e-14));
    CHECK(log_likelihood(Family::poisson(), 3.0, 1.0) ==
          doctest::Approx(3.0 - std::exp(1.0) - std::log(6.0)).epsilon(1e-14));
}

TEST_CASE("log likelihood validates the response") {
    CHECK_THROWS_AS(log_likelihood(Family::binomial(), 0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(log_likelihood(Family::binomial(), 2.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(log_likelihood(Family::poisson(), -1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(log_likelihood(Family::poisson(), 2.5, 0.0), std::domain_error);
    CHECK_NOTHROW(log_likelihood(Family::gaussian(), -3.7, 0.0));
}

TEST_CASE("gaussian log likelihood matches the density formula") {
    const Family g = Family::gaussian(2.5);
    const double y = 1.3, kap = -0.4;
    const double expect = -(y - kap) * (y - kap) / (2.0 * 2.5) - 0.5 * std::log(2.0 * M_PI * 2.5);
    CHECK(log_likelihood(g, y, kap) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("working quantities at reference points") {
    const WorkingPoint bin = working_quantities(Family::binomial(), 1.0, 0.0);
    CHECK(bin.omega == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(bin.z == doctest::Approx(2.0).epsilon(1e-14));

    const WorkingPoint poi = working_quantities(Family::poisson(), 2.0, 0.0);
    CHECK(poi.omega == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(poi.z == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gaussian working quantities are exactly (1/(2 phi), y)") {
    SplitMix64 rng(7);
    for (double phi : {1.0, 0.5, 3.0}) {
        const Family g = Family::gaussian(phi);
        for (int i = 0; i < 200; ++i) {
            const double kap = 10.0 * rng.next_normal();
            const double y = 10.0 * rng.next_normal();
            const WorkingPoint wp = working_quantities(g, y, kap);
            CHECK(wp.omega == 1.0 / (2.0 * phi));
            CHECK(wp.z == y);
        }
    }
}

TEST_CASE("weight floor keeps omega positive at saturation") {
    const WorkingPoint wp = working_quantities(Family::binomial(), 0.0, 40.0);
    CHECK(wp.omega == kOmegaMin);
    CHECK(std::isfinite(wp.z));
}

TEST_CASE("poisson working quantities clip the predictor") {
    const WorkingPoint a = working_quantities(Family::poisson(), 1.0, 500.0);
    const WorkingPoint b = working_quantities(Family::poisson(), 1.0, kPoissonPredictorClip);
    CHECK(a.omega == b.omega);
    CHECK(a.z == b.z);
    CHECK(std::isfinite(a.z));
}

TEST_CASE("finite differences confirm the cumulant derivatives") {
    const double h = 1e-5;
    SplitMix64 rng(42);
    for (const Family& fam :
         {Family::gaussian(), Family::binomial(), Family::poisson(),
          Family::multiclass(3)}) {
        for (int i = 0; i < 1000; ++i) {
            const double kap = -10.0 + 20.0 * rng.next_double();
            const double fd1 =
                (family_eval(fam, kap + h).u - family_eval(fam, kap - h).u) / (2.0 * h);
            const double fd2 =
                (family_eval(fam, kap + h).du - family_eval(fam, kap - h).du) / (2.0 * h);
            const CumulantEval e = family_eval(fam, kap);
            CHECK(std::abs(e.du - fd1) <= 1e-6);
            CHECK(std::abs(e.d2u - fd2) <= 1e-6);
        }
    }
}

TEST_CASE("mean function is strictly increasing (u'' > 0)") {
    for (const Family& fam : {Family::gaussian(), Family::binomial(), Family::poisson()}) {
        double prev = family_eval(fam, -10.0).du;
        for (int i = 1; i <= 100; ++i) {
            const double cur = family_eval(fam, -10.0 + 0.2 * i).du;
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("multiclass probabilities") {
    const int p = 4, k = 2, G = 3;
    Eigen::VectorXd g0 = Eigen::VectorXd::Zero(G);
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(k, G);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, k);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);

    SUBCASE("uniform at zero parameters") {
        const Eigen::VectorXd pr = multiclass_probabilities(g0, Gamma, B, x);
        for (int g = 0; g < G; ++g) CHECK(pr(g) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(pr.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("shift invariance") {
        SplitMix64 rng(3);
        g0 = Eigen::VectorXd::NullaryExpr(G, [&](Eigen::Index) { return rng.next_normal(); });
        Gamma = testsupport::random_matrix(rng, k, G);
        B = testsupport::random_matrix(rng, p, k);
        x = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return rng.next_normal(); });
        const Eigen::VectorXd base = multiclass_probabilities(g0, Gamma, B, x);
        const Eigen::VectorXd shifted =
            multiclass_probabilities((g0.array() + 123.456).matrix(), Gamma, B, x);
        CHECK((base - shifted).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("two classes reduce to the logistic mean") {
        SplitMix64 rng(5);
        Eigen::VectorXd g0b(2);
        g0b << 0.7, -0.7;
        Eigen::MatrixXd Gam(k, 2);
        Gam << 0.4, -0.4, -1.1, 1.1;
        Eigen::MatrixXd Bb = testsupport::random_matrix(rng, p, k);
        Eigen::VectorXd xb = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) {
            return rng.next_normal();
        });
        const Eigen::VectorXd pr = multiclass_probabilities(g0b, Gam, Bb, xb);
        // antisymmetric parameters: class-1 probability equals the logistic
        // mean at the class-1 vs class-2 predictor gap / 2 ... directly at
        // kappa_1 - kappa_2 over the softmax pair
        const double kap1 = g0b(0) + Gam.col(0).dot(Bb.transpose() * xb);
        const double kap2 = g0b(1) + Gam.col(1).dot(Bb.transpose() * xb);
        const double logistic = family_eval(Family::binomial(), kap1 - kap2).du;
        CHECK(pr(0) == doctest::Approx(logistic).epsilon(1e-10));
    }
}
