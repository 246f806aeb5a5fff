#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spcr/simulate.hpp"

using namespace spcr;

TEST_CASE("ar covariance") {
    const Eigen::MatrixXd S = ar_covariance(0.9, 9);
    CHECK(S(0, 1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(S(2, 5) == doctest::Approx(std::pow(0.9, 3)).epsilon(1e-15));
    for (int i = 0; i < 9; ++i) CHECK(S(i, i) == 1.0);
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ar_covariance(0.8, 8));
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    CHECK_THROWS_AS(ar_covariance(1.0, 4), InputError);
}

TEST_CASE("case generators are bit-identical under a fixed seed") {
    for (SimCase c : {SimCase::case1, SimCase::case2, SimCase::case3, SimCase::case4}) {
        const SimData a = gen_case(c, 50, 1234);
        const SimData b = gen_case(c, 50, 1234);
        CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
        const SimData other = gen_case(c, 50, 1235);
        CHECK((a.X - other.X).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("case shapes, families and truth supports") {
    const SimData c1 = gen_case(SimCase::case1, 20, 1);
    CHECK(c1.X.cols() == 20);
    CHECK(c1.family.kind == FamilyKind::binomial);
    const SimData c2 = gen_case(SimCase::case2, 20, 1);
    CHECK(c2.X.cols() == 30);
    CHECK(c2.family.kind == FamilyKind::binomial);
    const SimData c3 = gen_case(SimCase::case3, 20, 1);
    CHECK(c3.X.cols() == 20);
    CHECK(c3.family.kind == FamilyKind::poisson);
    const SimData c4 = gen_case(SimCase::case4, 20, 1);
    CHECK(c4.X.cols() == 30);
    CHECK(c4.family.kind == FamilyKind::poisson);

    // the two sparse directions live on disjoint blocks
    for (int l = 0; l < 30; ++l)
        CHECK(c2.truth.xi1(l) * c2.truth.xi2(l) == 0.0);
    // the sparse directions are fixed sign patterns on the leading blocks
    Eigen::VectorXd nu1(9), nu2(6);
    nu1 << -1, 0, 1, 1, 0, -1, -1, 0, 1;
    nu2 << 1, 0, -1, -1, 0, 1;
    CHECK((c1.truth.xi1.head(9) - nu1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((c2.truth.xi2.segment(9, 6) - nu2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((c1.truth.zeta_star - 4.0 * c1.truth.xi1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c1.truth.zeta_star.tail(11).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c3.truth.zeta_star.head(9).cwiseAbs().maxCoeff() == doctest::Approx(0.8));
    CHECK((c1.truth.zeta_star.array() != 0.0).count() == 6);
    CHECK((c2.truth.zeta_star.array() != 0.0).count() == 10);

    CHECK_THROWS_AS(gen_case(SimCase::case1, 0, 1), InputError);
}

TEST_CASE("binary cases are symmetric around one half") {
    const SimData d = gen_case(SimCase::case1, 100000, 77);
    CHECK(d.y.mean() == doctest::Approx(0.5).epsilon(0.1)); // [0.45, 0.55]
    CHECK(d.y.mean() >= 0.45);
    CHECK(d.y.mean() <= 0.55);
}

TEST_CASE("correlated block matches its population covariance") {
    const SimData d = gen_case(SimCase::case3, 100000, 33);
    const Eigen::VectorXd c0 = d.X.col(0).array() - d.X.col(0).mean();
    const Eigen::VectorXd c1 = d.X.col(1).array() - d.X.col(1).mean();
    const double cov = c0.dot(c1) / (d.X.rows() - 1);
    CHECK(cov >= 0.88);
    CHECK(cov <= 0.92);
}

TEST_CASE("counts are non-negative integers") {
    const SimData d = gen_case(SimCase::case3, 2000, 5);
    for (int i = 0; i < 2000; ++i) {
        CHECK(d.y(i) >= 0.0);
        CHECK(d.y(i) == std::floor(d.y(i)));
    }
    CHECK(d.y.maxCoeff() > 1.0); // not degenerate
}

TEST_CASE("unknown case name is rejected") {
    CHECK_THROWS_AS(parse_sim_case("case9"), InputError);
    CHECK(parse_sim_case("case2") == SimCase::case2);
    CHECK(to_string(SimCase::case4) == "case4");
    CHECK(parse_sim_case("illustrative") == SimCase::illustrative);
}

TEST_CASE("illustrative generator") {
    SUBCASE("signal identity and reproducibility") {
        const SimData d = gen_illustrative(300, 11);
        REQUIRE(d.X.cols() == 10);
        REQUIRE(static_cast<int>(d.truth.labels.size()) == 300);
        // (nu2' x, nu1' x) recovers the cluster pair coordinates
        for (int i = 0; i < 300; ++i) {
            const double u1 = d.truth.nu2.dot(d.X.row(i));
            const double u2 = d.truth.nu1.dot(d.X.row(i));
            CHECK(std::abs(u1 - d.X(i, 0)) <= 1e-10);
            CHECK(std::abs(u2 - d.X(i, 1)) <= 1e-10);
        }
        const SimData e = gen_illustrative(300, 11);
        CHECK((d.X - e.X).cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.truth.labels == e.truth.labels);
    }
    SUBCASE("cluster means sit near the four centers") {
        const SimData d = gen_illustrative(10000, 21);
        const double centers[4][2] = {{2, 2}, {-2, 2}, {-2, -2}, {2, -2}};
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(4, 2);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
        for (int i = 0; i < 10000; ++i) {
            sums.row(d.truth.labels[i]) += d.X.row(i).head(2);
            counts(d.truth.labels[i]) += 1.0;
        }
        for (int c = 0; c < 4; ++c) {
            CHECK(std::abs(sums(c, 0) / counts(c) - centers[c][0]) <= 0.05);
            CHECK(std::abs(sums(c, 1) / counts(c) - centers[c][1]) <= 0.05);
        }
    }
    SUBCASE("rejects tiny samples") {
        CHECK_THROWS_AS(gen_illustrative(4, 1), InputError);
    }
}

TEST_CASE("sparse truth approximates the fourth eigenvector at scale") {
    const SimData d = gen_case(SimCase::case1, 1000000, 99);
    // sample covariance of the correlated block
    const Eigen::MatrixXd block = d.X.leftCols(9);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    const Eigen::MatrixXd C =
        (block.rowwise() - mean).transpose() * (block.rowwise() - mean) /
        static_cast<double>(block.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    // eigenvalues ascend; the fourth largest sits at index 5 of 9
    Eigen::VectorXd v4 = eig.eigenvectors().col(5);
    Eigen::VectorXd target = d.truth.xi1.head(9);
    target.normalize();
    if (v4.dot(target) < 0.0) v4 = -v4;
    CHECK((v4 - target).norm() <= 0.15);
}
