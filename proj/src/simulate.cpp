#include "spcr/simulate.hpp"

#include <cmath>

#include "spcr/errors.hpp"
#include "spcr/rng.hpp"

namespace spcr {

namespace {

const double kNu1[9] = {-1, 0, 1, 1, 0, -1, -1, 0, 1};
const double kNu2[6] = {1, 0, -1, -1, 0, 1};

// Arrival-counting Poisson sampler: counts Exp(1) gaps until they exceed
// lambda. Stays exact for any lambda a double can hold.
double poisson_draw(SplitMix64& rng, double lambda) {
    double acc = 0.0;
    double count = -1.0;
    while (acc <= lambda) {
        acc += std::max(-std::log(rng.next_double()), 1e-300);
        count += 1.0;
    }
    return count;
}

double bernoulli_logit_draw(SplitMix64& rng, double kappa) {
    const double prob = 1.0 / (1.0 + std::exp(-kappa));
    return rng.next_double() < prob ? 1.0 : 0.0;
}

// Rows are drawn as independent standard normal vectors and transformed by
// the lower Cholesky factors of the leading blocks (the trailing identity
// block needs no transform).
Eigen::MatrixXd draw_block_normal(SplitMix64& rng, int n, int p,
                                  const std::vector<Eigen::MatrixXd>& chol_blocks) {
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < p; ++c) z(c) = rng.next_normal();
        int offset = 0;
        for (const auto& L : chol_blocks) {
            const int d = static_cast<int>(L.rows());
            z.segment(offset, d) = L * z.segment(offset, d).eval();
            offset += d;
        }
        X.row(i) = z;
    }
    return X;
}

} // namespace

Eigen::MatrixXd ar_covariance(double rho, int d) {
    if (!(rho > 0.0 && rho < 1.0)) throw InputError("ar_covariance: rho must be in (0,1)");
    Eigen::MatrixXd S(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) S(i, j) = std::pow(rho, std::abs(i - j));
    return S;
}

SimData gen_case(SimCase c, int n, std::uint64_t seed) {
    if (n < 1) throw InputError("gen_case: n must be >= 1");
    if (c == SimCase::illustrative) return gen_illustrative(n, seed);

    const bool two_blocks = (c == SimCase::case2 || c == SimCase::case4);
    const bool binary = (c == SimCase::case1 || c == SimCase::case2);
    const int p = two_blocks ? 30 : 20;

    const Eigen::MatrixXd L9 = ar_covariance(0.9, 9).llt().matrixL();
    std::vector<Eigen::MatrixXd> blocks{L9};
    if (two_blocks) blocks.push_back(ar_covariance(0.9, 6).llt().matrixL());

    SplitMix64 rng(seed);
    SimData out;
    out.X = draw_block_normal(rng, n, p, blocks);

    out.truth.xi1 = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < 9; ++i) out.truth.xi1(i) = kNu1[i];
    if (two_blocks) {
        out.truth.xi2 = Eigen::VectorXd::Zero(p);
        for (int i = 0; i < 6; ++i) out.truth.xi2(9 + i) = kNu2[i];
    }

    Eigen::VectorXd kappa;
    switch (c) {
    case SimCase::case1:
        kappa = 4.0 * out.X * out.truth.xi1;
        out.truth.zeta_star = 4.0 * out.truth.xi1;
        break;
    case SimCase::case2:
        kappa = 2.0 * out.X * out.truth.xi1 + 2.0 * out.X * out.truth.xi2;
        out.truth.zeta_star = 2.0 * out.truth.xi1 + 2.0 * out.truth.xi2;
        break;
    case SimCase::case3:
        kappa = 0.8 * out.X * out.truth.xi1;
        out.truth.zeta_star = 0.8 * out.truth.xi1;
        break;
    case SimCase::case4:
        kappa = 0.5 * out.X * out.truth.xi1 + 0.5 * out.X * out.truth.xi2;
        out.truth.zeta_star = 0.5 * out.truth.xi1 + 0.5 * out.truth.xi2;
        break;
    default:
        throw InputError("gen_case: unknown case");
    }

    out.y.resize(n);
    if (binary) {
        out.family = Family::binomial();
        for (int i = 0; i < n; ++i) out.y(i) = bernoulli_logit_draw(rng, kappa(i));
    } else {
        out.family = Family::poisson();
        for (int i = 0; i < n; ++i) out.y(i) = poisson_draw(rng, std::exp(kappa(i)));
    }
    return out;
}

SimData gen_illustrative(int n, std::uint64_t seed) {
    if (n < 8) throw InputError("gen_illustrative: n must be >= 8");
    const int p = 10;
    const double centers[4][2] = {{2, 2}, {-2, 2}, {-2, -2}, {2, -2}};
    const Eigen::MatrixXd L8 = ar_covariance(0.8, 8).llt().matrixL();

    SplitMix64 rng(seed);
    SimData out;
    out.X.resize(n, p);
    out.truth.labels.resize(n);
    Eigen::VectorXd z(8);
    for (int i = 0; i < n; ++i) {
        const int lab = static_cast<int>(rng.next_below(4));
        out.truth.labels[i] = lab;
        // the cluster covariance is isotropic, so its eigenbasis is taken
        // as the identity and the cluster pair maps straight onto the
        // first two coordinates
        out.X(i, 0) = centers[lab][0] + 0.5 * rng.next_normal();
        out.X(i, 1) = centers[lab][1] + 0.5 * rng.next_normal();
        for (int c = 0; c < 8; ++c) z(c) = rng.next_normal();
        out.X.row(i).segment(2, 8) = L8 * z;
    }

    out.truth.nu1 = Eigen::VectorXd::Zero(p);
    out.truth.nu1(1) = 1.0;
    out.truth.nu2 = Eigen::VectorXd::Zero(p);
    out.truth.nu2(0) = 1.0;
    out.truth.zeta_star = out.truth.nu1 + out.truth.nu2;

    out.family = Family::binomial();
    out.y.resize(n);
    const Eigen::VectorXd kappa = out.X * out.truth.zeta_star;
    for (int i = 0; i < n; ++i) out.y(i) = bernoulli_logit_draw(rng, kappa(i));
    return out;
}

SimCase parse_sim_case(std::string_view name) {
    if (name == "case1") return SimCase::case1;
    if (name == "case2") return SimCase::case2;
    if (name == "case3") return SimCase::case3;
    if (name == "case4") return SimCase::case4;
    if (name == "illustrative") return SimCase::illustrative;
    throw InputError("unknown simulation case: " + std::string(name));
}

std::string to_string(SimCase c) {
    switch (c) {
    case SimCase::case1: return "case1";
    case SimCase::case2: return "case2";
    case SimCase::case3: return "case3";
    case SimCase::case4: return "case4";
    case SimCase::illustrative: return "illustrative";
    }
    return "?";
}

} // namespace spcr
