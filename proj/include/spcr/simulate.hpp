#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spcr/family.hpp"

namespace spcr {

enum class SimCase { case1, case2, case3, case4, illustrative };

struct SimTruth {
    Eigen::VectorXd zeta_star;  // composite coefficients on the original variables
    Eigen::VectorXd xi1, xi2;   // sparse direction vectors (xi2 empty for single-direction cases)
    std::vector<int> labels;    // illustrative: mixture component per row
    Eigen::VectorXd nu1, nu2;   // illustrative: the two signal eigendirections
};

struct SimData {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Family family;
    SimTruth truth;
};

/// AR(1)-style covariance: entry (i, j) = rho^|i-j|.
Eigen::MatrixXd ar_covariance(double rho, int d);

/// Seeded benchmark generators. Draw order per row: the p standard
/// normals behind x (transformed by the lower Cholesky factor of the
/// block covariance), then, after all rows, one response draw per row.
/// Bit-identical for a fixed (case, n, seed).
SimData gen_case(SimCase c, int n, std::uint64_t seed);

/// Binary-response mixture example: two cluster coordinates plus an
/// 8-dimensional correlated noise block. Draw order per row: mixture
/// label, the 2 cluster normals, the 8 noise normals; responses follow
/// after all rows.
SimData gen_illustrative(int n, std::uint64_t seed);

SimCase parse_sim_case(std::string_view name);
std::string to_string(SimCase c);

} // namespace spcr
