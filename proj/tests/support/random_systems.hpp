#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "oscdamp/analysis.hpp"

namespace testsupport {

// Random lossless network: 3 to 8 ordinary buses (generator terminals and
// loads), 2 to 4 generators each with its own internal bus, a spanning tree
// plus a few extra lines.  Per-unit magnitudes follow a transmission grid on
// a 100 MVA base (bus loads of a few hundred MW, line reactance ~0.01 pu),
// the same regime as NE-39.  Not guaranteed to have a power-flow solution.
oscdamp::Network random_network(std::mt19937_64& rng, int min_buses = 3, int max_buses = 8);

// First network drawn from this seed whose base case solves and whose
// oscillatory modes are all simple.  Band is [0, inf) so every mode counts.
oscdamp::Analysis random_analysis(std::uint64_t seed, int min_buses = 3, int max_buses = 8);

// Eigenvalues of the first-order descriptor form
//   E z' = A z,  z = (delta_dyn, omega, delta_alg, V),  E = diag(I, M, 0, 0),
// built from the raw power-flow Jacobian (reactive rows not rescaled).
// Finite eigenvalues only.
Eigen::VectorXcd descriptor_eigenvalues(const oscdamp::Network& net, const oscdamp::OperatingPoint& op);

std::string data_path(const std::string& name);

} // namespace testsupport
