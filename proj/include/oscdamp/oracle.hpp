#pragma once

#include <vector>

#include <Eigen/Dense>

#include "oscdamp/modal.hpp"
#include "oscdamp/powerflow.hpp"
#include "oscdamp/sensitivity.hpp"

namespace oscdamp {

struct TrackedEigenvalue {
    cplx lambda;
    OperatingPoint op;
    int substeps = 0;
};

struct TrackingOptions {
    double min_step = 1.0 / 4096.0;   // fraction of the full redispatch
};

// Exact eigenvalue after applying dP to the dispatch of base.  The redispatch
// is applied in adaptive sub-steps; at each one the nearest eigenvalue is
// accepted only if it moved less than half the gap to the next eigenvalue of
// the previous spectrum.
TrackedEigenvalue track_eigenvalue(const Network& net, const OperatingPoint& base, cplx lambda,
                                   const Eigen::VectorXd& dP, const TrackingOptions& opt = {});

cplx exact_eigenvalue_after(const Network& net, const OperatingPoint& base, const Mode& mode,
                            const Eigen::VectorXd& dP);

struct VerificationRow {
    double amount = 0.0;
    cplx exact;
    cplx approx;
    double abs_error = 0.0;
};

enum class DThetaSource { Nonlinear, Linear };

// Pair given as generator positions.  Linear sourcing needs rmap.
std::vector<VerificationRow> verification_sweep(const Network& net, const OperatingPoint& base, const Mode& mode,
                                                const SensitivityCoefficients& coeffs, int plus, int minus,
                                                const std::vector<double>& amounts,
                                                DThetaSource source = DThetaSource::Nonlinear,
                                                const RedispatchMap* rmap = nullptr);

// Every directed pair scored by the exact zeta change, best first.
std::vector<PairScore> exact_ranking_after(const Network& net, const OperatingPoint& base, const Mode& mode,
                                           double amount);

} // namespace oscdamp
