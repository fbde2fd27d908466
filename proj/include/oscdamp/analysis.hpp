#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "oscdamp/alpha_estimation.hpp"
#include "oscdamp/grid.hpp"
#include "oscdamp/modal.hpp"
#include "oscdamp/oracle.hpp"
#include "oscdamp/powerflow.hpp"
#include "oscdamp/sensitivity.hpp"

namespace oscdamp {

// Base-case snapshot shared by the CLI and the HTTP service.
struct Analysis {
    Network net;
    OperatingPoint op;
    QepMatrices qep;
    LineQuantities lq;
    RedispatchMap rmap;
    std::vector<Mode> modes;     // all oscillatory modes, ascending frequency
    std::vector<int> interarea;  // indices into modes
    double band_lo = 0.1;
    double band_hi = 1.0;
};

Analysis analyze(Network net, double band_lo = 0.1, double band_hi = 1.0);

// k is 1-based over the in-band modes.
const Mode& band_mode(const Analysis& a, int k);

enum class AlphaSource { Computed, Estimated };
enum class ZetaMetric { FirstOrder, Exact };

SensitivityCoefficients mode_coefficients(const Analysis& a, const Mode& mode,
                                          LoadReactiveTerm term = LoadReactiveTerm::Omit);

struct RankOptions {
    double amount = 0.01;
    AlphaSource alpha = AlphaSource::Computed;
    DThetaSource source = DThetaSource::Nonlinear;
    ZetaMetric metric = ZetaMetric::FirstOrder;
    std::optional<double> estimated_phase;   // rad, required for AlphaSource::Estimated
};

// One directed pair (generator positions).  On the nonlinear path the
// re-solved point is returned through op_out when given.
PairScore score_pair(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c, int plus, int minus,
                     const RankOptions& opt, OperatingPoint* op_out = nullptr);

std::vector<PairScore> rank_mode(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c,
                                 const RankOptions& opt);

struct AlphaRun {
    SampleCloud cloud;
    AlphaEstimate estimate;
    double exact_phase = 0.0;   // rad
};

struct AlphaOptions {
    int samples = 50;
    double trim = 0.3;
    std::uint64_t seed = 1;
    SamplingOptions sampling;
};

AlphaRun estimate_mode_alpha(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c,
                             const AlphaOptions& opt);

struct WhatIf {
    PairScore score;
    cplx ctheta_dtheta;                 // sum C_theta dtheta / alpha (scaled form when alpha is estimated)
    cplx cv_dv;
    Eigen::VectorXd dtheta;             // per line
    Eigen::VectorXd dp;                 // per line
    Eigen::VectorXd re_ctheta;          // |Re C_theta| per line, same scaling as ctheta_dtheta
    Eigen::VectorXd re_ctheta_dtheta;   // |Re C_theta dtheta| per line
    std::optional<cplx> exact_lambda;
    std::optional<double> exact_zeta_after;
};

// A balanced redispatch.  A two-generator dP is scored through score_pair,
// so it reproduces the ranking entry exactly; other vectors are evaluated
// but have no pair identity (plus = minus = 0).  opt.amount is ignored.
WhatIf whatif(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c, const Eigen::VectorXd& dP,
              const RankOptions& opt, bool with_exact = true);

} // namespace oscdamp
