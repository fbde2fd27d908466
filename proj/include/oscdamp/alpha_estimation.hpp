#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "oscdamp/grid.hpp"
#include "oscdamp/modal.hpp"
#include "oscdamp/powerflow.hpp"
#include "oscdamp/sensitivity.hpp"

namespace oscdamp {

// Reactive part of a random load sample.  AsWritten uses (P/Q) Pr,
// ConstantPowerFactor uses (Q/P) Pr.
enum class ReactiveRule { AsWritten, ConstantPowerFactor };

struct LoadPerturbation {
    Eigen::VectorXd Pr;   // per bus position
    Eigen::VectorXd Qr;
};

struct SampleCloud {
    std::vector<cplx> numerators;
    std::vector<cplx> dlambdas;
    std::vector<int> retained;   // indices into the two lists
    int dropped = 0;             // samples whose power flow failed
};

struct PrincipalAxis {
    double angle = 0.0;           // rad, in [0, pi)
    double explained_ratio = 0.0;
};

struct AlphaEstimate {
    double phase = 0.0;           // rad, wrapped to (-pi, pi]
    PrincipalAxis numerator_axis;
    PrincipalAxis dlambda_axis;
    double correlation = 0.0;     // after sign resolution
    std::vector<int> retained;
};

struct SamplingOptions {
    double sigma_fraction = 0.01;   // std. dev. relative to each load's |P|
    ReactiveRule rule = ReactiveRule::AsWritten;
};

// Loads eligible for variation: non-internal, nonzero P and Q, not excluded.
std::vector<int> varied_loads(const Network& net, ReactiveRule rule = ReactiveRule::AsWritten);

double reactive_perturbation(double P, double Q, double Pr, ReactiveRule rule);

std::vector<LoadPerturbation> sample_loads(const Network& net, std::uint64_t seed, int count,
                                           const SamplingOptions& opt = {});

SampleCloud collect_samples(const Network& net, const OperatingPoint& base, const Mode& mode,
                            const Eigen::VectorXcd& Ctheta, const Eigen::VectorXcd& CV,
                            const std::vector<LoadPerturbation>& perturbations);

// Rows are points.  2-D clouds use 180 evenly spaced directions in [0, pi);
// higher dimensions use a fixed pseudo-random direction set after a robust
// per-coordinate standardization.
std::vector<int> trim_projection_depth(const Eigen::MatrixXd& points, double fraction);

// Outlyingness of every row; exposed for tests.
Eigen::VectorXd outlyingness(const Eigen::MatrixXd& points);

PrincipalAxis principal_axis(const Eigen::MatrixXd& points);

AlphaEstimate estimate_alpha_phase(const SampleCloud& cloud, double trim_fraction,
                                   double min_correlation = 0.05);

// Number of samples kept by the trimming.
int retained_count(int count, double fraction);

double wrap_degrees(double deg);   // to (-180, 180]
double wrap_radians(double rad);   // to (-pi, pi]

} // namespace oscdamp
