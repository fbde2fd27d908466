#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "oscdamp/modal.hpp"
#include "oscdamp/powerflow.hpp"

namespace oscdamp {

// How the per-bus reactive-demand term enters the voltage coefficients.
// Omit is exact to first order; AsPrinted adds -C_Q Q / V with
// C_Q = -2 (x_V / V)^2, which leaves a first-order bias of about 1%.
enum class LoadReactiveTerm { Omit, AsPrinted };

// Internals of the voltage coefficients, exposed for inspection and tests.
struct VoltageTerms {
    Eigen::VectorXcd Cq_from, Cp_from;   // per line, evaluated at the sending end
    Eigen::VectorXcd Cq_to, Cp_to;       // per line, evaluated at the receiving end
    Eigen::VectorXcd CQ;                 // per non-internal bus
};

struct SensitivityCoefficients {
    Eigen::VectorXcd Ctheta;   // per line, not divided by alpha
    Eigen::VectorXcd CV;       // per non-internal bus, not divided by alpha
    Eigen::VectorXcd CP;       // per generator, |alpha| C_P; empty until computed
    std::optional<cplx> alpha; // full value on the computed path
    double alpha_phase = 0.0;  // rad
    int mode = -1;
};

struct PairScore {
    int plus = 0;                 // generator ids
    int minus = 0;
    cplx scaled_dlambda;          // |alpha| dlambda
    double dzeta_score = 0.0;     // first-order change of zeta under scaled_dlambda
    double amount = 0.0;
    std::optional<cplx> dlambda;  // computed-alpha path only
    std::optional<double> dzeta;  // actual zeta change estimate, computed-alpha path only
};

Eigen::VectorXcd coefficients_theta(const ModeShapeEdges& edges, const LineQuantities& lq);

VoltageTerms voltage_terms(const Network& net, const ModeShapeEdges& edges, const Mode& mode,
                           const OperatingPoint& op);

Eigen::VectorXcd coefficients_v(const Network& net, const ModeShapeEdges& edges, const LineQuantities& lq,
                                const Mode& mode, const OperatingPoint& op,
                                LoadReactiveTerm term = LoadReactiveTerm::Omit);

cplx alpha_computed(const Mode& mode, const QepMatrices& q);

// sum C_theta dtheta + sum C_V dV (plain transpose products)
cplx numerator(const Eigen::VectorXcd& Ctheta, const Eigen::VectorXcd& CV,
               const Eigen::VectorXd& dtheta, const Eigen::VectorXd& dV);

cplx dlambda(const SensitivityCoefficients& c, const Eigen::VectorXd& dtheta, const Eigen::VectorXd& dV);

Eigen::VectorXcd coefficients_p(const Eigen::VectorXcd& Ctheta, const Eigen::VectorXcd& CV, double alpha_phase,
                                const RedispatchMap& rmap);

// First-order change of zeta = -Re(l)/|l| along the eigenvalue shift s.
template <class Scalar>
Scalar dzeta_first_order(const std::complex<Scalar>& lambda, const std::complex<Scalar>& s)
{
    const Scalar sg = lambda.real(), w = lambda.imag();
    const Scalar r = std::abs(lambda);
    return -(w * w * s.real() - sg * w * s.imag()) / (r * r * r);
}

// Sorts by dzeta_score (or by dzeta when by_dzeta is set) descending, ties by
// (plus, minus) generator position.
void sort_pairs(const Network& net, std::vector<PairScore>& pairs, bool by_dzeta = false);

std::vector<PairScore> rank_pairs(const Network& net, const Eigen::VectorXcd& cp, cplx lambda, double amount);

cplx special_case_dlambda(const Eigen::Vector2cd& xtheta, const Eigen::Vector2d& p, const Eigen::Vector2d& dtheta,
                          cplx alpha);

} // namespace oscdamp
