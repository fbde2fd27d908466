#include "oscdamp/sensitivity.hpp"

#include <algorithm>

namespace oscdamp {

using Eigen::VectorXcd;
using Eigen::VectorXd;

VectorXcd coefficients_theta(const ModeShapeEdges& e, const LineQuantities& lq)
{
    const auto xt = e.xtheta.array(), xn = e.xnu.array();
    return ((xt * xt - xn * xn) * lq.p.array().cast<cplx>() + 2.0 * xt * xn * lq.q.array().cast<cplx>()).matrix();
}

namespace {

cplx u_of(const Network& net, const Mode& mode, const OperatingPoint& op, int bus)
{
    const int s = net.voltage_slot[bus];
    return s < 0 ? cplx(0.0) : mode.x[net.n + net.m + s] / op.V[bus];
}

} // namespace

VoltageTerms voltage_terms(const Network& net, const ModeShapeEdges& e, const Mode& mode, const OperatingPoint& op)
{
    VoltageTerms t;
    t.Cq_from.resize(net.ell);
    t.Cp_from.resize(net.ell);
    t.Cq_to.resize(net.ell);
    t.Cp_to.resize(net.ell);
    for (int k = 0; k < net.ell; ++k) {
        const cplx xt = e.xtheta[k], xn = e.xnu[k];
        const cplx ui = u_of(net, mode, op, net.line_from[k]);
        const cplx uj = u_of(net, mode, op, net.line_to[k]);
        t.Cq_from[k] = xn * (xn - 2.0 * ui) - xt * xt;
        t.Cp_from[k] = 2.0 * xt * (xn - ui);
        // for the receiving end the angle difference is taken from that bus
        t.Cq_to[k] = xn * (xn - 2.0 * uj) - xt * xt;
        t.Cp_to[k] = -2.0 * xt * (xn - uj);
    }
    t.CQ.resize(net.n);
    for (int s = 0; s < net.n; ++s) {
        const cplx u = u_of(net, mode, op, net.slot_bus[net.m + s]);
        t.CQ[s] = -2.0 * u * u;
    }
    return t;
}

VectorXcd coefficients_v(const Network& net, const ModeShapeEdges& e, const LineQuantities& lq, const Mode& mode,
                         const OperatingPoint& op, LoadReactiveTerm term)
{
    const VoltageTerms t = voltage_terms(net, e, mode, op);
    VectorXcd CV = VectorXcd::Zero(net.n);
    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        const int si = net.voltage_slot[i], sj = net.voltage_slot[j];
        // seen from the receiving end, theta and p change sign while q does not
        if (si >= 0) CV[si] += (-t.Cq_from[k] * lq.q[k] - t.Cp_from[k] * lq.p[k]) / op.V[i];
        if (sj >= 0) CV[sj] += (-t.Cq_to[k] * lq.q[k] + t.Cp_to[k] * lq.p[k]) / op.V[j];
    }
    if (term == LoadReactiveTerm::AsPrinted) {
        for (int s = 0; s < net.n; ++s) {
            const int bus = net.slot_bus[net.m + s];
            if (op.V[bus] == 0.0) throw NumericalError("zero voltage at a load bus");
            CV[s] -= t.CQ[s] * lq.Qload[s] / op.V[bus];
        }
    }
    return CV;
}

cplx alpha_computed(const Mode& mode, const QepMatrices& q)
{
    const int m = q.m;
    const auto xd = mode.x.head(m).array();
    const cplx a = 2.0 * mode.lambda * (xd * xd * q.M.head(m).array().cast<cplx>()).sum() +
                   (xd * xd * q.D.head(m).array().cast<cplx>()).sum();
    if (std::abs(a) == 0.0) throw NumericalError("alpha vanishes for this mode; sensitivities refused");
    return a;
}

cplx numerator(const VectorXcd& Ctheta, const VectorXcd& CV, const VectorXd& dtheta, const VectorXd& dV)
{
    return (Ctheta.transpose() * dtheta.cast<cplx>()).value() + (CV.transpose() * dV.cast<cplx>()).value();
}

cplx dlambda(const SensitivityCoefficients& c, const VectorXd& dtheta, const VectorXd& dV)
{
    if (!c.alpha) throw DataError("dlambda needs the full alpha; use the scaled form on the measured path");
    return numerator(c.Ctheta, c.CV, dtheta, dV) / *c.alpha;
}

VectorXcd coefficients_p(const VectorXcd& Ctheta, const VectorXcd& CV, double alpha_phase, const RedispatchMap& rmap)
{
    const cplx rot = std::polar(1.0, -alpha_phase);
    return rot * (rmap.Ttheta.cast<cplx>().transpose() * Ctheta + rmap.TV.cast<cplx>().transpose() * CV);
}

void sort_pairs(const Network& net, std::vector<PairScore>& pairs, bool by_dzeta)
{
    auto key = [&](const PairScore& s) {
        return std::pair(net.generator_position(s.plus), net.generator_position(s.minus));
    };
    auto value = [&](const PairScore& s) { return by_dzeta ? s.dzeta.value_or(s.dzeta_score) : s.dzeta_score; };
    std::stable_sort(pairs.begin(), pairs.end(), [&](const PairScore& a, const PairScore& b) {
        if (value(a) != value(b)) return value(a) > value(b);
        return key(a) < key(b);
    });
}

std::vector<PairScore> rank_pairs(const Network& net, const VectorXcd& cp, cplx lambda, double amount)
{
    if (!(amount > 0)) throw DataError("amount must be positive");
    if (net.m < 2) throw DataError("ranking needs at least two generators");
    std::vector<PairScore> out;
    for (int i = 0; i < net.m; ++i)
        for (int j = 0; j < net.m; ++j) {
            if (i == j) continue;
            PairScore s;
            s.plus = net.generators[i].id;
            s.minus = net.generators[j].id;
            s.amount = amount;
            s.scaled_dlambda = (cp[i] - cp[j]) * amount;
            s.dzeta_score = dzeta_first_order(lambda, s.scaled_dlambda);
            out.push_back(s);
        }
    sort_pairs(net, out);
    return out;
}

cplx special_case_dlambda(const Eigen::Vector2cd& xtheta, const Eigen::Vector2d& p, const Eigen::Vector2d& dtheta,
                          cplx alpha)
{
    if (std::abs(alpha) == 0.0) throw DataError("alpha must be nonzero");
    return (xtheta[0] * xtheta[0] * p[0] * dtheta[0] + xtheta[1] * xtheta[1] * p[1] * dtheta[1]) / alpha;
}

} // namespace oscdamp
