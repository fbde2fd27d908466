#include "oscdamp/oracle.hpp"

#include <algorithm>
#include <limits>

#include "oscdamp/error.hpp"

namespace oscdamp {

using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

struct Match {
    Eigen::Index nearest = 0;
    double d1 = 0.0;
    double d2 = std::numeric_limits<double>::infinity();
};

Match nearest_two(const VectorXcd& ev, cplx target)
{
    Match m;
    m.d1 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double d = std::abs(ev[i] - target);
        if (d < m.d1) {
            m.d2 = m.d1;
            m.d1 = d;
            m.nearest = i;
        } else if (d < m.d2) {
            m.d2 = d;
        }
    }
    return m;
}

VectorXd dispatch_of(const Network& net, const OperatingPoint& op)
{
    VectorXd p(net.m);
    for (int g = 0; g < net.m; ++g) p[g] = op.Pspec[net.gen_internal[g]];
    return p;
}

} // namespace

TrackedEigenvalue track_eigenvalue(const Network& net, const OperatingPoint& base, cplx lambda, const VectorXd& dP,
                                   const TrackingOptions& opt)
{
    check_balanced(net, dP);
    TrackedEigenvalue out{lambda, base, 0};
    if (dP.isZero(0.0)) return out;

    const VectorXd p0 = dispatch_of(net, base);
    VectorXcd spectrum = all_eigenvalues(assemble_qep(net, base));
    double t = 0.0, step = 1.0;
    while (t < 1.0) {
        const double tn = std::min(1.0, t + step);
        OperatingPoint op = solve_power_flow(net, p0 + tn * dP, base.Pspec, base.Qspec, &out.op);
        const VectorXcd ev = all_eigenvalues(assemble_qep(net, op));

        // gap from the tracked eigenvalue to its neighbours in the previous spectrum
        const Match self = nearest_two(spectrum, out.lambda);
        const double gap = self.d2;
        const Match cand = nearest_two(ev, out.lambda);
        const bool ambiguous = cand.d2 - cand.d1 <= 1e-12 * std::max(1.0, std::abs(out.lambda));
        if (cand.d1 < 0.5 * gap && !ambiguous) {
            out.lambda = ev[cand.nearest];
            out.op = std::move(op);
            spectrum = ev;
            t = tn;
            ++out.substeps;
            step = std::min(1.0, 2.0 * step);
            continue;
        }
        step *= 0.5;
        if (step < opt.min_step) {
            if (ambiguous) throw TrackingError("mode tracking ambiguity: two candidates equidistant");
            throw TrackingError("mode tracking failed: eigenvalue moved more than half the gap to its neighbour");
        }
    }
    return out;
}

cplx exact_eigenvalue_after(const Network& net, const OperatingPoint& base, const Mode& mode, const VectorXd& dP)
{
    return track_eigenvalue(net, base, mode.lambda, dP).lambda;
}

std::vector<VerificationRow> verification_sweep(const Network& net, const OperatingPoint& base, const Mode& mode,
                                                const SensitivityCoefficients& coeffs, int plus, int minus,
                                                const std::vector<double>& amounts, DThetaSource source,
                                                const RedispatchMap* rmap)
{
    for (size_t i = 0; i < amounts.size(); ++i) {
        if (!(amounts[i] > 0)) throw DataError("amounts must be positive");
        if (i > 0 && !(amounts[i] > amounts[i - 1])) throw DataError("amounts must be ascending");
    }
    if (source == DThetaSource::Linear && !rmap) throw DataError("linear sourcing needs a redispatch map");
    std::vector<VerificationRow> rows;
    // continuation: each amount starts from the previous one
    OperatingPoint prev_op = base;
    cplx prev_lambda = mode.lambda;
    double prev_amount = 0.0;
    const VectorXd unit = pair_redispatch(net, plus, minus, 1.0);
    for (double a : amounts) {
        TrackedEigenvalue tr = track_eigenvalue(net, prev_op, prev_lambda, (a - prev_amount) * unit);
        VerificationRow r;
        r.amount = a;
        r.exact = tr.lambda;
        VectorXd dth, dV;
        if (source == DThetaSource::Nonlinear) {
            std::tie(dth, dV) = state_change(net, base, tr.op);
        } else {
            dth = rmap->Ttheta * (a * unit);
            dV = rmap->TV * (a * unit);
        }
        r.approx = mode.lambda + dlambda(coeffs, dth, dV);
        r.abs_error = std::abs(r.exact - r.approx);
        rows.push_back(r);
        prev_op = std::move(tr.op);
        prev_lambda = tr.lambda;
        prev_amount = a;
    }
    return rows;
}

std::vector<PairScore> exact_ranking_after(const Network& net, const OperatingPoint& base, const Mode& mode,
                                           double amount)
{
    if (!(amount > 0)) throw DataError("amount must be positive");
    const double z0 = damping_ratio(mode.lambda);
    std::vector<PairScore> out;
    for (int i = 0; i < net.m; ++i)
        for (int j = 0; j < net.m; ++j) {
            if (i == j) continue;
            const cplx l1 = exact_eigenvalue_after(net, base, mode, pair_redispatch(net, i, j, amount));
            PairScore s;
            s.plus = net.generators[i].id;
            s.minus = net.generators[j].id;
            s.amount = amount;
            s.dlambda = l1 - mode.lambda;
            s.dzeta = damping_ratio(l1) - z0;
            s.dzeta_score = *s.dzeta;
            out.push_back(s);
        }
    sort_pairs(net, out, true);
    return out;
}

} // namespace oscdamp
