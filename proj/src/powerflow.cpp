#include "oscdamp/powerflow.hpp"

#include <cmath>

#include "oscdamp/error.hpp"

namespace oscdamp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::pair<VectorXd, VectorXd> injections(const Network& net, const VectorXd& delta, const VectorXd& V)
{
    const int N = static_cast<int>(net.buses.size());
    VectorXd P = VectorXd::Zero(N), Q = VectorXd::Zero(N);
    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        const double b = net.lines[k].b;
        const double th = delta[i] - delta[j];
        const double bvv = b * V[i] * V[j];
        P[i] += bvv * std::sin(th);
        P[j] -= bvv * std::sin(th);
        Q[i] += b * V[i] * V[i] - bvv * std::cos(th);
        Q[j] += b * V[j] * V[j] - bvv * std::cos(th);
    }
    for (int i = 0; i < N; ++i) Q[i] -= net.buses[i].b_shunt * V[i] * V[i];
    return {P, Q};
}

MatrixXd power_jacobian(const Network& net, const VectorXd& delta, const VectorXd& V)
{
    const int N = net.n + net.m;
    MatrixXd J = MatrixXd::Zero(N + net.n, N + net.n);
    auto vcol = [&](int bus) { return net.voltage_slot[bus] < 0 ? -1 : N + net.voltage_slot[bus]; };
    auto qrow = vcol;

    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        const double b = net.lines[k].b;
        const double th = delta[i] - delta[j];
        const double s = std::sin(th), c = std::cos(th);
        const double bvv = b * V[i] * V[j];
        const int ai = net.angle_slot[i], aj = net.angle_slot[j];
        const int vi = vcol(i), vj = vcol(j);

        J(ai, ai) += bvv * c;
        J(ai, aj) -= bvv * c;
        J(aj, aj) += bvv * c;
        J(aj, ai) -= bvv * c;
        if (vi >= 0) {
            J(ai, vi) += b * V[j] * s;
            J(aj, vi) -= b * V[j] * s;
        }
        if (vj >= 0) {
            J(ai, vj) += b * V[i] * s;
            J(aj, vj) -= b * V[i] * s;
        }
        const int qi = qrow(i), qj = qrow(j);
        if (qi >= 0) {
            J(qi, ai) += bvv * s;
            J(qi, aj) -= bvv * s;
            J(qi, vi) += b * (2.0 * V[i] - V[j] * c);
            if (vj >= 0) J(qi, vj) -= b * V[i] * c;
        }
        if (qj >= 0) {
            J(qj, ai) += bvv * s;
            J(qj, aj) -= bvv * s;
            J(qj, vj) += b * (2.0 * V[j] - V[i] * c);
            if (vi >= 0) J(qj, vi) -= b * V[j] * c;
        }
    }
    for (int i = 0; i < N; ++i) {
        const int q = qrow(i);
        if (q >= 0) J(q, q) -= 2.0 * net.buses[i].b_shunt * V[i];
    }
    return J;
}

namespace {

struct Spec {
    VectorXd P, Q;
};

Spec specified(const Network& net, const VectorXd& dispatch, const VectorXd& loadP, const VectorXd& loadQ)
{
    if (dispatch.size() != net.m) throw DataError("dispatch vector must have one entry per generator");
    const int N = net.n + net.m;
    if (loadP.size() != N || loadQ.size() != N) throw DataError("load vectors must have one entry per bus");
    Spec s{loadP, loadQ};
    for (int g = 0; g < net.m; ++g) {
        s.P[net.gen_internal[g]] = dispatch[g];
        s.Q[net.gen_internal[g]] = 0.0;
    }
    return s;
}

// DC angles from the susceptance Laplacian, reference angle pinned at zero.
OperatingPoint dc_start(const Network& net, const Spec& spec)
{
    const int N = net.n + net.m;
    const int ref = net.gen_internal[net.reference];
    MatrixXd B = MatrixXd::Zero(N, N);
    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        const double b = net.lines[k].b;
        B(i, i) += b;
        B(j, j) += b;
        B(i, j) -= b;
        B(j, i) -= b;
    }
    std::vector<int> keep;
    for (int i = 0; i < N; ++i)
        if (i != ref) keep.push_back(i);
    MatrixXd Br(keep.size(), keep.size());
    VectorXd Pr(keep.size());
    for (size_t a = 0; a < keep.size(); ++a) {
        Pr[a] = spec.P[keep[a]];
        for (size_t c = 0; c < keep.size(); ++c) Br(a, c) = B(keep[a], keep[c]);
    }
    VectorXd th = Br.partialPivLu().solve(Pr);
    OperatingPoint op;
    op.delta = VectorXd::Zero(N);
    op.V = VectorXd::Ones(N);
    for (size_t a = 0; a < keep.size(); ++a) op.delta[keep[a]] = th[a];
    for (int i = 0; i < N; ++i)
        if (net.buses[i].V) op.V[i] = *net.buses[i].V;
    return op;
}

OperatingPoint newton(const Network& net, const Spec& spec, OperatingPoint op, const PowerFlowOptions& opt)
{
    const int N = net.n + net.m;
    const int refslot = net.reference;   // internal angles occupy slots 0..m-1
    const int ref = net.gen_internal[net.reference];
    for (int g = 0; g < net.m; ++g) op.V[net.gen_internal[g]] = net.generators[g].v_internal;
    op.delta.array() -= op.delta[ref];

    std::vector<int> free;   // reduced index -> slot
    for (int s = 0; s < N + net.n; ++s)
        if (s != refslot) free.push_back(s);
    const int nf = static_cast<int>(free.size());

    auto mismatch = [&](const VectorXd& P, const VectorXd& Q) {
        VectorXd F(nf);
        for (int r = 0; r < nf; ++r) {
            const int s = free[r];
            if (s < N) {
                const int bus = net.slot_bus[s];
                F[r] = P[bus] - spec.P[bus];
            } else {
                const int bus = net.slot_bus[net.m + (s - N)];
                F[r] = Q[bus] - spec.Q[bus];
            }
        }
        return F;
    };

    double prev = INFINITY;
    int growth = 0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        auto [P, Q] = injections(net, op.delta, op.V);
        VectorXd F = mismatch(P, Q);
        const double norm = F.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(norm)) throw ConvergenceError("power flow diverged (non-finite mismatch)");
        op.mismatch = norm;
        op.iterations = it;
        if (norm <= opt.tolerance) {
            op.P = P;
            op.Q = Q;
            op.Pspec = spec.P;
            op.Qspec = spec.Q;
            op.Pspec[ref] = P[ref];
            op.converged = true;
            return op;
        }
        growth = norm > prev ? growth + 1 : 0;
        if (growth >= opt.divergence_steps)
            throw ConvergenceError("power flow diverged (mismatch grew for " +
                                   std::to_string(opt.divergence_steps) + " consecutive steps)");
        prev = norm;

        MatrixXd J = power_jacobian(net, op.delta, op.V);
        MatrixXd Jr(nf, nf);
        for (int r = 0; r < nf; ++r)
            for (int c = 0; c < nf; ++c) Jr(r, c) = J(free[r], free[c]);
        VectorXd step = Jr.partialPivLu().solve(-F);
        for (int r = 0; r < nf; ++r) {
            const int s = free[r];
            if (s < N) op.delta[net.slot_bus[s]] += step[r];
            else op.V[net.slot_bus[net.m + (s - N)]] += step[r];
        }
    }
    throw ConvergenceError("power flow did not converge in " + std::to_string(opt.max_iterations) +
                           " iterations (mismatch " + std::to_string(op.mismatch) + ")");
}

} // namespace

OperatingPoint solve_power_flow(const Network& net, const VectorXd& dispatch, const VectorXd& loadP,
                                const VectorXd& loadQ, const OperatingPoint* guess, const PowerFlowOptions& opt)
{
    Spec spec = specified(net, dispatch, loadP, loadQ);
    if (guess) {
        try {
            return newton(net, spec, *guess, opt);
        } catch (const ConvergenceError&) {
            // fall back to the flat start below
        }
    }
    return newton(net, spec, dc_start(net, spec), opt);
}

OperatingPoint solve_base_case(const Network& net, const PowerFlowOptions& opt)
{
    return solve_power_flow(net, net.base_dispatch(), net.load_P(), net.load_Q(), nullptr, opt);
}

LineQuantities line_quantities(const Network& net, const OperatingPoint& op)
{
    LineQuantities lq;
    lq.theta.resize(net.ell);
    lq.p.resize(net.ell);
    lq.q.resize(net.ell);
    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        const double bvv = net.lines[k].b * op.V[i] * op.V[j];
        lq.theta[k] = op.delta[i] - op.delta[j];
        lq.p[k] = bvv * std::sin(lq.theta[k]);
        lq.q[k] = -bvv * std::cos(lq.theta[k]);
    }
    lq.Qload.resize(net.n);
    for (int s = 0; s < net.n; ++s) lq.Qload[s] = -op.Qspec[net.slot_bus[net.m + s]];
    return lq;
}

RedispatchMap redispatch_map(const Network& net, const OperatingPoint& /*op*/, const MatrixXd& L)
{
    const int N = net.n + net.m;
    if (L.rows() != net.dim() || L.cols() != net.dim()) throw DataError("stiffness matrix has wrong dimension");
    Eigen::JacobiSVD<MatrixXd> svd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    const double tol = sv[0] * 1e-10;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    if (rank != net.dim() - 1)
        throw NumericalError("stiffness pseudoinverse: rank " + std::to_string(rank) + ", expected " +
                             std::to_string(net.dim() - 1));
    VectorXd inv = VectorXd::Zero(sv.size());
    for (int i = 0; i < rank; ++i) inv[i] = 1.0 / sv[i];
    // only the first m columns of L^+ are ever needed
    MatrixXd Ldag = svd.matrixV() * inv.asDiagonal() * svd.matrixU().topRows(net.m).transpose();
    RedispatchMap r;
    r.Ttheta = incidence_matrix(net) * Ldag.topRows(N);
    r.TV = Ldag.bottomRows(net.n);
    return r;
}

void check_balanced(const Network& net, const VectorXd& dP)
{
    if (dP.size() != net.m) throw DataError("redispatch vector must have one entry per generator");
    const double scale = std::max(1.0, dP.cwiseAbs().sum());
    if (std::abs(dP.sum()) > 1e-9 * scale)
        throw DataError("redispatch violates the active power balance constraint (sum of dP must be zero)");
}

VectorXd pair_redispatch(const Network& net, int plus, int minus, double amount)
{
    if (plus == minus) throw DataError("plus and minus generators must differ");
    VectorXd dP = VectorXd::Zero(net.m);
    dP[plus] += amount;
    dP[minus] -= amount;
    return dP;
}

OperatingPoint resolve_redispatch_nonlinear(const Network& net, const OperatingPoint& base, const VectorXd& dP,
                                            const PowerFlowOptions& opt)
{
    check_balanced(net, dP);
    VectorXd dispatch(net.m);
    for (int g = 0; g < net.m; ++g) dispatch[g] = base.Pspec[net.gen_internal[g]] + dP[g];
    if (dP.isZero(0.0)) return base;
    return solve_power_flow(net, dispatch, base.Pspec, base.Qspec, &base, opt);
}

std::pair<VectorXd, VectorXd> state_change(const Network& net, const OperatingPoint& from, const OperatingPoint& to)
{
    VectorXd dth(net.ell), dV(net.n);
    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        dth[k] = (to.delta[i] - to.delta[j]) - (from.delta[i] - from.delta[j]);
    }
    for (int s = 0; s < net.n; ++s) {
        const int bus = net.slot_bus[net.m + s];
        dV[s] = to.V[bus] - from.V[bus];
    }
    return {dth, dV};
}

} // namespace oscdamp
