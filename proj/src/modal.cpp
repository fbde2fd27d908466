#include "oscdamp/modal.hpp"

#include <algorithm>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace oscdamp {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

QepMatrices assemble_qep(const Network& net, const OperatingPoint& op)
{
    const int N = net.n + net.m;
    QepMatrices q;
    q.m = net.m;
    q.M = VectorXd::Zero(net.dim());
    q.D = VectorXd::Zero(net.dim());
    for (int g = 0; g < net.m; ++g) {
        q.M[g] = 2.0 * net.generators[g].h / net.omega0();
        q.D[g] = net.generators[g].d;
    }
    // reactive rows divided by the operating-point voltage: symmetric Jacobian
    q.L = power_jacobian(net, op.delta, op.V);
    for (int s = 0; s < net.n; ++s) q.L.row(N + s) /= op.V[net.slot_bus[net.m + s]];
    return q;
}

namespace {

struct Reduced {
    Eigen::PartialPivLU<MatrixXd> Laa;
    MatrixXd Lad;
    MatrixXd A;   // companion matrix
};

Reduced reduce(const QepMatrices& q)
{
    const int m = q.m;
    const int na = static_cast<int>(q.L.rows()) - m;
    Reduced r;
    MatrixXd Laa = q.L.bottomRightCorner(na, na);
    r.Laa.compute(Laa);
    if (na > 0 && !(r.Laa.rcond() > 1e-13))
        throw NumericalError("algebraic block of L is singular (voltage-collapse proximity)");
    r.Lad = q.L.bottomLeftCorner(na, m);
    MatrixXd K = q.L.topLeftCorner(m, m) - q.L.topRightCorner(m, na) * r.Laa.solve(r.Lad);
    VectorXd minv = q.M.head(m).cwiseInverse();
    r.A = MatrixXd::Zero(2 * m, 2 * m);
    r.A.topRightCorner(m, m).setIdentity();
    r.A.bottomLeftCorner(m, m) = -(minv.asDiagonal() * K);
    r.A.bottomRightCorner(m, m).diagonal() = -minv.cwiseProduct(q.D.head(m));
    return r;
}

} // namespace

VectorXcd all_eigenvalues(const QepMatrices& q)
{
    Reduced r = reduce(q);
    Eigen::EigenSolver<MatrixXd> es(r.A, false);
    return es.eigenvalues();
}

VectorXcd normalize_mode(const VectorXcd& x, int angle_count)
{
    Eigen::Index k = 0;
    x.head(angle_count).cwiseAbs().maxCoeff(&k);
    return x / x[k];
}

std::vector<Mode> solve_modes(const QepMatrices& q, double resonance_tol)
{
    const int m = q.m;
    Reduced r = reduce(q);
    Eigen::EigenSolver<MatrixXd> es(r.A, true);
    const VectorXcd ev = es.eigenvalues();
    const Eigen::MatrixXcd vec = es.eigenvectors();
    const int angles = (static_cast<int>(q.L.rows()) + m) / 2;

    // Undamped systems turn the rigid-body zero pair into a Jordan block,
    // which the solver splits into +-j sqrt(eps)-sized conjugates.
    const double floor = 1e-6 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<Mode> out;
    for (int i = 0; i < ev.size(); ++i) {
        const cplx lam = ev[i];
        if (!(lam.imag() > floor)) continue;
        VectorXcd xd = vec.col(i).head(m);
        const VectorXcd rhs = r.Lad.cast<cplx>() * xd;
        VectorXcd xa(rhs.size());
        xa.real() = -r.Laa.solve(VectorXd(rhs.real()));
        xa.imag() = -r.Laa.solve(VectorXd(rhs.imag()));
        VectorXcd x(q.L.rows());
        x << xd, xa;
        Mode md;
        md.lambda = lam;
        md.x = normalize_mode(x, angles);
        md.f = lam.imag() / (2.0 * std::numbers::pi);
        md.zeta = damping_ratio(lam);
        for (int j = 0; j < ev.size(); ++j)
            if (j != i && std::abs(ev[j] - lam) <= resonance_tol * std::abs(lam)) md.resonant = true;
        out.push_back(std::move(md));
    }
    std::sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) { return a.lambda.imag() < b.lambda.imag(); });
    return out;
}

void classify_interarea(std::vector<Mode>& modes, double lo_hz, double hi_hz)
{
    for (Mode& md : modes) md.interarea = md.f >= lo_hz && md.f <= hi_hz;
}

ModeShapeEdges edge_shapes(const Network& net, const Mode& mode, const OperatingPoint& op)
{
    const int N = net.n + net.m;
    auto xdelta = [&](int bus) { return mode.x[net.angle_slot[bus]]; };
    auto u = [&](int bus) -> cplx {
        const int s = net.voltage_slot[bus];
        return s < 0 ? cplx(0.0) : mode.x[N + s] / op.V[bus];
    };
    ModeShapeEdges e;
    e.xtheta.resize(net.ell);
    e.xnu.resize(net.ell);
    for (int k = 0; k < net.ell; ++k) {
        const int i = net.line_from[k], j = net.line_to[k];
        e.xtheta[k] = xdelta(i) - xdelta(j);
        e.xnu[k] = u(i) + u(j);
    }
    return e;
}

} // namespace oscdamp
