#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "oscdamp/error.hpp"
#include "oscdamp/grid.hpp"
#include "oscdamp/powerflow.hpp"

namespace oscdamp {

using cplx = std::complex<double>;

// (M lambda^2 + D lambda + L) x = 0 in slot order.  M and D are stored as
// diagonals over the full state; only the first m entries are nonzero.
struct QepMatrices {
    Eigen::VectorXd M;
    Eigen::VectorXd D;
    Eigen::MatrixXd L;
    int m = 0;
};

struct Mode {
    cplx lambda;
    Eigen::VectorXcd x;    // (internal angles, other angles, voltages)
    double f = 0.0;        // Hz
    double zeta = 0.0;
    bool interarea = false;
    bool resonant = false;
};

struct ModeShapeEdges {
    Eigen::VectorXcd xtheta;
    Eigen::VectorXcd xnu;
};

template <class Scalar>
Scalar damping_ratio(const std::complex<Scalar>& lambda)
{
    const Scalar r = std::abs(lambda);
    if (r == Scalar(0)) throw DataError("damping ratio undefined for lambda = 0");
    return -lambda.real() / r;
}

// ||(M l^2 + D l + L) x|| / (||L|| ||x||), Frobenius norm for L.
template <class Scalar>
Scalar qep_residual(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& M,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& D,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& L,
                    const std::complex<Scalar>& lambda,
                    const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& x)
{
    using C = std::complex<Scalar>;
    Eigen::Matrix<C, Eigen::Dynamic, 1> r = L.template cast<C>() * x;
    r.array() += (M.template cast<C>().array() * lambda * lambda + D.template cast<C>().array() * lambda) * x.array();
    return r.norm() / (L.norm() * x.norm());
}

inline double qep_residual(const QepMatrices& q, const Mode& mode)
{
    return qep_residual<double>(q.M, q.D, q.L, mode.lambda, mode.x);
}

QepMatrices assemble_qep(const Network& net, const OperatingPoint& op);

// Oscillatory modes (Im lambda > 0) sorted by ascending frequency.
std::vector<Mode> solve_modes(const QepMatrices& q, double resonance_tol = 1e-6);

// Every finite eigenvalue of the reduced problem, conjugates and real ones included.
Eigen::VectorXcd all_eigenvalues(const QepMatrices& q);

void classify_interarea(std::vector<Mode>& modes, double lo_hz = 0.1, double hi_hz = 1.0);

// Scale so the largest-magnitude angle component is 1 + j0.
Eigen::VectorXcd normalize_mode(const Eigen::VectorXcd& x, int angle_count);

ModeShapeEdges edge_shapes(const Network& net, const Mode& mode, const OperatingPoint& op);

} // namespace oscdamp
