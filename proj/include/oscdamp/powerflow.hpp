#pragma once

#include <utility>

#include <Eigen/Dense>

#include "oscdamp/grid.hpp"

namespace oscdamp {

// Vectors are indexed by bus position (document order).
struct OperatingPoint {
    Eigen::VectorXd delta;
    Eigen::VectorXd V;
    Eigen::VectorXd P;   // network injections at the solution, shunts included
    Eigen::VectorXd Q;
    Eigen::VectorXd Pspec;   // specified injections; the reference entry holds its solved value
    Eigen::VectorXd Qspec;
    double mismatch = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct LineQuantities {
    Eigen::VectorXd theta;   // per line, from minus to
    Eigen::VectorXd p;
    Eigen::VectorXd q;
    Eigen::VectorXd Qload;   // reactive demand per non-internal bus (voltage-slot order)
};

struct RedispatchMap {
    Eigen::MatrixXd Ttheta;  // l x m
    Eigen::MatrixXd TV;      // n x m
};

struct PowerFlowOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int divergence_steps = 3;
};

// P and Q injections over every bus for the given state.
std::pair<Eigen::VectorXd, Eigen::VectorXd>
injections(const Network& net, const Eigen::VectorXd& delta, const Eigen::VectorXd& V);

// Jacobian of (P all buses, Q non-internal buses) with respect to
// (delta all buses, V non-internal buses), rows and columns in slot order.
Eigen::MatrixXd power_jacobian(const Network& net, const Eigen::VectorXd& delta, const Eigen::VectorXd& V);

// loadP/loadQ are specified injections per bus position; entries at internal
// buses are ignored.  The reference generator's dispatch is ignored too: it
// absorbs whatever imbalance remains.
OperatingPoint solve_power_flow(const Network& net, const Eigen::VectorXd& dispatch,
                                const Eigen::VectorXd& loadP, const Eigen::VectorXd& loadQ,
                                const OperatingPoint* guess = nullptr,
                                const PowerFlowOptions& opt = {});

// Base-case solve using the document's dispatch and loads.
OperatingPoint solve_base_case(const Network& net, const PowerFlowOptions& opt = {});

LineQuantities line_quantities(const Network& net, const OperatingPoint& op);

RedispatchMap redispatch_map(const Network& net, const OperatingPoint& op, const Eigen::MatrixXd& L);

// Requires sum(dP) = 0; warm-started from base.
OperatingPoint resolve_redispatch_nonlinear(const Network& net, const OperatingPoint& base,
                                            const Eigen::VectorXd& dP,
                                            const PowerFlowOptions& opt = {});

// (dtheta per line, dV per non-internal bus) between two operating points.
std::pair<Eigen::VectorXd, Eigen::VectorXd>
state_change(const Network& net, const OperatingPoint& from, const OperatingPoint& to);

// Throws DataError unless dP has m entries summing to zero.
void check_balanced(const Network& net, const Eigen::VectorXd& dP);

// dP vector for +amount on one generator position and -amount on another.
Eigen::VectorXd pair_redispatch(const Network& net, int plus, int minus, double amount);

} // namespace oscdamp
