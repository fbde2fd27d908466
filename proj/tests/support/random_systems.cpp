#include "random_systems.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

#include "oscdamp/error.hpp"

namespace testsupport {

using namespace oscdamp;

Network random_network(std::mt19937_64& rng, int min_buses, int max_buses)
{
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

    Network net;
    net.name = "random";
    const int N = pick(min_buses, max_buses);
    const int m = pick(2, std::min(N, 4));

    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) order[i] = i + 1;
    std::shuffle(order.begin(), order.end(), rng);
    std::set<int> terminals(order.begin(), order.begin() + m);

    for (int id = 1; id <= N; ++id) {
        Bus b;
        b.id = id;
        const bool term = terminals.count(id) > 0;
        b.kind = term ? BusKind::GeneratorTerminal : BusKind::Load;
        if (!term || uni(0, 1) < 0.4) {
            b.P = -uni(2.0, 9.0);
            b.Q = -uni(0.5, 3.0);
        }
        if (uni(0, 1) < 0.5) b.b_shunt = uni(0.0, 1.0);
        net.buses.push_back(b);
    }
    int line_id = 1;
    std::set<std::pair<int, int>> used;
    auto add_line = [&](int i, int j) {
        if (i == j || used.count({std::min(i, j), std::max(i, j)})) return;
        used.insert({std::min(i, j), std::max(i, j)});
        if (uni(0, 1) < 0.5) std::swap(i, j);
        net.lines.push_back({line_id++, i, j, uni(40.0, 120.0)});
    };
    for (int i = 2; i <= N; ++i) add_line(i, pick(1, i - 1));
    const int extra = pick(0, std::max(0, N - 2));
    for (int e = 0; e < extra; ++e) add_line(pick(1, N), pick(1, N));

    // every system carries some load, otherwise all flows vanish
    if (std::all_of(net.buses.begin(), net.buses.end(), [](const Bus& b) { return b.P == 0.0; })) {
        net.buses[order[0] - 1].P = -uni(2.0, 9.0);
        net.buses[order[0] - 1].Q = -uni(0.5, 3.0);
    }
    double load = 0.0;
    for (const Bus& b : net.buses) load -= b.P;
    std::vector<double> share(m);
    for (double& s : share) s = uni(0.3, 1.0);
    double total = 0.0;
    for (double s : share) total += s;

    int g = 0;
    for (int id : terminals) {
        Generator G;
        G.id = g + 1;
        G.terminal_bus = id;
        G.internal_bus = 100 + g + 1;
        G.h = uni(50.0, 150.0);
        G.d = uni(0.01, 0.1);
        G.xd = uni(0.015, 0.035);
        G.v_internal = uni(1.02, 1.12);
        G.p_base = load * share[g] / total;
        Bus ib;
        ib.id = G.internal_bus;
        ib.kind = BusKind::GeneratorInternal;
        ib.V = G.v_internal;
        ib.P = G.p_base;
        net.buses.push_back(ib);
        net.lines.push_back({line_id++, G.internal_bus, id, 1.0 / G.xd});
        net.generators.push_back(G);
        ++g;
    }
    net.reference_generator = 1;
    finalize(net);
    return net;
}

Analysis random_analysis(std::uint64_t seed, int min_buses, int max_buses)
{
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        try {
            Analysis a = analyze(random_network(rng, min_buses, max_buses), 0.0, 1e9);
            bool ok = !a.modes.empty();
            for (const Mode& md : a.modes) ok = ok && !md.resonant;
            if (ok) return a;
        } catch (const Error&) {
        }
    }
    throw Error("no usable random system");
}

Eigen::VectorXcd descriptor_eigenvalues(const Network& net, const OperatingPoint& op)
{
    using Eigen::MatrixXd;
    const int m = net.m, na = net.dim() - m, d = 2 * m + na;
    const MatrixXd J = power_jacobian(net, op.delta, op.V);
    MatrixXd E = MatrixXd::Zero(d, d), A = MatrixXd::Zero(d, d);
    E.topLeftCorner(m, m).setIdentity();
    A.block(0, m, m, m).setIdentity();
    for (int g = 0; g < m; ++g) {
        E(m + g, m + g) = 2.0 * net.generators[g].h / net.omega0();
        A(m + g, m + g) = -net.generators[g].d;
    }
    A.block(m, 0, m, m) = -J.topLeftCorner(m, m);
    A.block(m, 2 * m, m, na) = -J.topRightCorner(m, na);
    A.block(2 * m, 0, na, m) = -J.bottomLeftCorner(na, m);
    A.block(2 * m, 2 * m, na, na) = -J.bottomRightCorner(na, na);
    Eigen::GeneralizedEigenSolver<MatrixXd> ges(A, E, false);
    const Eigen::VectorXcd al = ges.alphas();
    const Eigen::VectorXd be = ges.betas();
    std::vector<cplx> out;
    for (int i = 0; i < d; ++i)
        if (std::abs(be[i]) > 1e-10 * std::max(1.0, std::abs(al[i]))) out.push_back(al[i] / be[i]);
    return Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::string data_path(const std::string& name) { return std::string(OSCDAMP_DATA_DIR) + "/" + name; }

} // namespace testsupport
