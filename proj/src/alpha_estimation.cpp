#include "oscdamp/alpha_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "oscdamp/error.hpp"

namespace oscdamp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double pi = std::numbers::pi;

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double median(std::vector<double> v)
{
    const size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + h, v.end());
    double hi = v[h];
    if (v.size() % 2) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + h);
    return 0.5 * (lo + hi);
}

// Unit directions for d > 2, fixed once.  Drawn from a portable generator so
// the set is identical across standard libraries.
MatrixXd direction_set(int d, int count)
{
    std::mt19937_64 gen(0x5eed0fd1ULL + d);
    auto unif = [&] { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; };
    MatrixXd U(count, d);
    for (int r = 0; r < count; ++r) {
        for (int c = 0; c < d; ++c) {
            // Box-Muller
            U(r, c) = std::sqrt(-2.0 * std::log(unif())) * std::cos(2.0 * pi * unif());
        }
        U.row(r).normalize();
    }
    return U;
}

} // namespace

double wrap_degrees(double deg)
{
    double w = std::fmod(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    if (w > 180.0) w -= 360.0;
    return w;
}

double wrap_radians(double rad)
{
    double w = std::fmod(rad, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    if (w > pi) w -= 2.0 * pi;
    return w;
}

std::vector<int> varied_loads(const Network& net, ReactiveRule rule)
{
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(net.buses.size()); ++i) {
        const Bus& b = net.buses[i];
        if (net.is_internal(i) || b.P == 0.0) continue;
        if (rule == ReactiveRule::AsWritten && b.Q == 0.0) continue;
        if (std::find(net.ambient_excluded_buses.begin(), net.ambient_excluded_buses.end(), b.id) !=
            net.ambient_excluded_buses.end())
            continue;
        out.push_back(i);
    }
    return out;
}

double reactive_perturbation(double P, double Q, double Pr, ReactiveRule rule)
{
    if (Pr == 0.0) return 0.0;
    if (rule == ReactiveRule::AsWritten) return Q == 0.0 ? 0.0 : (P / Q) * Pr;
    return P == 0.0 ? 0.0 : (Q / P) * Pr;
}

std::vector<LoadPerturbation> sample_loads(const Network& net, std::uint64_t seed, int count,
                                           const SamplingOptions& opt)
{
    if (!(opt.sigma_fraction > 0)) throw DataError("sigma must be positive");
    if (count < 0) throw DataError("sample count must be nonnegative");
    const std::vector<int> loads = varied_loads(net, opt.rule);
    if (loads.empty()) throw DataError("all loads excluded from variation");
    const int N = net.n + net.m;
    std::vector<LoadPerturbation> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        // independent stream per sample so samples can be produced in any order
        std::mt19937_64 gen(splitmix(seed ^ splitmix(static_cast<std::uint64_t>(k))));
        std::normal_distribution<double> nd(0.0, 1.0);
        LoadPerturbation lp{VectorXd::Zero(N), VectorXd::Zero(N)};
        for (int i : loads) {
            const Bus& b = net.buses[i];
            // demand-side perturbation; P, Q in the document are injections
            const double Pd = -b.P, Qd = -b.Q;
            lp.Pr[i] = nd(gen) * opt.sigma_fraction * std::abs(Pd);
            lp.Qr[i] = reactive_perturbation(Pd, Qd, lp.Pr[i], opt.rule);
        }
        out.push_back(std::move(lp));
    }
    return out;
}

SampleCloud collect_samples(const Network& net, const OperatingPoint& base, const Mode& mode,
                            const Eigen::VectorXcd& Ctheta, const Eigen::VectorXcd& CV,
                            const std::vector<LoadPerturbation>& perturbations)
{
    SampleCloud cloud;
    VectorXd dispatch(net.m);
    for (int g = 0; g < net.m; ++g) dispatch[g] = base.Pspec[net.gen_internal[g]];
    for (const LoadPerturbation& lp : perturbations) {
        if (lp.Pr.isZero(0.0) && lp.Qr.isZero(0.0)) {
            cloud.numerators.emplace_back(0.0);
            cloud.dlambdas.emplace_back(0.0);
            continue;
        }
        OperatingPoint op;
        try {
            op = solve_power_flow(net, dispatch, base.Pspec - lp.Pr, base.Qspec - lp.Qr, &base);
        } catch (const ConvergenceError&) {
            ++cloud.dropped;
            continue;
        }
        auto [dth, dV] = state_change(net, base, op);
        const Eigen::VectorXcd ev = all_eigenvalues(assemble_qep(net, op));
        Eigen::Index k = 0;
        (ev.array() - mode.lambda).abs().minCoeff(&k);
        cloud.numerators.push_back(numerator(Ctheta, CV, dth, dV));
        cloud.dlambdas.push_back(ev[k] - mode.lambda);
    }
    cloud.retained.resize(cloud.numerators.size());
    std::iota(cloud.retained.begin(), cloud.retained.end(), 0);
    return cloud;
}

VectorXd outlyingness(const MatrixXd& points)
{
    const int count = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    MatrixXd X = points;
    MatrixXd U;
    if (d == 2) {
        U.resize(180, 2);
        for (int k = 0; k < 180; ++k) {
            U(k, 0) = std::cos(pi * k / 180.0);
            U(k, 1) = std::sin(pi * k / 180.0);
        }
    } else {
        // coordinates can differ in scale by orders of magnitude
        for (int c = 0; c < d; ++c) {
            std::vector<double> col(X.col(c).data(), X.col(c).data() + count);
            const double med = median(col);
            for (double& v : col) v = std::abs(v - med);
            const double mad = median(col);
            X.col(c).array() -= med;
            if (mad > 0) X.col(c) /= mad;
        }
        U = direction_set(d, 720);
    }
    VectorXd out = VectorXd::Zero(count);
    bool any = false;
    std::vector<double> proj(count), dev(count);
    for (int k = 0; k < U.rows(); ++k) {
        VectorXd pk = X * U.row(k).transpose();
        for (int r = 0; r < count; ++r) proj[r] = pk[r];
        const double med = median(proj);
        for (int r = 0; r < count; ++r) dev[r] = std::abs(proj[r] - med);
        const double mad = median(dev);
        if (!(mad > 0)) continue;
        any = true;
        for (int r = 0; r < count; ++r) out[r] = std::max(out[r], dev[r] / mad);
    }
    if (!any) throw NumericalError("projection depth: cloud is degenerate in every direction");
    return out;
}

int retained_count(int count, double fraction)
{
    return static_cast<int>(std::ceil((1.0 - fraction) * count - 1e-9));
}

std::vector<int> trim_projection_depth(const MatrixXd& points, double fraction)
{
    if (!(fraction >= 0.0 && fraction < 1.0)) throw DataError("trim fraction must lie in [0, 1)");
    const int count = static_cast<int>(points.rows());
    if (count < 3) throw DataError("trimming needs at least 3 points");
    std::vector<int> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    if (fraction == 0.0) return idx;
    const VectorXd o = outlyingness(points);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return o[a] < o[b]; });
    idx.resize(retained_count(count, fraction));
    std::sort(idx.begin(), idx.end());
    return idx;
}

PrincipalAxis principal_axis(const MatrixXd& points)
{
    if (points.rows() < 2 || points.cols() != 2) throw DataError("principal axis needs at least two 2-D points");
    MatrixXd X = points.rowwise() - points.colwise().mean();
    Eigen::Matrix2d C = X.transpose() * X / static_cast<double>(points.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(C);
    const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
    if (!(hi > 0)) throw DataError("principal axis: points coincide");
    if (hi - lo <= 1e-9 * hi) throw NumericalError("principal axis: covariance is isotropic, no preferred direction");
    const Eigen::Vector2d v = es.eigenvectors().col(1);
    double a = std::atan2(v[1], v[0]);
    if (a < 0) a += pi;
    if (a >= pi) a -= pi;
    return {a, hi / (hi + std::max(lo, 0.0))};
}

AlphaEstimate estimate_alpha_phase(const SampleCloud& cloud, double trim_fraction, double min_correlation)
{
    const int count = static_cast<int>(cloud.numerators.size());
    if (count < 3 || retained_count(count, trim_fraction) < 10)
        throw DataError("insufficient samples: need at least 10 retained after trimming, have " +
                        std::to_string(count < 3 ? count : retained_count(count, trim_fraction)));
    MatrixXd P(count, 4);
    for (int r = 0; r < count; ++r)
        P.row(r) << cloud.numerators[r].real(), cloud.numerators[r].imag(), cloud.dlambdas[r].real(),
            cloud.dlambdas[r].imag();
    AlphaEstimate est;
    est.retained = trim_projection_depth(P, trim_fraction);
    const int kept = static_cast<int>(est.retained.size());
    MatrixXd N(kept, 2), L(kept, 2);
    for (int r = 0; r < kept; ++r) {
        N.row(r) = P.row(est.retained[r]).head(2);
        L.row(r) = P.row(est.retained[r]).tail(2);
    }
    est.numerator_axis = principal_axis(N);
    est.dlambda_axis = principal_axis(L);

    auto projections = [](const MatrixXd& X, double a) {
        MatrixXd C = X.rowwise() - X.colwise().mean();
        return VectorXd(C * Eigen::Vector2d(std::cos(a), std::sin(a)));
    };
    const VectorXd pn = projections(N, est.numerator_axis.angle);
    const VectorXd pl = projections(L, est.dlambda_axis.angle);
    const double denom = pn.norm() * pl.norm();
    const double corr = denom > 0 ? pn.dot(pl) / denom : 0.0;
    if (std::abs(corr) < min_correlation)
        throw NumericalError("axis sign ambiguity unresolvable: projection correlation " + std::to_string(corr));
    double al = est.dlambda_axis.angle;
    if (corr < 0) al += pi;
    est.correlation = std::abs(corr);
    est.phase = wrap_radians(est.numerator_axis.angle - al);
    return est;
}

} // namespace oscdamp
