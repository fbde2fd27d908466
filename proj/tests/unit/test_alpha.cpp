#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oscdamp/analysis.hpp"
#include "oscdamp/error.hpp"
#include "random_systems.hpp"

using namespace oscdamp;
using Eigen::MatrixXd;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

MatrixXd on_line(const std::vector<double>& t, double angle)
{
    MatrixXd P(t.size(), 2);
    for (size_t i = 0; i < t.size(); ++i) P.row(i) << t[i] * std::cos(angle), t[i] * std::sin(angle);
    return P;
}

} // namespace

TEST_CASE("reactive perturbation rule")
{
    CHECK(reactive_perturbation(1.0, 0.5, 0.1, ReactiveRule::AsWritten) == doctest::Approx(0.2));
    CHECK(reactive_perturbation(1.0, 0.5, 0.1, ReactiveRule::ConstantPowerFactor) == doctest::Approx(0.05));
    CHECK(reactive_perturbation(1.0, 0.5, 0.0, ReactiveRule::AsWritten) == 0.0);
}

TEST_CASE("load sampling")
{
    const Network net = load_network(testsupport::data_path("ne39.json"));
    const auto loads = varied_loads(net);
    for (int p : loads) {
        CHECK(net.buses[p].id != 12);
        CHECK(net.buses[p].P != 0.0);
        CHECK(net.buses[p].Q != 0.0);
        CHECK_FALSE(net.is_internal(p));
    }
    const auto a = sample_loads(net, 42, 20), b = sample_loads(net, 42, 20), c = sample_loads(net, 43, 20);
    REQUIRE(a.size() == 20);
    bool differs = false;
    for (int i = 0; i < 20; ++i) {
        CHECK(a[i].Pr == b[i].Pr);
        CHECK(a[i].Qr == b[i].Qr);
        differs = differs || a[i].Pr != c[i].Pr;
        CHECK(a[i].Pr[net.bus_position(12)] == 0.0);
    }
    CHECK(differs);
    // prefix stability: the k-th sample does not depend on how many are drawn
    const auto longer = sample_loads(net, 42, 30);
    CHECK(longer[7].Pr == a[7].Pr);
    SamplingOptions bad;
    bad.sigma_fraction = 0.0;
    CHECK_THROWS_AS(sample_loads(net, 1, 5, bad), DataError);
}

TEST_CASE("ambient samples")
{
    const Analysis a = testsupport::random_analysis(6);
    const Mode& md = a.modes[0];
    const SensitivityCoefficients c = mode_coefficients(a, md);
    SUBCASE("zero perturbation, zero sample") {
        LoadPerturbation z{Eigen::VectorXd::Zero(a.net.buses.size()), Eigen::VectorXd::Zero(a.net.buses.size())};
        const SampleCloud cloud = collect_samples(a.net, a.op, md, c.Ctheta, c.CV, {z, z, z});
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(cloud.numerators[i]) == 0.0);
            CHECK(std::abs(cloud.dlambdas[i]) < 1e-12);
        }
    }
    SUBCASE("numerator tends to alpha dlambda as sigma shrinks") {
        double prev = 1e300;
        for (double sigma : {1e-2, 1e-3, 1e-4}) {
            SamplingOptions opt;
            opt.sigma_fraction = sigma;
            opt.rule = ReactiveRule::ConstantPowerFactor;
            const SampleCloud cloud =
                collect_samples(a.net, a.op, md, c.Ctheta, c.CV, sample_loads(a.net, 5, 10, opt));
            double worst = 0.0;
            for (size_t i = 0; i < cloud.numerators.size(); ++i)
                worst = std::max(worst, std::abs(cloud.numerators[i] - *c.alpha * cloud.dlambdas[i]) /
                                            std::abs(cloud.numerators[i]));
            CHECK(worst < prev);
            prev = worst;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("projection-depth trimming")
{
    SUBCASE("far outlier dropped") {
        std::vector<double> t;
        for (int i = -6; i <= 6; ++i) t.push_back(i);
        MatrixXd P(t.size() * 2 + 1, 2);
        for (size_t i = 0; i < t.size(); ++i) {
            P.row(2 * i) << t[i], 0.5 * std::sin(t[i]);
            P.row(2 * i + 1) << -t[i], -0.5 * std::sin(t[i]);
        }
        P.row(P.rows() - 1) << 40.0, 35.0;
        const auto kept = trim_projection_depth(P, 0.3);
        CHECK(std::find(kept.begin(), kept.end(), P.rows() - 1) == kept.end());
    }
    SUBCASE("collinear points: the far one goes") {
        const MatrixXd P = on_line({-2, -1, 0, 1, 2, 10}, 0.4);
        const auto kept = trim_projection_depth(P, 0.17);
        CHECK(kept == std::vector<int>{0, 1, 2, 3, 4});
    }
    SUBCASE("fraction zero keeps all") {
        const MatrixXd P = on_line({-2, -1, 0, 1, 2, 10}, 0.4);
        CHECK(trim_projection_depth(P, 0.0).size() == 6);
        CHECK_THROWS_AS(trim_projection_depth(P, 1.0), DataError);
    }
    SUBCASE("retained count never grows with the fraction") {
        for (int n : {10, 37, 50, 101}) {
            int prev = n;
            for (double f = 0.0; f < 0.95; f += 0.01) {
                const int r = retained_count(n, f);
                CHECK(r <= prev);
                prev = r;
            }
        }
        CHECK(retained_count(50, 0.3) == 35);
    }
}

TEST_CASE("principal axis")
{
    CHECK(principal_axis(on_line({-1, 0.3, 2, 5}, 45 * deg)).angle == doctest::Approx(45 * deg));
    CHECK(principal_axis(on_line({-1, 0.3, 2, 5}, 90 * deg)).angle == doctest::Approx(90 * deg));
    // opposite direction folds onto [0, pi)
    CHECK(principal_axis(on_line({-1, 0.3, 2, 5}, -150 * deg)).angle == doctest::Approx(30 * deg));

    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    MatrixXd P(500, 2);
    const double a = 30 * deg;
    for (int i = 0; i < 500; ++i) {
        const double u = 10 * g(rng), v = g(rng);
        P.row(i) << u * std::cos(a) - v * std::sin(a), u * std::sin(a) + v * std::cos(a);
    }
    CHECK(std::abs(principal_axis(P).angle - a) < 2 * deg);

    MatrixXd square(4, 2);
    square << 1, 0, -1, 0, 0, 1, 0, -1;
    CHECK_THROWS_AS(principal_axis(square), NumericalError);
}

TEST_CASE("phase of alpha from paired clouds")
{
    SUBCASE("rays at 30 and -58 degrees") {
        SampleCloud cloud;
        for (int i = 0; i < 20; ++i) {
            const double r = 0.5 + 0.1 * i;
            cloud.numerators.push_back(std::polar(r, 30 * deg));
            cloud.dlambdas.push_back(std::polar(0.3 * r, -58 * deg));
        }
        const AlphaEstimate e = estimate_alpha_phase(cloud, 0.3);
        CHECK(e.phase == doctest::Approx(88 * deg));
        CHECK(e.retained.size() == 14);
    }
    SUBCASE("known alpha with isotropic noise") {
        const cplx alpha = std::polar(0.3, 87 * deg);
        std::mt19937_64 rng(17);
        std::normal_distribution<double> g;
        int within = 0;
        for (int run = 0; run < 20; ++run) {
            SampleCloud cloud;
            for (int i = 0; i < 50; ++i) {
                const cplx num(g(rng), 0.2 * g(rng));
                const cplx dl = num / alpha;
                const double s = 0.01 * std::abs(dl);
                cloud.numerators.push_back(num);
                cloud.dlambdas.push_back(dl + cplx(s * g(rng), s * g(rng)));
            }
            const AlphaEstimate e = estimate_alpha_phase(cloud, 0.3);
            if (std::abs(wrap_radians(e.phase - std::arg(alpha))) < 0.5 * deg) ++within;
        }
        CHECK(within == 20);
    }
    SUBCASE("too few samples") {
        SampleCloud cloud;
        for (int i = 0; i < 3; ++i) {
            cloud.numerators.push_back(cplx(i, 1));
            cloud.dlambdas.push_back(cplx(1, i));
        }
        CHECK_THROWS_WITH_AS(estimate_alpha_phase(cloud, 0.3), doctest::Contains("insufficient samples"), DataError);
    }
}

TEST_CASE("NE-39 mode 1 estimate")
{
    const Analysis a = analyze(load_network(testsupport::data_path("ne39.json")));
    const Mode& md = band_mode(a, 1);
    const SensitivityCoefficients c = mode_coefficients(a, md);
    const AlphaRun r1 = estimate_mode_alpha(a, md, c, {});
    const AlphaRun r2 = estimate_mode_alpha(a, md, c, {});
    CHECK(r1.estimate.phase == r2.estimate.phase);
    CHECK(std::abs(wrap_radians(r1.estimate.phase - r1.exact_phase)) < 0.2 * deg);
    AlphaOptions few;
    few.samples = 3;
    CHECK_THROWS_WITH_AS(estimate_mode_alpha(a, md, c, few), doctest::Contains("insufficient samples"), DataError);
}

TEST_CASE("angle wrapping")
{
    CHECK(wrap_degrees(190.0) == doctest::Approx(-170.0));
    CHECK(wrap_degrees(-180.0) == doctest::Approx(180.0));
    CHECK(wrap_radians(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
}
