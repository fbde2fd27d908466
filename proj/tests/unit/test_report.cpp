#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "oscdamp/error.hpp"
#include "oscdamp/report.hpp"
#include "random_systems.hpp"

using namespace oscdamp;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string l;
    while (std::getline(ss, l)) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("complex numbers are [re, im]")
{
    CHECK(complex_json(cplx(1.5, -2.0)) == json::array({1.5, -2.0}));
    CHECK(complex_from_json(json::array({0.25, 3})) == cplx(0.25, 3.0));
    CHECK_THROWS_AS(complex_from_json(json::array({1})), ParseError);
    CHECK_THROWS_AS(complex_from_json(json{{"re", 1}}), ParseError);
}

TEST_CASE("ranking CSV layout")
{
    const Analysis a = testsupport::random_analysis(4);
    const Mode& md = a.modes[0];
    const auto pairs = rank_mode(a, md, mode_coefficients(a, md), {});
    const auto rows = lines_of(ranking_csv(pairs));
    REQUIRE(rows.size() == pairs.size() + 1);
    CHECK(rows[0] == "rank,plus_gen,minus_gen,dzeta_percent,re_scaled_dlambda,im_scaled_dlambda,amount_pu");
    CHECK(rows[1].rfind("1,G", 0) == 0);
    for (size_t i = 1; i < rows.size(); ++i) {
        int commas = 0;
        for (char ch : rows[i]) commas += ch == ',';
        CHECK(commas == 6);
    }
    const json j = ranking_json(pairs, 1, AlphaSource::Computed);
    CHECK(j["schema_version"] == schema_version);
    CHECK(j["pairs"].size() == pairs.size());
    CHECK(j["pairs"][0]["scaled_dlambda"].size() == 2);
}

TEST_CASE("plot data")
{
    const Analysis a = testsupport::random_analysis(5);
    const PlotData p = line_grayscale(a.net, a.lq.p, "base p");
    CHECK(p.kind == "line-grayscale");
    CHECK(p.values.size() == static_cast<size_t>(a.net.ell));
    double mx = 0.0;
    for (double v : p.values) {
        CHECK(v >= 0.0);
        mx = std::max(mx, v);
    }
    CHECK(mx == 1.0);
    const PlotData z = line_grayscale(a.net, Eigen::VectorXd::Zero(a.net.ell), "nothing");
    for (double v : z.values) CHECK(v == 0.0);
    const PlotData arrows = mode_arrows(a.net, a.modes[0], "shape");
    CHECK(arrows.values.size() == static_cast<size_t>(a.net.m));
    CHECK(arrows.angles_deg.size() == static_cast<size_t>(a.net.m));
    CHECK(plot_json(arrows)["schema_version"] == schema_version);
}

TEST_CASE("mode documents round-trip")
{
    const Analysis a = testsupport::random_analysis(6);
    const std::string doc = modes_json(a, false).dump();
    const auto modes = parse_modes_json(doc, a.net.dim());
    REQUIRE(modes.size() == a.modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        CHECK(modes[i].lambda == a.modes[i].lambda);
        CHECK(modes[i].x == a.modes[i].x);
    }
    CHECK_THROWS_AS(parse_modes_json(doc, a.net.dim() + 1), ParseError);
    CHECK_THROWS_AS(parse_modes_json("[]", 3), ParseError);
}

TEST_CASE("operating point document")
{
    const Analysis a = testsupport::random_analysis(7);
    const json j = network_state_json(a);
    CHECK(j["schema_version"] == schema_version);
    CHECK(j["converged"] == true);
    CHECK(j["lines"].size() == static_cast<size_t>(a.net.ell));
    for (int k = 0; k < a.net.ell; ++k) CHECK(j["lines"][k]["p"].get<double>() == a.lq.p[k]);
}

TEST_CASE("verification and comparison tables")
{
    std::vector<VerificationRow> rows{{0.001, cplx(-0.04, 3.4), cplx(-0.04, 3.41), 0.01}};
    const auto v = lines_of(verification_csv(rows));
    CHECK(v[0] == "amount_pu,re_exact,im_exact,re_approx,im_approx,abs_error");
    CHECK(v.size() == 2);
    PairScore p;
    p.plus = 5;
    p.minus = 9;
    p.dzeta_score = 1e-4;
    const auto c = lines_of(ranking_comparison_csv({p}, {p, p}));
    CHECK(c[0] == "rank,formula_pair,formula_dzeta_percent,exact_pair,exact_dzeta_percent");
    CHECK(c.size() == 3);
    CHECK(c[2].rfind("2,,,G5+ G9-", 0) == 0);
}
