#include "oscdamp/report.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "oscdamp/error.hpp"

namespace oscdamp {

using nlohmann::json;

namespace {

constexpr double rad2deg = 180.0 / std::numbers::pi;

// Fixed scientific format keeps CSV tables stable for golden comparisons.
std::string num(double x, int digits = 10)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits, x);
    return buf;
}

json complex_list(const Eigen::VectorXcd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v[i]));
    return a;
}

json real_list(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

} // namespace

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("complex numbers must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json operating_point_json(const Network& net, const OperatingPoint& op)
{
    json doc;
    doc["schema_version"] = schema_version;
    doc["converged"] = op.converged;
    doc["mismatch"] = op.mismatch;
    doc["iterations"] = op.iterations;
    doc["buses"] = json::array();
    for (size_t i = 0; i < net.buses.size(); ++i)
        doc["buses"].push_back({{"id", net.buses[i].id}, {"kind", to_string(net.buses[i].kind)},
                                {"V", op.V[i]}, {"delta", op.delta[i]}, {"P", op.P[i]}, {"Q", op.Q[i]}});
    const LineQuantities lq = line_quantities(net, op);
    doc["lines"] = json::array();
    for (int k = 0; k < net.ell; ++k)
        doc["lines"].push_back({{"id", net.lines[k].id}, {"from", net.lines[k].from}, {"to", net.lines[k].to},
                                {"theta", lq.theta[k]}, {"p", lq.p[k]}, {"q", lq.q[k]}});
    return doc;
}

json network_state_json(const Analysis& a)
{
    json doc = operating_point_json(a.net, a.op);
    if (!a.net.name.empty()) doc["name"] = a.net.name;
    doc["base_mva"] = a.net.base_mva;
    doc["frequency_hz"] = a.net.frequency_hz;
    for (size_t i = 0; i < a.net.buses.size(); ++i)
        if (a.net.buses[i].layout) doc["buses"][i]["layout"] = *a.net.buses[i].layout;
    doc["generators"] = json::array();
    for (int g = 0; g < a.net.m; ++g) {
        const Generator& G = a.net.generators[g];
        doc["generators"].push_back({{"id", G.id}, {"internal_bus", G.internal_bus}, {"terminal_bus", G.terminal_bus},
                                     {"h", G.h}, {"d", G.d}, {"xd", G.xd}, {"v_internal", G.v_internal},
                                     {"p", a.op.P[a.net.gen_internal[g]]}});
    }
    return doc;
}

json mode_json(const Network& net, const Mode& mode, int k)
{
    json j;
    j["k"] = k;
    j["lambda"] = complex_json(mode.lambda);
    j["frequency_hz"] = mode.f;
    j["zeta"] = mode.zeta;
    j["zeta_percent"] = 100.0 * mode.zeta;
    j["interarea"] = mode.interarea;
    j["resonant"] = mode.resonant;
    j["x"] = complex_list(mode.x);
    json order = json::array();
    for (int s = 0; s < net.n + net.m; ++s) order.push_back({"delta", net.buses[net.slot_bus[s]].id});
    for (int s = 0; s < net.n; ++s) order.push_back({"V", net.buses[net.slot_bus[net.m + s]].id});
    j["x_order"] = order;
    return j;
}

json modes_json(const Analysis& a, bool band_only)
{
    json doc;
    doc["schema_version"] = schema_version;
    doc["band_hz"] = {a.band_lo, a.band_hi};
    doc["modes"] = json::array();
    if (band_only) {
        for (size_t k = 0; k < a.interarea.size(); ++k)
            doc["modes"].push_back(mode_json(a.net, a.modes[a.interarea[k]], static_cast<int>(k) + 1));
    } else {
        for (size_t i = 0; i < a.modes.size(); ++i)
            doc["modes"].push_back(mode_json(a.net, a.modes[i], 0));
    }
    return doc;
}

std::vector<Mode> parse_modes_json(const std::string& text, int expected_dim)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("mode document does not parse: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("modes") || !doc["modes"].is_array())
        throw ParseError("mode document needs a 'modes' array");
    std::vector<Mode> out;
    for (const json& jm : doc["modes"]) {
        if (!jm.contains("lambda") || !jm.contains("x")) throw ParseError("mode needs 'lambda' and 'x'");
        Mode md;
        md.lambda = complex_from_json(jm["lambda"]);
        const json& jx = jm["x"];
        if (!jx.is_array() || static_cast<int>(jx.size()) != expected_dim)
            throw ParseError("mode vector has wrong length");
        md.x.resize(expected_dim);
        for (int i = 0; i < expected_dim; ++i) md.x[i] = complex_from_json(jx[i]);
        md.f = md.lambda.imag() / (2.0 * std::numbers::pi);
        md.zeta = damping_ratio(md.lambda);
        out.push_back(std::move(md));
    }
    return out;
}

std::string ranking_csv(const std::vector<PairScore>& pairs)
{
    std::ostringstream os;
    os << "rank,plus_gen,minus_gen,dzeta_percent,re_scaled_dlambda,im_scaled_dlambda,amount_pu\n";
    for (size_t r = 0; r < pairs.size(); ++r) {
        const PairScore& p = pairs[r];
        os << r + 1 << ",G" << p.plus << ",G" << p.minus << "," << num(100.0 * p.dzeta.value_or(p.dzeta_score)) << ","
           << num(p.scaled_dlambda.real()) << "," << num(p.scaled_dlambda.imag()) << "," << p.amount << "\n";
    }
    return os.str();
}

json ranking_json(const std::vector<PairScore>& pairs, int k, AlphaSource src)
{
    json doc;
    doc["schema_version"] = schema_version;
    doc["mode"] = k;
    doc["alpha_source"] = src == AlphaSource::Computed ? "computed" : "estimated";
    doc["pairs"] = json::array();
    for (size_t r = 0; r < pairs.size(); ++r) {
        const PairScore& p = pairs[r];
        json jp{{"rank", r + 1},
                {"plus_gen", p.plus},
                {"minus_gen", p.minus},
                {"amount_pu", p.amount},
                {"scaled_dlambda", complex_json(p.scaled_dlambda)},
                {"dzeta_score", p.dzeta_score},
                {"dzeta_percent", 100.0 * p.dzeta.value_or(p.dzeta_score)}};
        if (p.dlambda) jp["dlambda"] = complex_json(*p.dlambda);
        doc["pairs"].push_back(jp);
    }
    return doc;
}

std::string sample_cloud_csv(const SampleCloud& cloud)
{
    std::vector<char> kept(cloud.numerators.size(), 0);
    for (int i : cloud.retained) kept[i] = 1;
    std::ostringstream os;
    os << "re_num,im_num,re_dl,im_dl,retained\n";
    for (size_t i = 0; i < cloud.numerators.size(); ++i)
        os << num(cloud.numerators[i].real()) << "," << num(cloud.numerators[i].imag()) << ","
           << num(cloud.dlambdas[i].real()) << "," << num(cloud.dlambdas[i].imag()) << "," << int(kept[i]) << "\n";
    return os.str();
}

std::string verification_csv(const std::vector<VerificationRow>& rows)
{
    std::ostringstream os;
    os << "amount_pu,re_exact,im_exact,re_approx,im_approx,abs_error\n";
    for (const VerificationRow& r : rows)
        os << r.amount << "," << num(r.exact.real()) << "," << num(r.exact.imag()) << "," << num(r.approx.real())
           << "," << num(r.approx.imag()) << "," << num(r.abs_error, 4) << "\n";
    return os.str();
}

std::string ranking_comparison_csv(const std::vector<PairScore>& formula, const std::vector<PairScore>& exact)
{
    std::ostringstream os;
    os << "rank,formula_pair,formula_dzeta_percent,exact_pair,exact_dzeta_percent\n";
    const size_t n = std::max(formula.size(), exact.size());
    for (size_t r = 0; r < n; ++r) {
        os << r + 1;
        for (const auto* list : {&formula, &exact}) {
            if (r < list->size()) {
                const PairScore& p = (*list)[r];
                os << ",G" << p.plus << "+ G" << p.minus << "-," << num(100.0 * p.dzeta.value_or(p.dzeta_score), 6);
            } else {
                os << ",,";
            }
        }
        os << "\n";
    }
    return os.str();
}

PlotData line_grayscale(const Network& net, const Eigen::VectorXd& magnitudes, const std::string& caption)
{
    PlotData p;
    p.kind = "line-grayscale";
    p.caption = caption;
    const double mx = magnitudes.cwiseAbs().maxCoeff();
    for (int k = 0; k < net.ell; ++k) {
        p.labels.push_back(std::to_string(net.lines[k].from) + "-" + std::to_string(net.lines[k].to));
        p.values.push_back(mx > 0 ? std::abs(magnitudes[k]) / mx : 0.0);
    }
    return p;
}

PlotData mode_arrows(const Network& net, const Mode& mode, const std::string& caption)
{
    PlotData p;
    p.kind = "mode-arrows";
    p.caption = caption;
    double mx = 0.0;
    for (int g = 0; g < net.m; ++g) mx = std::max(mx, std::abs(mode.x[g]));
    for (int g = 0; g < net.m; ++g) {
        p.labels.push_back("G" + std::to_string(net.generators[g].id));
        p.values.push_back(mx > 0 ? std::abs(mode.x[g]) / mx : 0.0);
        p.angles_deg.push_back(std::arg(mode.x[g]) * rad2deg);
    }
    return p;
}

json plot_json(const PlotData& p)
{
    json j{{"schema_version", schema_version}, {"kind", p.kind}, {"caption", p.caption},
           {"labels", p.labels}, {"values", p.values}};
    if (!p.angles_deg.empty()) j["angles_deg"] = p.angles_deg;
    return j;
}

json alpha_json(const AlphaRun& run)
{
    const double est = run.estimate.phase * rad2deg, exact = run.exact_phase * rad2deg;
    return {{"schema_version", schema_version},
            {"estimated_deg", est},
            {"exact_deg", exact},
            {"difference_deg", est - exact},
            {"samples", run.cloud.numerators.size()},
            {"dropped", run.cloud.dropped},
            {"retained", run.estimate.retained.size()},
            {"numerator_axis_deg", run.estimate.numerator_axis.angle * rad2deg},
            {"dlambda_axis_deg", run.estimate.dlambda_axis.angle * rad2deg},
            {"numerator_explained", run.estimate.numerator_axis.explained_ratio},
            {"dlambda_explained", run.estimate.dlambda_axis.explained_ratio},
            {"correlation", run.estimate.correlation}};
}

json whatif_json(const Network& net, const WhatIf& w, AlphaSource src)
{
    json j;
    j["schema_version"] = schema_version;
    j["alpha_source"] = src == AlphaSource::Computed ? "computed" : "estimated";
    j["plus_gen"] = w.score.plus;
    j["minus_gen"] = w.score.minus;
    j["amount_pu"] = w.score.amount;
    j["scaled_dlambda"] = complex_json(w.score.scaled_dlambda);
    if (w.score.dlambda) j["dlambda"] = complex_json(*w.score.dlambda);
    j["dzeta_score"] = w.score.dzeta_score;
    j["dzeta_percent"] = 100.0 * w.score.dzeta.value_or(w.score.dzeta_score);
    j["ctheta_dtheta"] = complex_json(w.ctheta_dtheta);
    j["cv_dv"] = complex_json(w.cv_dv);
    if (w.exact_lambda) j["exact_lambda"] = complex_json(*w.exact_lambda);
    if (w.exact_zeta_after) j["exact_zeta_after"] = *w.exact_zeta_after;
    json lines = json::array();
    for (int k = 0; k < net.ell; ++k) lines.push_back(net.lines[k].id);
    j["line_ids"] = lines;
    j["dtheta"] = real_list(w.dtheta);
    j["dp"] = real_list(w.dp);
    j["abs_re_ctheta"] = real_list(w.re_ctheta);
    j["abs_re_ctheta_dtheta"] = real_list(w.re_ctheta_dtheta);
    return j;
}

} // namespace oscdamp
