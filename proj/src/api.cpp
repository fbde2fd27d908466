#include "oscdamp/api.hpp"

#include <charconv>

#include <json.hpp>

#include "oscdamp/error.hpp"
#include "oscdamp/report.hpp"

namespace oscdamp {

using nlohmann::json;

ApiSnapshot make_snapshot(Analysis a, const AlphaOptions& alpha, LoadReactiveTerm term)
{
    ApiSnapshot s;
    s.analysis = std::move(a);
    s.term = term;
    s.alpha_options = alpha;
    const size_t count = s.analysis.interarea.size();
    s.coefficients.resize(count);
    s.alpha_runs.resize(count);
    s.alpha_errors.resize(count);
    for (size_t k = 0; k < count; ++k) {
        const Mode& mode = s.analysis.modes[s.analysis.interarea[k]];
        if (mode.resonant) {
            s.alpha_errors[k] = "mode is resonant";
            continue;
        }
        s.coefficients[k] = mode_coefficients(s.analysis, mode, term);
        try {
            s.alpha_runs[k] = estimate_mode_alpha(s.analysis, mode, *s.coefficients[k], alpha);
        } catch (const Error& e) {
            s.alpha_errors[k] = e.what();
        }
    }
    return s;
}

namespace {

struct HttpError {
    int status;
    std::string message;
};

ApiResponse reply(int status, const json& j) { return {status, j.dump()}; }

ApiResponse error_reply(int status, const std::string& msg)
{
    return reply(status, {{"schema_version", schema_version}, {"error", msg}});
}

double parse_number(const std::string& s, const char* what)
{
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw HttpError{400, std::string("invalid ") + what};
    return v;
}

int parse_mode_index(std::string_view s)
{
    int k = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
    if (ec != std::errc() || p != s.data() + s.size()) throw HttpError{404, "unknown mode"};
    return k;
}

AlphaSource alpha_source_from(const std::string& s)
{
    if (s == "computed") return AlphaSource::Computed;
    if (s == "estimated" || s == "estimate") return AlphaSource::Estimated;
    throw HttpError{400, "alpha source must be computed or estimated"};
}

DThetaSource dtheta_source_from(const std::string& s)
{
    if (s == "nonlinear") return DThetaSource::Nonlinear;
    if (s == "linear") return DThetaSource::Linear;
    throw HttpError{400, "source must be nonlinear or linear"};
}

ZetaMetric metric_from(const std::string& s)
{
    if (s == "first-order") return ZetaMetric::FirstOrder;
    if (s == "exact") return ZetaMetric::Exact;
    throw HttpError{400, "metric must be first-order or exact"};
}

// Band mode k (1-based) with its coefficients; 404 / 409 as appropriate.
std::pair<const Mode*, const SensitivityCoefficients*> lookup(const ApiSnapshot& snap, int k)
{
    if (k < 1 || k > static_cast<int>(snap.analysis.interarea.size()))
        throw HttpError{404, "unknown mode " + std::to_string(k)};
    const auto& c = snap.coefficients[k - 1];
    if (!c) throw HttpError{409, "mode " + std::to_string(k) + " is resonant; sensitivities refused"};
    return {&band_mode(snap.analysis, k), &*c};
}

RankOptions rank_options(const ApiSnapshot& snap, int k, AlphaSource alpha)
{
    RankOptions o;
    o.alpha = alpha;
    if (alpha == AlphaSource::Estimated) {
        const auto& run = snap.alpha_runs[k - 1];
        if (!run) throw HttpError{500, "alpha estimation failed: " + snap.alpha_errors[k - 1]};
        o.estimated_phase = run->estimate.phase;
    }
    return o;
}

json modes_array(const ApiSnapshot& snap)
{
    json arr = json::array();
    for (size_t k = 0; k < snap.analysis.interarea.size(); ++k) {
        json j = mode_json(snap.analysis.net, snap.analysis.modes[snap.analysis.interarea[k]], static_cast<int>(k) + 1);
        j["schema_version"] = schema_version;
        arr.push_back(std::move(j));
    }
    return arr;
}

ApiResponse ranking(const ApiSnapshot& snap, int k, const QueryMap& q)
{
    auto [mode, c] = lookup(snap, k);
    auto get = [&](const char* key, const char* dflt) {
        auto it = q.find(key);
        return it == q.end() ? std::string(dflt) : it->second;
    };
    const AlphaSource alpha = alpha_source_from(get("alpha", "computed"));
    RankOptions o = rank_options(snap, k, alpha);
    o.amount = parse_number(get("amount", "0.01"), "amount");
    o.source = dtheta_source_from(get("source", "nonlinear"));
    o.metric = metric_from(get("metric", "first-order"));
    const auto pairs = rank_mode(snap.analysis, *mode, *c, o);
    json doc = ranking_json(pairs, k, alpha);
    const double phase = alpha == AlphaSource::Computed ? c->alpha_phase : *o.estimated_phase;
    const Eigen::VectorXcd ct = std::polar(1.0, -phase) * c->Ctheta;
    doc["plot"] = plot_json(line_grayscale(snap.analysis.net, ct.real().cwiseAbs(),
                                           "|Re C_theta| for mode " + std::to_string(k)));
    return reply(200, doc);
}

ApiResponse alpha(const ApiSnapshot& snap, int k)
{
    lookup(snap, k);
    const auto& run = snap.alpha_runs[k - 1];
    if (!run) throw HttpError{500, "alpha estimation failed: " + snap.alpha_errors[k - 1]};
    json doc = alpha_json(*run);
    doc["mode"] = k;
    return reply(200, doc);
}

ApiResponse whatif_request(const ApiSnapshot& snap, const std::string& body)
{
    json req;
    try {
        req = json::parse(body);
    } catch (const json::parse_error&) {
        throw HttpError{400, "request body is not valid JSON"};
    }
    if (!req.is_object()) throw HttpError{400, "request body must be an object"};
    const Network& net = snap.analysis.net;
    try {
        const int k = req.at("mode").get<int>();
        auto [mode, c] = lookup(snap, k);
        const AlphaSource alpha = alpha_source_from(req.value("alpha_source", std::string("computed")));
        RankOptions o = rank_options(snap, k, alpha);
        o.source = dtheta_source_from(req.value("source", std::string("nonlinear")));
        o.metric = metric_from(req.value("metric", std::string("first-order")));

        Eigen::VectorXd dP = Eigen::VectorXd::Zero(net.m);
        if (req.contains("dP")) {
            const json& jd = req["dP"];
            if (!jd.is_object()) throw HttpError{400, "dP must map generator ids to pu changes"};
            for (const auto& [key, val] : jd.items()) {
                int id = 0;
                const auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
                if (ec != std::errc() || p != key.data() + key.size())
                    throw HttpError{400, "dP keys must be generator ids"};
                dP[net.generator_position(id)] += val.get<double>();
            }
        } else {
            const int plus = req.at("plus_gen").get<int>(), minus = req.at("minus_gen").get<int>();
            const double amount = req.at("amount").get<double>();
            if (plus == minus) throw HttpError{400, "plus_gen and minus_gen must differ"};
            if (!(amount > 0)) throw HttpError{400, "amount must be positive"};
            dP[net.generator_position(plus)] = amount;
            dP[net.generator_position(minus)] = -amount;
        }
        const WhatIf w = whatif(snap.analysis, *mode, *c, dP, o);
        json doc = whatif_json(net, w, alpha);
        doc["mode"] = k;
        return reply(200, doc);
    } catch (const json::exception& e) {
        throw HttpError{400, std::string("malformed what-if request: ") + e.what()};
    }
}

} // namespace

ApiResponse handle(const ApiSnapshot& snap, std::string_view method, std::string_view path, const QueryMap& query,
                   const std::string& body)
{
    try {
        if (path == "/api/network") {
            if (method != "GET") throw HttpError{405, "method not allowed"};
            return reply(200, network_state_json(snap.analysis));
        }
        if (path == "/api/modes") {
            if (method != "GET") throw HttpError{405, "method not allowed"};
            return reply(200, modes_array(snap));
        }
        if (path == "/api/whatif") {
            if (method != "POST") throw HttpError{405, "method not allowed"};
            return whatif_request(snap, body);
        }
        constexpr std::string_view prefix = "/api/modes/";
        if (path.starts_with(prefix)) {
            const std::string_view rest = path.substr(prefix.size());
            const size_t slash = rest.find('/');
            if (slash != std::string_view::npos) {
                const std::string_view tail = rest.substr(slash + 1);
                if (tail == "ranking" || tail == "alpha") {
                    if (method != "GET") throw HttpError{405, "method not allowed"};
                    const int k = parse_mode_index(rest.substr(0, slash));
                    return tail == "ranking" ? ranking(snap, k, query) : alpha(snap, k);
                }
            }
        }
        return error_reply(404, "no such endpoint");
    } catch (const HttpError& e) {
        return error_reply(e.status, e.message);
    } catch (const ResonantModeError& e) {
        return error_reply(409, e.what());
    } catch (const DataError& e) {
        return error_reply(400, e.what());
    } catch (const Error& e) {
        return error_reply(500, e.what());
    }
}

} // namespace oscdamp
