// oscdamp: rank generator-pair redispatches for interarea damping.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or data error.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscdamp/analysis.hpp"
#include "oscdamp/api.hpp"
#include "oscdamp/error.hpp"
#include "oscdamp/report.hpp"
#include "oscdamp/server.hpp"

using namespace oscdamp;
using nlohmann::json;

namespace {

constexpr double rad2deg = 180.0 / std::numbers::pi;

struct Common {
    std::string network;
    std::string band = "0.1,1.0";
    bool json = false;
    std::string term = "omit";
};

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_double(std::string s, const char* what)
{
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (s == "inf" || s == "infinity" || s == "+inf") return std::numeric_limits<double>::infinity();
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DataError(std::string("invalid ") + what + " '" + s + "'");
}

std::pair<double, double> parse_band(const std::string& s)
{
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw DataError("--band expects lo,hi");
    const double lo = to_double(parts[0], "band"), hi = to_double(parts[1], "band");
    if (!(lo <= hi)) throw DataError("--band needs lo <= hi");
    return {lo, hi};
}

// "5", "G5" -> 5
int generator_id(std::string s)
{
    if (!s.empty() && (s[0] == 'G' || s[0] == 'g')) s.erase(0, 1);
    const double v = to_double(s, "generator id");
    if (v != static_cast<int>(v)) throw DataError("invalid generator id '" + s + "'");
    return static_cast<int>(v);
}

LoadReactiveTerm term_from(const std::string& s)
{
    if (s == "omit") return LoadReactiveTerm::Omit;
    if (s == "as-printed") return LoadReactiveTerm::AsPrinted;
    throw DataError("--load-reactive-term must be omit or as-printed");
}

Analysis load(const Common& c)
{
    std::string path = c.network;
    if (path.empty()) {
        const char* env = std::getenv("OSCDAMP_NETWORK");
        if (!env || !*env) throw DataError("no network file given (argument or OSCDAMP_NETWORK)");
        path = env;
    }
    const auto [lo, hi] = parse_band(c.band);
    return analyze(load_network(path), lo, hi);
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f << text;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    std::string s = buf;
    // rounding noise on a zero prints as -0.000000
    if (s.front() == '-' && s.find_first_not_of("0.", 1) == std::string::npos) s.erase(0, 1);
    return s;
}

std::string complex_text(cplx z)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6f %c j%.5f", z.real(), z.imag() < 0 ? '-' : '+', std::abs(z.imag()));
    return buf;
}

int cmd_loadflow(const Common& c)
{
    const Analysis a = load(c);
    if (c.json) {
        std::cout << network_state_json(a).dump(1) << "\n";
        return 0;
    }
    std::cout << "converged in " << a.op.iterations << " iterations, mismatch " << fmt("%.3e", a.op.mismatch) << "\n";
    std::cout << "bus,kind,V,delta_rad,P,Q\n";
    for (size_t i = 0; i < a.net.buses.size(); ++i)
        std::cout << a.net.buses[i].id << "," << to_string(a.net.buses[i].kind) << "," << fmt("%.6f", a.op.V[i])
                  << "," << fmt("%.6f", a.op.delta[i]) << "," << fmt("%.6f", a.op.P[i]) << ","
                  << fmt("%.6f", a.op.Q[i]) << "\n";
    return 0;
}

int cmd_modes(const Common& c, const std::string& plot)
{
    const Analysis a = load(c);
    if (c.json) {
        std::cout << modes_json(a).dump(1) << "\n";
    } else {
        std::cout << "k,lambda,f_hz,zeta_percent\n";
        for (size_t k = 0; k < a.interarea.size(); ++k) {
            const Mode& md = a.modes[a.interarea[k]];
            std::cout << k + 1 << "," << complex_text(md.lambda) << "," << fmt("%.5f", md.f) << ","
                      << fmt("%.5f", 100.0 * md.zeta) << (md.resonant ? ",resonant" : "") << "\n";
        }
    }
    if (!plot.empty()) {
        json arr = json::array();
        for (size_t k = 0; k < a.interarea.size(); ++k)
            arr.push_back(plot_json(mode_arrows(a.net, a.modes[a.interarea[k]], "mode " + std::to_string(k + 1) + " shape")));
        write_file(plot, arr.dump(1) + "\n");
    }
    return 0;
}

struct AlphaArgs {
    int samples = 50;
    double trim = 0.3;
    double sigma = 0.01;
    std::uint64_t seed = 1;
    std::string reactive = "as-written";
};

AlphaOptions alpha_options(const AlphaArgs& x)
{
    AlphaOptions o;
    o.samples = x.samples;
    o.trim = x.trim;
    o.seed = x.seed;
    if (!(x.sigma > 0)) throw DataError("--sigma must be positive");
    if (!(x.trim >= 0 && x.trim < 1)) throw DataError("--trim must lie in [0, 1)");
    o.sampling.sigma_fraction = x.sigma;
    if (x.reactive == "as-written")
        o.sampling.rule = ReactiveRule::AsWritten;
    else if (x.reactive == "constant-pf")
        o.sampling.rule = ReactiveRule::ConstantPowerFactor;
    else
        throw DataError("--reactive must be as-written or constant-pf");
    return o;
}

struct RankArgs {
    int mode = 1;
    double amount = 0.01;
    std::string alpha = "computed";
    std::string source = "nonlinear";
    std::string metric = "first-order";
    std::string plot, out;
    AlphaArgs est;
};

int cmd_rank(const Common& c, const RankArgs& r)
{
    if (!(r.amount > 0)) throw DataError("amount must be positive");
    const Analysis a = load(c);
    const Mode& md = band_mode(a, r.mode);
    const SensitivityCoefficients sc = mode_coefficients(a, md, term_from(c.term));
    RankOptions o;
    o.amount = r.amount;
    if (r.source == "nonlinear")
        o.source = DThetaSource::Nonlinear;
    else if (r.source == "linear")
        o.source = DThetaSource::Linear;
    else
        throw DataError("--source must be nonlinear or linear");
    if (r.metric == "first-order")
        o.metric = ZetaMetric::FirstOrder;
    else if (r.metric == "exact")
        o.metric = ZetaMetric::Exact;
    else
        throw DataError("--metric must be first-order or exact");
    double phase = sc.alpha_phase;
    if (r.alpha == "computed") {
        o.alpha = AlphaSource::Computed;
    } else if (r.alpha == "estimate" || r.alpha == "estimated") {
        o.alpha = AlphaSource::Estimated;
        phase = estimate_mode_alpha(a, md, sc, alpha_options(r.est)).estimate.phase;
        o.estimated_phase = phase;
    } else {
        throw DataError("--alpha must be computed or estimate");
    }
    const auto pairs = rank_mode(a, md, sc, o);
    const std::string csv = ranking_csv(pairs);
    if (r.out.empty())
        std::cout << csv;
    else
        write_file(r.out, csv);
    if (!r.plot.empty()) {
        const Eigen::VectorXcd ct = std::polar(1.0, -phase) * sc.Ctheta;
        write_file(r.plot, plot_json(line_grayscale(a.net, ct.real().cwiseAbs(),
                                                    "|Re C_theta| for mode " + std::to_string(r.mode)))
                               .dump(1) +
                               "\n");
    }
    return 0;
}

int cmd_alpha(const Common& c, int mode, const AlphaArgs& x, const std::string& cloud)
{
    const AlphaOptions o = alpha_options(x);
    const Analysis a = load(c);
    const Mode& md = band_mode(a, mode);
    const SensitivityCoefficients sc = mode_coefficients(a, md, term_from(c.term));
    const AlphaRun run = estimate_mode_alpha(a, md, sc, o);
    if (!cloud.empty()) write_file(cloud, sample_cloud_csv(run.cloud));
    if (c.json) {
        json doc = alpha_json(run);
        doc["mode"] = mode;
        std::cout << doc.dump(1) << "\n";
        return 0;
    }
    const double est = run.estimate.phase * rad2deg, exact = run.exact_phase * rad2deg;
    std::cout << "mode " << mode << ": estimated angle(alpha) = " << fmt("%.3f", est) << " deg, exact "
              << fmt("%.3f", exact) << " deg, difference " << fmt("%.3f", wrap_degrees(est - exact)) << " deg ("
              << run.estimate.retained.size() << " of " << run.cloud.numerators.size() << " samples kept, "
              << run.cloud.dropped << " dropped)\n";
    return 0;
}

struct VerifyArgs {
    int mode = 1;
    std::string pair = "5,9";
    std::string amounts = "0.0005,0.001,0.01,0.02,0.03";
    double ranking = 0.0;
    std::string source = "nonlinear";
    std::string metric = "first-order";
};

int cmd_verify(const Common& c, const VerifyArgs& v)
{
    const auto ids = split(v.pair, ',');
    if (ids.size() != 2) throw DataError("--pair expects plus,minus");
    const int plus_id = generator_id(ids[0]), minus_id = generator_id(ids[1]);
    std::vector<double> amounts;
    for (const auto& s : split(v.amounts, ',')) {
        amounts.push_back(to_double(s, "amount"));
        if (!(amounts.back() > 0)) throw DataError("amount must be positive");
    }
    if (v.ranking < 0) throw DataError("amount must be positive");
    const Analysis a = load(c);
    const int plus = a.net.generator_position(plus_id), minus = a.net.generator_position(minus_id);
    if (plus == minus) throw DataError("plus and minus generators must differ");
    const Mode& md = band_mode(a, v.mode);
    const SensitivityCoefficients sc = mode_coefficients(a, md, term_from(c.term));
    const DThetaSource src = v.source == "linear" ? DThetaSource::Linear : DThetaSource::Nonlinear;
    if (v.source != "linear" && v.source != "nonlinear") throw DataError("--source must be nonlinear or linear");
    std::cout << verification_csv(verification_sweep(a.net, a.op, md, sc, plus, minus, amounts, src, &a.rmap));
    if (v.ranking > 0) {
        RankOptions o;
        o.amount = v.ranking;
        o.source = src;
        if (v.metric == "exact")
            o.metric = ZetaMetric::Exact;
        else if (v.metric != "first-order")
            throw DataError("--metric must be first-order or exact");
        std::cout << "\n"
                  << ranking_comparison_csv(rank_mode(a, md, sc, o), exact_ranking_after(a.net, a.op, md, v.ranking));
    }
    return 0;
}

int cmd_serve(const Common& c, const std::string& host, int port, const AlphaArgs& x)
{
    const AlphaOptions o = alpha_options(x);
    // Block the shutdown signals before any server thread exists so only the
    // waiter below receives them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    const ApiSnapshot snap = make_snapshot(load(c), o, term_from(c.term));
    Server server(snap);
    const int bound = server.bind(host, port);
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
    server.listen();
    waiter.join();
    std::cout << "stopped" << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rank generator-pair redispatches for interarea mode damping"};
    app.require_subcommand(1);
    Common c;
    auto common = [&](CLI::App* sub) {
        sub->add_option("network", c.network, "network JSON (default: $OSCDAMP_NETWORK)");
        sub->add_option("--band", c.band, "interarea band lo,hi in Hz (inf allowed)");
        sub->add_option("--load-reactive-term", c.term, "omit | as-printed");
    };
    auto alpha_flags = [](CLI::App* sub, AlphaArgs& x) {
        sub->add_option("--samples", x.samples, "ambient samples");
        sub->add_option("--trim", x.trim, "fraction trimmed by projection depth");
        sub->add_option("--sigma", x.sigma, "load std. dev. relative to |P|");
        sub->add_option("--seed", x.seed, "random seed");
        sub->add_option("--reactive", x.reactive, "as-written | constant-pf");
    };

    auto* loadflow = app.add_subcommand("loadflow", "solve the base-case power flow");
    common(loadflow);
    loadflow->add_flag("--json", c.json, "JSON document");

    std::string plot;
    auto* modes = app.add_subcommand("modes", "electromechanical modes in the band");
    common(modes);
    modes->add_flag("--json", c.json, "JSON document");
    modes->add_option("--plot", plot, "write mode-shape arrow data here");

    RankArgs r;
    auto* rank = app.add_subcommand("rank", "rank generator pairs for one mode");
    common(rank);
    rank->add_option("--mode", r.mode, "in-band mode, 1-based");
    rank->add_option("--amount", r.amount, "redispatch amount in pu");
    rank->add_option("--alpha", r.alpha, "computed | estimate");
    rank->add_option("--source", r.source, "nonlinear | linear state change");
    rank->add_option("--metric", r.metric, "first-order | exact zeta change");
    rank->add_option("--plot", r.plot, "write |Re C_theta| line data here");
    rank->add_option("--out", r.out, "write the CSV here instead of stdout");
    alpha_flags(rank, r.est);

    int alpha_mode = 1;
    AlphaArgs ax;
    std::string cloud;
    auto* alpha = app.add_subcommand("alpha", "estimate the phase of alpha from ambient samples");
    common(alpha);
    alpha->add_option("--mode", alpha_mode, "in-band mode, 1-based");
    alpha->add_flag("--json", c.json, "JSON document");
    alpha->add_option("--cloud", cloud, "write the sample cloud CSV here");
    alpha_flags(alpha, ax);

    VerifyArgs v;
    auto* verify = app.add_subcommand("verify", "compare predicted and exact eigenvalues");
    common(verify);
    verify->add_option("--mode", v.mode, "in-band mode, 1-based");
    verify->add_option("--pair", v.pair, "plus,minus generator ids");
    verify->add_option("--amounts", v.amounts, "comma-separated amounts in pu");
    verify->add_option("--ranking", v.ranking, "also compare the full ranking at this amount");
    verify->add_option("--source", v.source, "nonlinear | linear state change");
    verify->add_option("--metric", v.metric, "first-order | exact zeta change for the ranking");

    std::string host = "127.0.0.1";
    int port = 8080;
    AlphaArgs sx;
    auto* serve = app.add_subcommand("serve", "serve the JSON API");
    common(serve);
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port, 0 for any");
    alpha_flags(serve, sx);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*loadflow) return cmd_loadflow(c);
        if (*modes) return cmd_modes(c, plot);
        if (*rank) return cmd_rank(c, r);
        if (*alpha) return cmd_alpha(c, alpha_mode, ax, cloud);
        if (*verify) return cmd_verify(c, v);
        if (*serve) return cmd_serve(c, host, port, sx);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
