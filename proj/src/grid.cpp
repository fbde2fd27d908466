#include "oscdamp/grid.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oscdamp/error.hpp"

namespace oscdamp {

using nlohmann::json;

const char* to_string(BusKind k)
{
    switch (k) {
    case BusKind::Load: return "load";
    case BusKind::GeneratorTerminal: return "generator-terminal";
    case BusKind::GeneratorInternal: return "generator-internal";
    }
    return "?";
}

BusKind bus_kind_from_string(const std::string& s)
{
    if (s == "load") return BusKind::Load;
    if (s == "generator-terminal") return BusKind::GeneratorTerminal;
    if (s == "generator-internal") return BusKind::GeneratorInternal;
    throw ParseError("unknown bus kind '" + s + "'");
}

double Network::omega0() const { return 2.0 * std::numbers::pi * frequency_hz; }

int Network::bus_position(int id) const
{
    auto it = bus_pos_.find(id);
    if (it == bus_pos_.end()) throw DataError("unknown bus id " + std::to_string(id));
    return it->second;
}

int Network::generator_position(int id) const
{
    auto it = gen_pos_.find(id);
    if (it == gen_pos_.end()) throw DataError("unknown generator id " + std::to_string(id));
    return it->second;
}

Eigen::VectorXd Network::load_P() const
{
    Eigen::VectorXd p = Eigen::VectorXd::Zero(buses.size());
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind != BusKind::GeneratorInternal) p[i] = buses[i].P;
    return p;
}

Eigen::VectorXd Network::load_Q() const
{
    Eigen::VectorXd q = Eigen::VectorXd::Zero(buses.size());
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind != BusKind::GeneratorInternal) q[i] = buses[i].Q;
    return q;
}

Eigen::VectorXd Network::base_dispatch() const
{
    Eigen::VectorXd p(generators.size());
    for (size_t g = 0; g < generators.size(); ++g) p[g] = generators[g].p_base;
    return p;
}

namespace {

bool finite(double x) { return std::isfinite(x); }

} // namespace

void finalize(Network& net)
{
    const int N = static_cast<int>(net.buses.size());
    if (N < 2 || net.lines.empty())
        throw DataError("disconnected/degenerate network: need at least two buses and one line");
    if (!(net.base_mva > 0) || !(net.frequency_hz > 0))
        throw DataError("base_mva and frequency_hz must be positive");

    net.bus_pos_.clear();
    net.gen_pos_.clear();
    for (int i = 0; i < N; ++i) {
        const Bus& b = net.buses[i];
        if (!net.bus_pos_.emplace(b.id, i).second)
            throw DataError("duplicate bus id " + std::to_string(b.id));
        if (b.V && !(*b.V > 0)) throw DataError("bus " + std::to_string(b.id) + ": V must be positive");
        if (!finite(b.P) || !finite(b.Q) || !finite(b.b_shunt))
            throw DataError("bus " + std::to_string(b.id) + ": non-finite value");
    }

    std::set<int> line_ids;
    net.line_from.assign(net.lines.size(), 0);
    net.line_to.assign(net.lines.size(), 0);
    std::vector<int> degree(N, 0);
    for (size_t k = 0; k < net.lines.size(); ++k) {
        const Line& l = net.lines[k];
        if (!line_ids.insert(l.id).second) throw DataError("duplicate line id " + std::to_string(l.id));
        if (!(l.b > 0) || !finite(l.b)) throw DataError("line " + std::to_string(l.id) + ": b must be positive");
        if (l.from == l.to) throw DataError("line " + std::to_string(l.id) + ": self-loop");
        net.line_from[k] = net.bus_position(l.from);
        net.line_to[k] = net.bus_position(l.to);
        ++degree[net.line_from[k]];
        ++degree[net.line_to[k]];
    }

    std::vector<int> owner(N, -1);
    net.gen_internal.assign(net.generators.size(), 0);
    for (size_t g = 0; g < net.generators.size(); ++g) {
        const Generator& G = net.generators[g];
        const std::string tag = "generator " + std::to_string(G.id);
        if (!net.gen_pos_.emplace(G.id, static_cast<int>(g)).second)
            throw DataError("duplicate generator id " + std::to_string(G.id));
        if (!(G.h > 0)) throw DataError(tag + ": h must be positive");
        if (!(G.d >= 0)) throw DataError(tag + ": d must be nonnegative");
        if (!(G.xd > 0)) throw DataError(tag + ": xd must be positive");
        if (!(G.v_internal > 0)) throw DataError(tag + ": v_internal must be positive");
        if (!finite(G.p_base)) throw DataError(tag + ": non-finite p_base");
        int ib = net.bus_position(G.internal_bus);
        int tb = net.bus_position(G.terminal_bus);
        if (net.buses[ib].kind != BusKind::GeneratorInternal)
            throw DataError(tag + ": internal bus is not of kind generator-internal");
        if (net.buses[tb].kind == BusKind::GeneratorInternal)
            throw DataError(tag + ": terminal bus is a generator-internal bus");
        if (owner[ib] >= 0) throw DataError(tag + ": internal bus shared with another generator");
        owner[ib] = static_cast<int>(g);
        net.gen_internal[g] = ib;
        if (net.buses[ib].V && std::abs(*net.buses[ib].V - G.v_internal) > 1e-12)
            throw DataError(tag + ": internal bus V differs from v_internal");
        if (std::abs(net.buses[ib].P - G.p_base) > 1e-9)
            throw DataError(tag + ": internal bus P differs from p_base");
        // the internal bus hangs off the terminal through x'd alone
        if (degree[ib] != 1) throw DataError(tag + ": missing generator internal line (internal bus must have exactly one line)");
        bool found = false;
        for (size_t k = 0; k < net.lines.size(); ++k) {
            if (net.line_from[k] != ib && net.line_to[k] != ib) continue;
            int other = net.line_from[k] == ib ? net.line_to[k] : net.line_from[k];
            if (other != tb) throw DataError(tag + ": internal line does not reach the terminal bus");
            if (std::abs(net.lines[k].b * G.xd - 1.0) > 1e-9)
                throw DataError(tag + ": internal line b must equal 1/xd");
            found = true;
        }
        if (!found) throw DataError(tag + ": missing generator internal line");
    }
    for (int i = 0; i < N; ++i)
        if (net.buses[i].kind == BusKind::GeneratorInternal && owner[i] < 0)
            throw DataError("bus " + std::to_string(net.buses[i].id) + ": generator-internal bus without generator");

    net.m = static_cast<int>(net.generators.size());
    net.n = N - net.m;
    net.ell = static_cast<int>(net.lines.size());
    if (net.m < 1) throw DataError("network has no generators");
    if (net.n < 1) throw DataError("network has no non-internal buses");

    // connectivity
    std::vector<std::vector<int>> adj(N);
    for (int k = 0; k < net.ell; ++k) {
        adj[net.line_from[k]].push_back(net.line_to[k]);
        adj[net.line_to[k]].push_back(net.line_from[k]);
    }
    std::vector<char> seen(N, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        ++count;
        for (int v : adj[u])
            if (!seen[v]) { seen[v] = 1; stack.push_back(v); }
    }
    if (count != N) throw DataError("disconnected/degenerate network: graph is not connected");

    net.angle_slot.assign(N, -1);
    net.voltage_slot.assign(N, -1);
    net.slot_bus.assign(N, -1);
    for (int g = 0; g < net.m; ++g) {
        net.angle_slot[net.gen_internal[g]] = g;
        net.slot_bus[g] = net.gen_internal[g];
    }
    int s = 0;
    for (int i = 0; i < N; ++i) {
        if (net.buses[i].kind == BusKind::GeneratorInternal) continue;
        net.angle_slot[i] = net.m + s;
        net.slot_bus[net.m + s] = i;
        net.voltage_slot[i] = s;
        ++s;
    }

    net.reference = 0;
    if (net.reference_generator) net.reference = net.generator_position(*net.reference_generator);
    for (int id : net.ambient_excluded_buses) {
        int p = net.bus_position(id);
        if (net.is_internal(p)) throw DataError("ambient exclusion names a generator-internal bus");
    }
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ParseError(where + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + ": bad value for '" + key + "'");
    }
}

double number(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    if (!obj.at(key).is_number()) throw ParseError(where + ": '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

int integer(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    if (!obj.at(key).is_number_integer()) throw ParseError(where + ": '" + key + "' must be an integer");
    return obj.at(key).get<int>();
}

} // namespace

Network parse_network(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("network document does not parse: ") + e.what());
    }
    check_keys(doc, {"name", "source", "base_mva", "frequency_hz", "reference_generator",
                     "ambient_excluded_buses", "buses", "lines", "generators"}, "network");
    Network net;
    if (doc.contains("name")) net.name = get<std::string>(doc, "name", "network");
    if (doc.contains("source")) net.source = get<std::string>(doc, "source", "network");
    net.base_mva = number(doc, "base_mva", "network");
    net.frequency_hz = doc.contains("frequency_hz") ? number(doc, "frequency_hz", "network") : 60.0;
    if (doc.contains("reference_generator")) net.reference_generator = integer(doc, "reference_generator", "network");
    if (doc.contains("ambient_excluded_buses"))
        net.ambient_excluded_buses = get<std::vector<int>>(doc, "ambient_excluded_buses", "network");

    for (const json& jb : get<json>(doc, "buses", "network")) {
        std::string w = "bus";
        check_keys(jb, {"id", "kind", "V", "P", "Q", "b_shunt", "layout"}, w);
        Bus b;
        b.id = integer(jb, "id", w);
        w = "bus " + std::to_string(b.id);
        b.kind = bus_kind_from_string(get<std::string>(jb, "kind", w));
        if (jb.contains("V")) b.V = number(jb, "V", w);
        b.P = number(jb, "P", w);
        b.Q = number(jb, "Q", w);
        if (jb.contains("b_shunt")) b.b_shunt = number(jb, "b_shunt", w);
        if (jb.contains("layout")) b.layout = get<std::array<double, 2>>(jb, "layout", w);
        net.buses.push_back(b);
    }
    for (const json& jl : get<json>(doc, "lines", "network")) {
        check_keys(jl, {"id", "from", "to", "b"}, "line");
        Line l;
        l.id = integer(jl, "id", "line");
        std::string w = "line " + std::to_string(l.id);
        l.from = integer(jl, "from", w);
        l.to = integer(jl, "to", w);
        l.b = number(jl, "b", w);
        net.lines.push_back(l);
    }
    for (const json& jg : get<json>(doc, "generators", "network")) {
        check_keys(jg, {"id", "internal_bus", "terminal_bus", "h", "d", "xd", "v_internal", "p_base"}, "generator");
        Generator g;
        g.id = integer(jg, "id", "generator");
        std::string w = "generator " + std::to_string(g.id);
        g.internal_bus = integer(jg, "internal_bus", w);
        g.terminal_bus = integer(jg, "terminal_bus", w);
        g.h = number(jg, "h", w);
        g.d = number(jg, "d", w);
        g.xd = number(jg, "xd", w);
        g.v_internal = number(jg, "v_internal", w);
        g.p_base = number(jg, "p_base", w);
        net.generators.push_back(g);
    }
    finalize(net);
    return net;
}

Network load_network(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open network file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

std::string serialize_network(const Network& net)
{
    json doc;
    if (!net.name.empty()) doc["name"] = net.name;
    if (!net.source.empty()) doc["source"] = net.source;
    doc["base_mva"] = net.base_mva;
    doc["frequency_hz"] = net.frequency_hz;
    if (net.reference_generator) doc["reference_generator"] = *net.reference_generator;
    if (!net.ambient_excluded_buses.empty()) doc["ambient_excluded_buses"] = net.ambient_excluded_buses;
    doc["buses"] = json::array();
    for (const Bus& b : net.buses) {
        json jb{{"id", b.id}, {"kind", to_string(b.kind)}, {"P", b.P}, {"Q", b.Q}};
        if (b.V) jb["V"] = *b.V;
        if (b.b_shunt != 0.0) jb["b_shunt"] = b.b_shunt;
        if (b.layout) jb["layout"] = *b.layout;
        doc["buses"].push_back(jb);
    }
    doc["lines"] = json::array();
    for (const Line& l : net.lines)
        doc["lines"].push_back({{"id", l.id}, {"from", l.from}, {"to", l.to}, {"b", l.b}});
    doc["generators"] = json::array();
    for (const Generator& g : net.generators)
        doc["generators"].push_back({{"id", g.id}, {"internal_bus", g.internal_bus},
                                     {"terminal_bus", g.terminal_bus}, {"h", g.h}, {"d", g.d},
                                     {"xd", g.xd}, {"v_internal", g.v_internal}, {"p_base", g.p_base}});
    return doc.dump(1);
}

Eigen::MatrixXd incidence_matrix(const Network& net)
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(net.ell, net.n + net.m);
    for (int k = 0; k < net.ell; ++k) {
        A(k, net.angle_slot[net.line_from[k]]) = 1.0;
        A(k, net.angle_slot[net.line_to[k]]) = -1.0;
    }
    return A;
}

Network flip_line(const Network& net, int k)
{
    Network out = net;
    std::swap(out.lines.at(k).from, out.lines.at(k).to);
    finalize(out);
    return out;
}

} // namespace oscdamp
