#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oscdamp {

enum class BusKind { Load, GeneratorTerminal, GeneratorInternal };

const char* to_string(BusKind k);
BusKind bus_kind_from_string(const std::string& s);

struct Bus {
    int id = 0;
    BusKind kind = BusKind::Load;
    std::optional<double> V;   // set-point for internal buses, initial guess otherwise
    double P = 0.0;            // injection, generation positive
    double Q = 0.0;
    double b_shunt = 0.0;      // lossless shunt susceptance (line charging)
    std::optional<std::array<double, 2>> layout;
};

struct Line {
    int id = 0;
    int from = 0;
    int to = 0;
    double b = 0.0;
};

struct Generator {
    int id = 0;
    int internal_bus = 0;
    int terminal_bus = 0;
    double h = 0.0;
    double d = 0.0;
    double xd = 0.0;
    double v_internal = 1.0;
    double p_base = 0.0;
};

// State ordering used everywhere: generator-internal angles (generator
// order), then the other bus angles (document order), then the voltages of
// the non-internal buses in the same order.
struct Network {
    std::string name;
    std::string source;
    double base_mva = 100.0;
    double frequency_hz = 60.0;
    std::optional<int> reference_generator;
    std::vector<int> ambient_excluded_buses;

    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;

    // derived by finalize()
    int n = 0;
    int m = 0;
    int ell = 0;
    std::vector<int> angle_slot;     // bus position -> angle slot
    std::vector<int> voltage_slot;   // bus position -> slot in 0..n-1, -1 for internal
    std::vector<int> slot_bus;       // angle slot -> bus position
    std::vector<int> line_from;      // line -> bus position
    std::vector<int> line_to;
    std::vector<int> gen_internal;   // generator -> bus position
    int reference = 0;               // generator position of the angle reference

    double omega0() const;
    int dim() const { return 2 * n + m; }
    int bus_position(int id) const;
    int generator_position(int id) const;
    bool is_internal(int pos) const { return voltage_slot[pos] < 0; }

    // The base-case load injections over all buses (internal entries zero).
    Eigen::VectorXd load_P() const;
    Eigen::VectorXd load_Q() const;
    Eigen::VectorXd base_dispatch() const;

private:
    std::map<int, int> bus_pos_;
    std::map<int, int> gen_pos_;
    friend void finalize(Network&);
};

// Validates every invariant and fills the derived members.  Throws DataError.
void finalize(Network& net);

Network parse_network(const std::string& text);
Network load_network(const std::filesystem::path& path);
std::string serialize_network(const Network& net);

// l x (n+m), columns in angle-slot order.
Eigen::MatrixXd incidence_matrix(const Network& net);

// Same network with line k's orientation reversed.
Network flip_line(const Network& net, int k);

} // namespace oscdamp
