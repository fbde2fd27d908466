#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "oscdamp/analysis.hpp"

namespace oscdamp {

inline constexpr int schema_version = 1;

nlohmann::json complex_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

nlohmann::json operating_point_json(const Network& net, const OperatingPoint& op);
nlohmann::json network_state_json(const Analysis& a);
nlohmann::json mode_json(const Network& net, const Mode& mode, int k);
nlohmann::json modes_json(const Analysis& a, bool band_only = true);

// Externally supplied ("measured") modes: {"modes": [{"lambda": [re, im], "x": [[re, im], ...]}]}
std::vector<Mode> parse_modes_json(const std::string& text, int expected_dim);

// dzeta_percent carries the zeta change on the computed path and the
// |alpha|-scaled first-order score on the estimated path.
std::string ranking_csv(const std::vector<PairScore>& pairs);
nlohmann::json ranking_json(const std::vector<PairScore>& pairs, int k, AlphaSource src);

std::string sample_cloud_csv(const SampleCloud& cloud);
std::string verification_csv(const std::vector<VerificationRow>& rows);
std::string ranking_comparison_csv(const std::vector<PairScore>& formula, const std::vector<PairScore>& exact);

struct PlotData {
    std::string kind;                 // line-grayscale or mode-arrows
    std::vector<std::string> labels;
    std::vector<double> values;       // normalized, max = 1
    std::vector<double> angles_deg;   // mode-arrows only
    std::string caption;
};

PlotData line_grayscale(const Network& net, const Eigen::VectorXd& magnitudes, const std::string& caption);
PlotData mode_arrows(const Network& net, const Mode& mode, const std::string& caption);
nlohmann::json plot_json(const PlotData& p);

nlohmann::json alpha_json(const AlphaRun& run);
nlohmann::json whatif_json(const Network& net, const WhatIf& w, AlphaSource src);

} // namespace oscdamp
