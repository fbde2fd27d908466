#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oscdamp/analysis.hpp"

namespace oscdamp {

// Everything the service answers from.  Built once, never mutated; every
// request is a pure function of (snapshot, request).
struct ApiSnapshot {
    Analysis analysis;
    LoadReactiveTerm term = LoadReactiveTerm::Omit;
    AlphaOptions alpha_options;
    // indexed by in-band mode (0-based); empty when the mode is resonant
    std::vector<std::optional<SensitivityCoefficients>> coefficients;
    std::vector<std::optional<AlphaRun>> alpha_runs;
    std::vector<std::string> alpha_errors;
};

ApiSnapshot make_snapshot(Analysis a, const AlphaOptions& alpha = {}, LoadReactiveTerm term = LoadReactiveTerm::Omit);

struct ApiResponse {
    int status = 200;
    std::string body;   // JSON
};

using QueryMap = std::map<std::string, std::string>;

// GET  /api/network
// GET  /api/modes
// GET  /api/modes/{k}/ranking?amount=&alpha=&source=&metric=
// GET  /api/modes/{k}/alpha
// POST /api/whatif
ApiResponse handle(const ApiSnapshot& snap, std::string_view method, std::string_view path, const QueryMap& query,
                   const std::string& body);

} // namespace oscdamp
